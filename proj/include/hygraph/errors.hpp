#pragma once

#include <stdexcept>
#include <string>

namespace hygraph {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operand shapes do not fit the operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

// A point reached (or crossed) the boundary of the Poincare ball.
class BoundaryError : public Error {
public:
    using Error::Error;
};

// NaN/Inf showed up where finite values are required.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

// Malformed text input; carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Structured input that parses but violates the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

}  // namespace hygraph
