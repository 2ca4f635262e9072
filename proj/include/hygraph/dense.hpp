#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hygraph {

// Row-major dense matrix of doubles. Vectors are 1 x n or n x 1 matrices.
class Dense {
public:
    Dense() = default;
    Dense(std::size_t rows, std::size_t cols, double fill = 0.0);
    Dense(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Dense from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Dense row_vector(std::span<const double> values);
    static Dense column_vector(std::span<const double> values);
    static Dense identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool same_shape(const Dense& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    const std::vector<double>& storage() const { return data_; }

    void fill(double v);
    bool all_finite() const;
    double max_abs() const;
    Dense transposed() const;

    std::string shape_string() const;

    friend bool operator==(const Dense& a, const Dense& b) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

std::string shape_of(const Dense& m);

// out = a * b (accumulate == false overwrites out).
void gemm(const Dense& a, const Dense& b, Dense& out, bool accumulate = false);
// out += a^T * b
void gemm_at_b(const Dense& a, const Dense& b, Dense& out);
// out += a * b^T
void gemm_a_bt(const Dense& a, const Dense& b, Dense& out);

Dense matmul(const Dense& a, const Dense& b);

}  // namespace hygraph
