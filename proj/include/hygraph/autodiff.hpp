#pragma once

// Reverse-mode differentiation over Dense values.
//
// Every operation returns a Var that records its inputs and a closure that pushes the
// node's adjoint back into them. The record is rebuilt on every forward pass; nothing is
// cached between iterations except the leaf parameters themselves. Nodes whose inputs are
// all constants do not keep a record at all.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hygraph/dense.hpp"
#include "hygraph/sparse.hpp"

namespace hygraph::ad {

struct Node {
    Dense value;
    Dense adjoint;  // empty until the node first receives a gradient
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> propagate;
    const char* op = "leaf";
    bool requires_grad = false;
    bool backward_done = false;

    // Adds g into the adjoint, allocating it on first use.
    void accumulate(const Dense& g);
    Dense& grad_buffer();
};

class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

    const Dense& value() const { return node_->value; }
    // Zero matrix of the value's shape when no gradient has reached this node.
    Dense adjoint() const;
    std::size_t rows() const { return node_->value.rows(); }
    std::size_t cols() const { return node_->value.cols(); }
    double item() const;
    bool requires_grad() const { return node_->requires_grad; }
    bool valid() const { return static_cast<bool>(node_); }
    Node& node() const { return *node_; }
    const std::shared_ptr<Node>& ptr() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

Var constant(Dense value);
Var variable(Dense value);

// Requires a 1x1 loss. Throws ContractError on a second call for the same loss unless
// reset() was called in between.
void backward(const Var& loss);
// Zeroes every adjoint reachable from `loss` and re-arms backward().
void reset(const Var& loss);

// --- linear algebra -------------------------------------------------------------------
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

// --- element-wise ---------------------------------------------------------------------
enum class Elementwise { add, mul, tanh, sigmoid, relu, scale };
// Binary kinds need `b`; `scale` uses `factor`.
Var elementwise(Elementwise kind, const Var& a, const Var* b = nullptr, double factor = 1.0);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double shift);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var relu(const Var& a);
// Constant element-wise mask (dropout).
Var mul_const(const Var& a, const Dense& mask);

// f applied element-wise; df(x) is its derivative at the input value x.
Var unary(const Var& a, std::function<double(double)> f, std::function<double(double)> df,
          const char* name = "unary");

// --- broadcasting ---------------------------------------------------------------------
Var add_row(const Var& a, const Var& row);  // a: n x d, row: 1 x d
Var mul_col(const Var& a, const Var& col);  // a: n x d, col: n x 1

// --- reductions -----------------------------------------------------------------------
Var sum(const Var& a);        // 1 x 1
Var mean(const Var& a);       // 1 x 1
Var mean_rows(const Var& a);  // 1 x d, average over rows
Var row_dot(const Var& a, const Var& b);            // n x 1
Var minkowski_row_dot(const Var& a, const Var& b);  // n x 1, column 0 carries the minus sign
// Euclidean row norms; the gradient of a zero row is taken as zero.
Var row_norm(const Var& a);

// --- structure ------------------------------------------------------------------------
Var slice_cols(const Var& a, std::size_t begin, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(const Var& a, std::span<const std::size_t> rows);

// --- softmax family -------------------------------------------------------------------
Var softmax_rows(const Var& a);
// weights: nnz x 1, softmax taken within each row segment of `pattern`.
Var segment_softmax(const Var& logits, const CsrPattern& pattern);
// out(i) = sum_{e in row i} weights(e) * dense(cols[e]); rows without entries are zero.
Var spmm(const Var& weights, const CsrPattern& pattern, const Var& dense);

// --- losses ---------------------------------------------------------------------------
// Mean negative log-likelihood of `labels` over the selected rows.
Var cross_entropy(const Var& logits, std::span<const int> labels,
                  std::span<const std::size_t> rows);
// Mean binary cross-entropy of sigmoid(scores) against targets (both n x 1).
Var bce_with_logits(const Var& scores, const Dense& targets);

}  // namespace hygraph::ad
