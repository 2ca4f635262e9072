#include "hygraph/dense.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "hygraph/errors.hpp"

namespace hygraph {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Dense& m) { return ConstMap(m.values().data(), m.rows(), m.cols()); }
MutMap view(Dense& m) { return MutMap(m.values().data(), m.rows(), m.cols()); }

// Bag-of-words inputs are >95% zeros; skipping them beats a dense GEMM by orders of magnitude.
bool mostly_zero(const Dense& m) {
    if (m.size() < 4096) return false;
    std::size_t nz = 0;
    for (double v : m.values()) nz += (v != 0.0);
    return nz * 4 < m.size();
}

void sparse_left_gemm(const Dense& a, const Dense& b, Dense& out) {
    const std::size_t k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto orow = out.row(i);
        auto arow = a.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            auto brow = b.row(p);
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
}

void sparse_left_at_b(const Dense& a, const Dense& b, Dense& out) {
    const std::size_t k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto arow = a.row(i);
        auto brow = b.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            auto orow = out.row(p);
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
}

}  // namespace

Dense::Dense(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Dense::Dense(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw DimensionError("Dense: " + std::to_string(data_.size()) + " values for shape " +
                             std::to_string(rows_) + "x" + std::to_string(cols_));
}

Dense Dense::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("Dense::from_rows: ragged rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Dense(r, c, std::move(data));
}

Dense Dense::row_vector(std::span<const double> values) {
    return Dense(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Dense Dense::column_vector(std::span<const double> values) {
    return Dense(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Dense Dense::identity(std::size_t n) {
    Dense m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Dense::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Dense::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Dense::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

Dense Dense::transposed() const {
    Dense t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

std::string Dense::shape_string() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

std::string shape_of(const Dense& m) { return m.shape_string(); }

void gemm(const Dense& a, const Dense& b, Dense& out, bool accumulate) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: " + a.shape_string() + " * " + b.shape_string());
    if (out.rows() != a.rows() || out.cols() != b.cols()) {
        if (accumulate) throw DimensionError("matmul: output " + out.shape_string());
        out = Dense(a.rows(), b.cols());
    } else if (!accumulate) {
        out.fill(0.0);
    }
    if (a.empty() || b.empty()) return;
    if (mostly_zero(a)) {
        sparse_left_gemm(a, b, out);
        return;
    }
    view(out).noalias() += view(a) * view(b);
}

void gemm_at_b(const Dense& a, const Dense& b, Dense& out) {
    if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols())
        throw DimensionError("matmul^T: " + a.shape_string() + "^T * " + b.shape_string() +
                             " -> " + out.shape_string());
    if (a.empty() || b.empty()) return;
    if (mostly_zero(a)) {
        sparse_left_at_b(a, b, out);
        return;
    }
    view(out).noalias() += view(a).transpose() * view(b);
}

void gemm_a_bt(const Dense& a, const Dense& b, Dense& out) {
    if (a.cols() != b.cols() || out.rows() != a.rows() || out.cols() != b.rows())
        throw DimensionError("matmul: " + a.shape_string() + " * " + b.shape_string() +
                             "^T -> " + out.shape_string());
    if (a.empty() || b.empty()) return;
    view(out).noalias() += view(a) * view(b).transpose();
}

Dense matmul(const Dense& a, const Dense& b) {
    Dense out;
    gemm(a, b, out);
    return out;
}

}  // namespace hygraph
