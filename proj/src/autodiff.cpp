#include "hygraph/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hygraph/errors.hpp"

namespace hygraph::ad {

namespace {

using Propagate = std::function<void(Node&)>;

Var make(Dense value, std::vector<std::shared_ptr<Node>> inputs, const char* op, Propagate fn) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->op = op;
    node->requires_grad =
        std::any_of(inputs.begin(), inputs.end(), [](const auto& n) { return n->requires_grad; });
    if (node->requires_grad) {
        node->inputs = std::move(inputs);
        node->propagate = std::move(fn);
    }
    return Var(std::move(node));
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a.value().same_shape(b.value()))
        throw DimensionError(std::string(op) + ": shape mismatch " + a.value().shape_string() +
                             " vs " + b.value().shape_string());
}

bool wants(const Node& self, std::size_t i) { return self.inputs[i]->requires_grad; }

// Numerically safe log(1 + e^x).
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

void Node::accumulate(const Dense& g) {
    Dense& buf = grad_buffer();
    if (!buf.same_shape(g))
        throw DimensionError(std::string("gradient shape ") + g.shape_string() + " for node " + op +
                             " of shape " + value.shape_string());
    auto dst = buf.values();
    auto src = g.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Dense& Node::grad_buffer() {
    if (adjoint.empty() && !value.empty()) adjoint = Dense(value.rows(), value.cols());
    return adjoint;
}

Dense Var::adjoint() const {
    if (node_->adjoint.empty()) return Dense(rows(), cols());
    return node_->adjoint;
}

double Var::item() const {
    if (rows() != 1 || cols() != 1)
        throw ContractError("item() on non-scalar of shape " + value().shape_string());
    return value()(0, 0);
}

Var constant(Dense value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->op = "constant";
    return Var(std::move(node));
}

Var variable(Dense value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->op = "variable";
    node->requires_grad = true;
    node->adjoint = Dense(node->value.rows(), node->value.cols());
    return Var(std::move(node));
}

namespace {

std::vector<Node*> topological_order(Node* root) {
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
    seen.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Node* child = node->inputs[next++].get();
            if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;  // inputs before consumers
}

}  // namespace

void backward(const Var& loss) {
    Node& root = loss.node();
    if (root.value.rows() != 1 || root.value.cols() != 1)
        throw ContractError("backward: loss must be 1x1, got " + root.value.shape_string());
    if (root.backward_done)
        throw ContractError("backward: already run for this loss; call reset() first");
    root.backward_done = true;
    if (!root.requires_grad) return;

    auto order = topological_order(&root);
    root.grad_buffer()(0, 0) += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->propagate && !n->adjoint.empty()) n->propagate(*n);
    }
}

void reset(const Var& loss) {
    Node& root = loss.node();
    root.backward_done = false;
    if (!root.requires_grad) return;
    for (Node* n : topological_order(&root))
        if (!n->adjoint.empty()) n->adjoint.fill(0.0);
}

// --- linear algebra -----------------------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: shape mismatch " + a.value().shape_string() + " * " +
                             b.value().shape_string());
    return make(hygraph::matmul(a.value(), b.value()), {a.ptr(), b.ptr()}, "matmul", [](Node& self) {
        const Dense& g = self.adjoint;
        Node& a = *self.inputs[0];
        Node& b = *self.inputs[1];
        if (wants(self, 0)) gemm_a_bt(g, b.value, a.grad_buffer());
        if (wants(self, 1)) gemm_at_b(a.value, g, b.grad_buffer());
    });
}

Var transpose(const Var& a) {
    return make(a.value().transposed(), {a.ptr()}, "transpose",
                [](Node& self) { self.inputs[0]->accumulate(self.adjoint.transposed()); });
}

// --- element-wise -------------------------------------------------------------------------

Var add(const Var& a, const Var& b) {
    require_same_shape(a, b, "add");
    Dense out = a.value();
    auto o = out.values();
    auto bv = b.value().values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
    return make(std::move(out), {a.ptr(), b.ptr()}, "add", [](Node& self) {
        for (std::size_t i = 0; i < 2; ++i)
            if (wants(self, i)) self.inputs[i]->accumulate(self.adjoint);
    });
}

Var sub(const Var& a, const Var& b) {
    require_same_shape(a, b, "sub");
    Dense out = a.value();
    auto o = out.values();
    auto bv = b.value().values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
    return make(std::move(out), {a.ptr(), b.ptr()}, "sub", [](Node& self) {
        if (wants(self, 0)) self.inputs[0]->accumulate(self.adjoint);
        if (wants(self, 1)) {
            auto g = self.inputs[1]->grad_buffer().values();
            auto s = self.adjoint.values();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= s[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape(a, b, "mul");
    Dense out = a.value();
    auto o = out.values();
    auto bv = b.value().values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
    return make(std::move(out), {a.ptr(), b.ptr()}, "mul", [](Node& self) {
        auto g = self.adjoint.values();
        for (std::size_t k = 0; k < 2; ++k) {
            if (!wants(self, k)) continue;
            auto other = self.inputs[1 - k]->value.values();
            auto dst = self.inputs[k]->grad_buffer().values();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * other[i];
        }
    });
}

Var div(const Var& a, const Var& b) {
    require_same_shape(a, b, "div");
    Dense out = a.value();
    auto o = out.values();
    auto bv = b.value().values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] /= bv[i];
    return make(std::move(out), {a.ptr(), b.ptr()}, "div", [](Node& self) {
        auto g = self.adjoint.values();
        auto av = self.inputs[0]->value.values();
        auto bv = self.inputs[1]->value.values();
        if (wants(self, 0)) {
            auto dst = self.inputs[0]->grad_buffer().values();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] / bv[i];
        }
        if (wants(self, 1)) {
            auto dst = self.inputs[1]->grad_buffer().values();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= g[i] * av[i] / (bv[i] * bv[i]);
        }
    });
}

Var scale(const Var& a, double factor) {
    Dense out = a.value();
    for (double& v : out.values()) v *= factor;
    return make(std::move(out), {a.ptr()}, "scale", [factor](Node& self) {
        auto dst = self.inputs[0]->grad_buffer().values();
        auto g = self.adjoint.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += factor * g[i];
    });
}

Var add_scalar(const Var& a, double shift) {
    Dense out = a.value();
    for (double& v : out.values()) v += shift;
    return make(std::move(out), {a.ptr()}, "add_scalar",
                [](Node& self) { self.inputs[0]->accumulate(self.adjoint); });
}

namespace {

// Element-wise map whose derivative is expressed through the output value.
template <class F, class DF>
Var map_by_output(const Var& a, F f, DF dfy, const char* name) {
    Dense out = a.value();
    for (double& v : out.values()) v = f(v);
    return make(std::move(out), {a.ptr()}, name, [dfy](Node& self) {
        auto dst = self.inputs[0]->grad_buffer().values();
        auto g = self.adjoint.values();
        auto y = self.value.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * dfy(y[i]);
    });
}

}  // namespace

Var tanh(const Var& a) {
    return map_by_output(
        a, [](double x) { return std::tanh(x); }, [](double y) { return 1.0 - y * y; }, "tanh");
}

Var sigmoid(const Var& a) {
    return map_by_output(a, logistic, [](double y) { return y * (1.0 - y); }, "sigmoid");
}

Var relu(const Var& a) {
    return map_by_output(
        a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double y) { return y > 0.0 ? 1.0 : 0.0; },
        "relu");
}

Var mul_const(const Var& a, const Dense& mask) {
    if (!a.value().same_shape(mask))
        throw DimensionError("mul_const: shape mismatch " + a.value().shape_string() + " vs " +
                             mask.shape_string());
    Dense out = a.value();
    auto o = out.values();
    auto m = mask.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= m[i];
    return make(std::move(out), {a.ptr()}, "mul_const", [mask](Node& self) {
        auto dst = self.inputs[0]->grad_buffer().values();
        auto g = self.adjoint.values();
        auto m = mask.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * m[i];
    });
}

Var unary(const Var& a, std::function<double(double)> f, std::function<double(double)> df,
          const char* name) {
    Dense out = a.value();
    for (double& v : out.values()) v = f(v);
    return make(std::move(out), {a.ptr()}, name, [df = std::move(df)](Node& self) {
        Node& in = *self.inputs[0];
        auto dst = in.grad_buffer().values();
        auto g = self.adjoint.values();
        auto x = in.value.values();
        for (std::size_t i = 0; i < dst.size(); ++i)
            if (g[i] != 0.0) dst[i] += g[i] * df(x[i]);
    });
}

Var elementwise(Elementwise kind, const Var& a, const Var* b, double factor) {
    auto need_b = [&]() -> const Var& {
        if (!b) throw ContractError("elementwise: binary operation without second operand");
        return *b;
    };
    switch (kind) {
        case Elementwise::add: return add(a, need_b());
        case Elementwise::mul: return mul(a, need_b());
        case Elementwise::tanh: return tanh(a);
        case Elementwise::sigmoid: return sigmoid(a);
        case Elementwise::relu: return relu(a);
        case Elementwise::scale: return scale(a, factor);
    }
    throw ContractError("elementwise: unknown operation");
}

// --- broadcasting -------------------------------------------------------------------------

Var add_row(const Var& a, const Var& row) {
    if (row.rows() != 1 || row.cols() != a.cols())
        throw DimensionError("add_row: " + a.value().shape_string() + " + " +
                             row.value().shape_string());
    Dense out = a.value();
    auto rv = row.value().row(0);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto o = out.row(r);
        for (std::size_t c = 0; c < o.size(); ++c) o[c] += rv[c];
    }
    return make(std::move(out), {a.ptr(), row.ptr()}, "add_row", [](Node& self) {
        if (wants(self, 0)) self.inputs[0]->accumulate(self.adjoint);
        if (wants(self, 1)) {
            auto dst = self.inputs[1]->grad_buffer().row(0);
            for (std::size_t r = 0; r < self.adjoint.rows(); ++r) {
                auto g = self.adjoint.row(r);
                for (std::size_t c = 0; c < g.size(); ++c) dst[c] += g[c];
            }
        }
    });
}

Var mul_col(const Var& a, const Var& col) {
    if (col.cols() != 1 || col.rows() != a.rows())
        throw DimensionError("mul_col: " + a.value().shape_string() + " * " +
                             col.value().shape_string());
    Dense out = a.value();
    for (std::size_t r = 0; r < out.rows(); ++r) {
        const double s = col.value()(r, 0);
        for (double& v : out.row(r)) v *= s;
    }
    return make(std::move(out), {a.ptr(), col.ptr()}, "mul_col", [](Node& self) {
        const Dense& av = self.inputs[0]->value;
        const Dense& cv = self.inputs[1]->value;
        const Dense& g = self.adjoint;
        if (wants(self, 0)) {
            Dense& dst = self.inputs[0]->grad_buffer();
            for (std::size_t r = 0; r < g.rows(); ++r) {
                const double s = cv(r, 0);
                auto d = dst.row(r);
                auto gr = g.row(r);
                for (std::size_t c = 0; c < d.size(); ++c) d[c] += s * gr[c];
            }
        }
        if (wants(self, 1)) {
            Dense& dst = self.inputs[1]->grad_buffer();
            for (std::size_t r = 0; r < g.rows(); ++r) {
                double acc = 0.0;
                auto gr = g.row(r);
                auto ar = av.row(r);
                for (std::size_t c = 0; c < gr.size(); ++c) acc += gr[c] * ar[c];
                dst(r, 0) += acc;
            }
        }
    });
}

// --- reductions ---------------------------------------------------------------------------

Var sum(const Var& a) {
    double s = 0.0;
    for (double v : a.value().values()) s += v;
    return make(Dense(1, 1, s), {a.ptr()}, "sum", [](Node& self) {
        const double g = self.adjoint(0, 0);
        for (double& d : self.inputs[0]->grad_buffer().values()) d += g;
    });
}

Var mean(const Var& a) {
    if (a.value().empty()) throw ContractError("mean of empty matrix");
    return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var mean_rows(const Var& a) {
    const std::size_t n = a.rows();
    if (n == 0) throw ContractError("mean_rows of empty matrix");
    Dense out(1, a.cols());
    for (std::size_t r = 0; r < n; ++r) {
        auto ar = a.value().row(r);
        for (std::size_t c = 0; c < ar.size(); ++c) out(0, c) += ar[c];
    }
    for (double& v : out.values()) v /= static_cast<double>(n);
    return make(std::move(out), {a.ptr()}, "mean_rows", [n](Node& self) {
        Dense& dst = self.inputs[0]->grad_buffer();
        auto g = self.adjoint.row(0);
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t r = 0; r < dst.rows(); ++r) {
            auto d = dst.row(r);
            for (std::size_t c = 0; c < d.size(); ++c) d[c] += g[c] * inv;
        }
    });
}

namespace {

Var row_dot_impl(const Var& a, const Var& b, bool minkowski) {
    require_same_shape(a, b, minkowski ? "minkowski_row_dot" : "row_dot");
    if (minkowski && a.cols() == 0) throw DimensionError("minkowski_row_dot: zero columns");
    Dense out(a.rows(), 1);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto ar = a.value().row(r);
        auto br = b.value().row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < ar.size(); ++c) acc += ar[c] * br[c];
        if (minkowski) acc -= 2.0 * ar[0] * br[0];
        out(r, 0) = acc;
    }
    return make(std::move(out), {a.ptr(), b.ptr()}, minkowski ? "minkowski_row_dot" : "row_dot",
                [minkowski](Node& self) {
                    for (std::size_t k = 0; k < 2; ++k) {
                        if (!wants(self, k)) continue;
                        const Dense& other = self.inputs[1 - k]->value;
                        Dense& dst = self.inputs[k]->grad_buffer();
                        for (std::size_t r = 0; r < dst.rows(); ++r) {
                            const double g = self.adjoint(r, 0);
                            auto d = dst.row(r);
                            auto o = other.row(r);
                            for (std::size_t c = 0; c < d.size(); ++c) d[c] += g * o[c];
                            if (minkowski) d[0] -= 2.0 * g * o[0];
                        }
                    }
                });
}

}  // namespace

Var row_dot(const Var& a, const Var& b) { return row_dot_impl(a, b, false); }
Var minkowski_row_dot(const Var& a, const Var& b) { return row_dot_impl(a, b, true); }

Var row_norm(const Var& a) {
    Dense out(a.rows(), 1);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double acc = 0.0;
        for (double v : a.value().row(r)) acc += v * v;
        out(r, 0) = std::sqrt(acc);
    }
    return make(std::move(out), {a.ptr()}, "row_norm", [](Node& self) {
        const Dense& av = self.inputs[0]->value;
        Dense& dst = self.inputs[0]->grad_buffer();
        for (std::size_t r = 0; r < av.rows(); ++r) {
            const double norm = self.value(r, 0);
            if (norm == 0.0) continue;
            const double s = self.adjoint(r, 0) / norm;
            auto d = dst.row(r);
            auto x = av.row(r);
            for (std::size_t c = 0; c < d.size(); ++c) d[c] += s * x[c];
        }
    });
}

// --- structure ----------------------------------------------------------------------------

Var slice_cols(const Var& a, std::size_t begin, std::size_t count) {
    if (begin + count > a.cols())
        throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " +
                             std::to_string(begin + count) + ") of " + a.value().shape_string());
    Dense out(a.rows(), count);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto src = a.value().row(r).subspan(begin, count);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return make(std::move(out), {a.ptr()}, "slice_cols", [begin, count](Node& self) {
        Dense& dst = self.inputs[0]->grad_buffer();
        for (std::size_t r = 0; r < dst.rows(); ++r) {
            auto d = dst.row(r).subspan(begin, count);
            auto g = self.adjoint.row(r);
            for (std::size_t c = 0; c < count; ++c) d[c] += g[c];
        }
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ContractError("concat_cols: no inputs");
    const std::size_t n = parts.front().rows();
    std::size_t total = 0;
    for (const Var& p : parts) {
        if (p.rows() != n)
            throw DimensionError("concat_cols: row mismatch " + p.value().shape_string());
        total += p.cols();
    }
    Dense out(n, total);
    std::vector<std::shared_ptr<Node>> inputs;
    std::size_t offset = 0;
    for (const Var& p : parts) {
        for (std::size_t r = 0; r < n; ++r) {
            auto src = p.value().row(r);
            std::copy(src.begin(), src.end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
        }
        offset += p.cols();
        inputs.push_back(p.ptr());
    }
    return make(std::move(out), std::move(inputs), "concat_cols", [](Node& self) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < self.inputs.size(); ++k) {
            const std::size_t w = self.inputs[k]->value.cols();
            if (wants(self, k)) {
                Dense& dst = self.inputs[k]->grad_buffer();
                for (std::size_t r = 0; r < dst.rows(); ++r) {
                    auto g = self.adjoint.row(r).subspan(offset, w);
                    auto d = dst.row(r);
                    for (std::size_t c = 0; c < w; ++c) d[c] += g[c];
                }
            }
            offset += w;
        }
    });
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw ContractError("concat_rows: no inputs");
    const std::size_t d = parts.front().cols();
    std::vector<double> data;
    std::vector<std::shared_ptr<Node>> inputs;
    std::size_t total = 0;
    for (const Var& p : parts) {
        if (p.cols() != d)
            throw DimensionError("concat_rows: column mismatch " + p.value().shape_string());
        data.insert(data.end(), p.value().values().begin(), p.value().values().end());
        total += p.rows();
        inputs.push_back(p.ptr());
    }
    return make(Dense(total, d, std::move(data)), std::move(inputs), "concat_rows", [](Node& self) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < self.inputs.size(); ++k) {
            const std::size_t len = self.inputs[k]->value.size();
            if (wants(self, k)) {
                auto dst = self.inputs[k]->grad_buffer().values();
                auto g = self.adjoint.values().subspan(offset, len);
                for (std::size_t i = 0; i < len; ++i) dst[i] += g[i];
            }
            offset += len;
        }
    });
}

Var gather_rows(const Var& a, std::span<const std::size_t> rows) {
    Dense out(rows.size(), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= a.rows())
            throw DimensionError("gather_rows: row " + std::to_string(rows[i]) + " of " +
                                 a.value().shape_string());
        auto src = a.value().row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    return make(std::move(out), {a.ptr()}, "gather_rows", [idx = std::move(idx)](Node& self) {
        Dense& dst = self.inputs[0]->grad_buffer();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto d = dst.row(idx[i]);
            auto g = self.adjoint.row(i);
            for (std::size_t c = 0; c < d.size(); ++c) d[c] += g[c];
        }
    });
}

// --- softmax family -----------------------------------------------------------------------

namespace {

void softmax_inplace(std::span<double> v) {
    if (v.empty()) return;
    const double mx = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        total += x;
    }
    for (double& x : v) x /= total;
}

void softmax_backward(std::span<const double> y, std::span<const double> g, std::span<double> dst) {
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * g[i];
    for (std::size_t i = 0; i < y.size(); ++i) dst[i] += y[i] * (g[i] - dot);
}

}  // namespace

Var softmax_rows(const Var& a) {
    if (a.value().empty()) throw ContractError("softmax_rows: empty input");
    Dense out = a.value();
    for (std::size_t r = 0; r < out.rows(); ++r) softmax_inplace(out.row(r));
    return make(std::move(out), {a.ptr()}, "softmax_rows", [](Node& self) {
        Dense& dst = self.inputs[0]->grad_buffer();
        for (std::size_t r = 0; r < dst.rows(); ++r)
            softmax_backward(self.value.row(r), self.adjoint.row(r), dst.row(r));
    });
}

Var segment_softmax(const Var& logits, const CsrPattern& pattern) {
    if (logits.cols() != 1 || logits.rows() != pattern.nnz())
        throw DimensionError("segment_softmax: logits " + logits.value().shape_string() +
                             " for pattern with " + std::to_string(pattern.nnz()) + " entries");
    Dense out = logits.value();
    auto v = out.values();
    for (std::size_t r = 0; r < pattern.n_rows; ++r)
        softmax_inplace(v.subspan(pattern.offsets[r], pattern.degree(r)));
    auto offsets = pattern.offsets;
    return make(std::move(out), {logits.ptr()}, "segment_softmax",
                [offsets = std::move(offsets)](Node& self) {
                    auto y = self.value.values();
                    auto g = self.adjoint.values();
                    auto dst = self.inputs[0]->grad_buffer().values();
                    for (std::size_t r = 0; r + 1 < offsets.size(); ++r) {
                        const std::size_t b = offsets[r], len = offsets[r + 1] - b;
                        softmax_backward(y.subspan(b, len), g.subspan(b, len), dst.subspan(b, len));
                    }
                });
}

Var spmm(const Var& weights, const CsrPattern& pattern, const Var& dense) {
    if (weights.cols() != 1 || weights.rows() != pattern.nnz())
        throw DimensionError("spmm: weights " + weights.value().shape_string() + " for " +
                             std::to_string(pattern.nnz()) + " entries");
    if (dense.rows() != pattern.n_cols)
        throw DimensionError("spmm: pattern has " + std::to_string(pattern.n_cols) +
                             " columns, dense operand is " + dense.value().shape_string());
    const std::size_t d = dense.cols();
    Dense out(pattern.n_rows, d);
    const auto w = weights.value().values();
    for (std::size_t r = 0; r < pattern.n_rows; ++r) {
        auto o = out.row(r);
        for (std::size_t e = pattern.offsets[r]; e < pattern.offsets[r + 1]; ++e) {
            auto src = dense.value().row(pattern.cols[e]);
            for (std::size_t c = 0; c < d; ++c) o[c] += w[e] * src[c];
        }
    }
    return make(std::move(out), {weights.ptr(), dense.ptr()}, "spmm", [pattern](Node& self) {
        const Dense& g = self.adjoint;
        const Dense& wv = self.inputs[0]->value;
        const Dense& mv = self.inputs[1]->value;
        const bool gw = wants(self, 0), gm = wants(self, 1);
        Dense* dw = gw ? &self.inputs[0]->grad_buffer() : nullptr;
        Dense* dm = gm ? &self.inputs[1]->grad_buffer() : nullptr;
        for (std::size_t r = 0; r < pattern.n_rows; ++r) {
            auto gr = g.row(r);
            for (std::size_t e = pattern.offsets[r]; e < pattern.offsets[r + 1]; ++e) {
                const std::size_t j = pattern.cols[e];
                if (gw) {
                    double acc = 0.0;
                    auto m = mv.row(j);
                    for (std::size_t c = 0; c < gr.size(); ++c) acc += gr[c] * m[c];
                    (*dw)(e, 0) += acc;
                }
                if (gm) {
                    auto d = dm->row(j);
                    const double we = wv(e, 0);
                    for (std::size_t c = 0; c < gr.size(); ++c) d[c] += we * gr[c];
                }
            }
        }
    });
}

// --- losses -------------------------------------------------------------------------------

Var cross_entropy(const Var& logits, std::span<const int> labels, std::span<const std::size_t> rows) {
    if (labels.size() != logits.rows())
        throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                             logits.value().shape_string());
    if (rows.empty()) throw ContractError("cross_entropy: no rows selected");
    const std::size_t classes = logits.cols();
    Dense probs(rows.size(), classes);
    double total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        const int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= classes)
            throw ContractError("cross_entropy: label " + std::to_string(y) + " outside [0, " +
                                std::to_string(classes) + ")");
        auto src = logits.value().row(r);
        auto p = probs.row(i);
        const double mx = *std::max_element(src.begin(), src.end());
        double z = 0.0;
        for (std::size_t c = 0; c < classes; ++c) z += std::exp(src[c] - mx);
        const double log_z = mx + std::log(z);
        for (std::size_t c = 0; c < classes; ++c) p[c] = std::exp(src[c] - log_z);
        total += log_z - src[static_cast<std::size_t>(y)];
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    std::vector<int> lab(labels.begin(), labels.end());
    return make(Dense(1, 1, total * inv), {logits.ptr()}, "cross_entropy",
                [probs = std::move(probs), idx = std::move(idx), lab = std::move(lab),
                 inv](Node& self) {
                    const double g = self.adjoint(0, 0) * inv;
                    Dense& dst = self.inputs[0]->grad_buffer();
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                        auto d = dst.row(idx[i]);
                        auto p = probs.row(i);
                        for (std::size_t c = 0; c < d.size(); ++c) d[c] += g * p[c];
                        d[static_cast<std::size_t>(lab[idx[i]])] -= g;
                    }
                });
}

Var bce_with_logits(const Var& scores, const Dense& targets) {
    if (scores.cols() != 1 || !scores.value().same_shape(targets))
        throw DimensionError("bce_with_logits: scores " + scores.value().shape_string() +
                             " vs targets " + targets.shape_string());
    if (targets.empty()) throw ContractError("bce_with_logits: no samples");
    double total = 0.0;
    for (std::size_t i = 0; i < targets.rows(); ++i) {
        const double s = scores.value()(i, 0), t = targets(i, 0);
        total += softplus(s) - t * s;
    }
    const double inv = 1.0 / static_cast<double>(targets.rows());
    return make(Dense(1, 1, total * inv), {scores.ptr()}, "bce_with_logits",
                [targets, inv](Node& self) {
                    const double g = self.adjoint(0, 0) * inv;
                    Dense& dst = self.inputs[0]->grad_buffer();
                    const Dense& s = self.inputs[0]->value;
                    for (std::size_t i = 0; i < targets.rows(); ++i)
                        dst(i, 0) += g * (logistic(s(i, 0)) - targets(i, 0));
                });
}

}  // namespace hygraph::ad
