#include "hygraph/optim.hpp"

#include <cmath>

#include "hygraph/errors.hpp"

namespace hygraph {

void zero_grad(std::span<Parameter* const> params) {
    for (Parameter* p : params) p->grad().fill(0.0);
}

void Adam::step(std::span<Parameter* const> params) {
    for (Parameter* p : params) {
        if (!p->grad().all_finite()) throw NonFiniteError("Adam: non-finite gradient in " + p->name);
        auto it = state_.find(p->name);
        if (it != state_.end() && !it->second.m.same_shape(p->value()))
            throw DimensionError("Adam: parameter " + p->name + " changed shape from " +
                                 it->second.m.shape_string() + " to " + p->value().shape_string());
    }

    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (Parameter* p : params) {
        auto& st = state_[p->name];
        if (st.m.empty()) {
            st.m = Dense(p->value().rows(), p->value().cols());
            st.v = st.m;
        }
        auto w = p->mutable_value().values();
        auto g = p->grad().values();
        auto m = st.m.values();
        auto v = st.v.values();
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

}  // namespace hygraph
