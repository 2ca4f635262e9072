#pragma once

// Central finite-difference gradient checks against the reverse-mode adjoints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hygraph/autodiff.hpp"
#include "hygraph/optim.hpp"

namespace hygraph::testing {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
    std::string worst;  // "name[index]" of the worst coordinate
};

inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// `loss` rebuilds the forward pass from the current parameter values. Up to `per_param`
// coordinates per parameter are checked (all of them when the tensor is smaller), drawn
// without replacement with `seed`.
inline GradCheckResult grad_check(const std::function<ad::Var()>& loss,
                                  const std::vector<Parameter*>& params, std::size_t per_param,
                                  unsigned seed = 7, double h = 1e-5) {
    zero_grad(params);
    ad::backward(loss());
    std::vector<Dense> analytic;
    for (Parameter* p : params) analytic.push_back(p->grad());

    std::mt19937_64 rng(seed);
    GradCheckResult out;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter* p = params[pi];
        std::vector<std::size_t> idx(p->value().size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(std::min(per_param, idx.size()));
        for (std::size_t i : idx) {
            double& w = p->mutable_value()[i];
            const double saved = w;
            w = saved + h;
            const double up = loss().item();
            w = saved - h;
            const double down = loss().item();
            w = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double err = relative_error(analytic[pi][i], numeric);
            ++out.coordinates;
            if (err > out.max_rel_error) {
                out.max_rel_error = err;
                out.worst = p->name + "[" + std::to_string(i) + "] analytic=" +
                            std::to_string(analytic[pi][i]) + " numeric=" + std::to_string(numeric);
            }
        }
    }
    return out;
}

// Convenience for a single free input.
inline GradCheckResult grad_check_input(const std::function<ad::Var(const ad::Var&)>& f, Dense x,
                                        std::size_t coords = 1000, unsigned seed = 7) {
    Parameter p("x", std::move(x));
    std::vector<Parameter*> ps{&p};
    return grad_check([&] { return f(p.var); }, ps, coords, seed);
}

}  // namespace hygraph::testing
