#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>

#include "hygraph/autodiff.hpp"

namespace hygraph {

// A named trainable leaf.
struct Parameter {
    std::string name;
    ad::Var var;

    Parameter() = default;
    Parameter(std::string n, Dense init) : name(std::move(n)), var(ad::variable(std::move(init))) {}

    const Dense& value() const { return var.value(); }
    Dense& mutable_value() { return var.node().value; }
    Dense& grad() { return var.node().grad_buffer(); }
};

void zero_grad(std::span<Parameter* const> params);

struct AdamConfig {
    double lr = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    // Applies one update from the current adjoints. If any gradient holds a non-finite value
    // nothing is modified and NonFiniteError names the offending parameter.
    void step(std::span<Parameter* const> params);

    std::size_t steps() const { return t_; }
    const AdamConfig& config() const { return config_; }
    void set_lr(double lr) { config_.lr = lr; }

private:
    struct Moments {
        Dense m, v;
    };
    AdamConfig config_;
    std::map<std::string, Moments> state_;
    std::size_t t_ = 0;
};

}  // namespace hygraph
