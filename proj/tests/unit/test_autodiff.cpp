#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "grad_check.hpp"
#include "hygraph/autodiff.hpp"
#include "hygraph/errors.hpp"
#include "hygraph/optim.hpp"

using namespace hygraph;
using hygraph::testing::grad_check_input;

namespace {

Dense random_dense(std::size_t r, std::size_t c, unsigned seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Dense m(r, c);
    for (double& v : m.values()) v = u(rng);
    return m;
}

// Keeps inputs away from the ReLU kink so central differences stay valid.
Dense away_from_zero(Dense m) {
    for (double& v : m.values())
        if (std::abs(v) < 0.05) v = v < 0 ? -0.05 : 0.05;
    return m;
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("matmul values") {
    const auto m = Dense::from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    CHECK(ad::matmul(ad::constant(Dense::identity(3)), ad::constant(m)).value() == m);
    const auto r = ad::matmul(ad::constant(Dense::from_rows({{1, 2}, {3, 4}})),
                              ad::constant(Dense::from_rows({{1}, {1}})));
    CHECK(r.value() == Dense::from_rows({{3}, {7}}));
}

TEST_CASE("matmul shape mismatch names both shapes") {
    try {
        ad::matmul(ad::constant(Dense(2, 3)), ad::constant(Dense(2, 3)));
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        const std::string what = e.what();
        CHECK(what.find("(2x3)") != std::string::npos);
    }
}

TEST_CASE("matmul gradient matches finite differences") {
    const Dense b = random_dense(4, 3, 2);
    const auto res = grad_check_input(
        [&](const ad::Var& a) { return ad::sum(ad::matmul(a, ad::constant(b))); },
        random_dense(5, 4, 1));
    CHECK(res.max_rel_error < 1e-4);
    const Dense a = random_dense(5, 4, 3);
    const auto res2 = grad_check_input(
        [&](const ad::Var& bv) { return ad::sum(ad::tanh(ad::matmul(ad::constant(a), bv))); },
        random_dense(4, 3, 4));
    CHECK(res2.max_rel_error < 1e-4);
}

TEST_CASE("elementwise values") {
    const auto r = ad::relu(ad::constant(Dense::from_rows({{-1, 2}})));
    CHECK(r.value() == Dense::from_rows({{0, 2}}));
    CHECK(ad::sigmoid(ad::constant(Dense(1, 1, 0.0))).item() == 0.5);
    CHECK_THROWS_AS(ad::add(ad::constant(Dense(1, 2)), ad::constant(Dense(2, 1))), DimensionError);
    CHECK_THROWS_AS(ad::elementwise(ad::Elementwise::mul, ad::constant(Dense(1, 2)), nullptr),
                    ContractError);
}

TEST_CASE("tanh derivative at 0.3") {
    auto x = ad::variable(Dense(1, 1, 0.3));
    ad::backward(ad::sum(ad::tanh(x)));
    const double t = std::tanh(0.3);
    CHECK(x.adjoint()(0, 0) == doctest::Approx(1.0 - t * t).epsilon(1e-15));
    const auto res = grad_check_input([](const ad::Var& v) { return ad::sum(ad::tanh(v)); },
                                      Dense(1, 1, 0.3));
    CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("every differentiable op passes a finite-difference check") {
    const Dense other = random_dense(4, 3, 11);
    const Dense col = away_from_zero(random_dense(4, 1, 12));
    const Dense row = random_dense(1, 3, 13);
    const Dense mask = random_dense(4, 3, 14, 0.0, 2.0);
    using F = std::function<ad::Var(const ad::Var&)>;
    const std::vector<std::pair<const char*, F>> cases = {
        {"add", [&](const ad::Var& x) { return ad::sum(ad::mul(ad::add(x, ad::constant(other)), x)); }},
        {"sub", [&](const ad::Var& x) { return ad::sum(ad::mul(ad::sub(ad::constant(other), x), x)); }},
        {"div", [&](const ad::Var& x) { return ad::sum(ad::div(ad::constant(other), ad::add_scalar(x, 3.0))); }},
        {"scale", [&](const ad::Var& x) { return ad::sum(ad::mul(ad::scale(x, -2.5), x)); }},
        {"sigmoid", [&](const ad::Var& x) { return ad::sum(ad::mul(ad::sigmoid(x), ad::constant(other))); }},
        {"relu", [&](const ad::Var& x) { return ad::sum(ad::mul(ad::relu(x), ad::constant(other))); }},
        {"mul_const", [&](const ad::Var& x) { return ad::sum(ad::tanh(ad::mul_const(x, mask))); }},
        {"unary", [&](const ad::Var& x) {
             return ad::sum(ad::unary(x, [](double v) { return std::exp(v); },
                                      [](double v) { return std::exp(v); }));
         }},
        {"add_row", [&](const ad::Var& x) {
             return ad::sum(ad::tanh(ad::add_row(x, ad::gather_rows(x, std::vector<std::size_t>{1}))));
         }},
        {"mul_col", [&](const ad::Var& x) {
             return ad::sum(ad::tanh(ad::mul_col(x, ad::slice_cols(x, 1, 1))));
         }},
        {"mean", [&](const ad::Var& x) { return ad::mean(ad::mul(x, x)); }},
        {"mean_rows", [&](const ad::Var& x) { return ad::sum(ad::tanh(ad::mean_rows(ad::mul(x, x)))); }},
        {"row_dot", [&](const ad::Var& x) { return ad::sum(ad::tanh(ad::row_dot(x, ad::constant(other)))); }},
        {"minkowski_row_dot", [&](const ad::Var& x) { return ad::sum(ad::tanh(ad::minkowski_row_dot(x, x))); }},
        {"row_norm", [&](const ad::Var& x) { return ad::sum(ad::row_norm(x)); }},
        {"transpose", [&](const ad::Var& x) { return ad::sum(ad::matmul(ad::transpose(x), ad::tanh(x))); }},
        {"concat", [&](const ad::Var& x) {
             const ad::Var parts[] = {ad::slice_cols(x, 2, 1), ad::tanh(x)};
             const ad::Var rows[] = {ad::concat_cols(parts), ad::concat_cols(parts)};
             return ad::sum(ad::mul(ad::concat_rows(rows), ad::concat_rows(rows)));
         }},
        {"softmax_rows", [&](const ad::Var& x) { return ad::sum(ad::mul(ad::softmax_rows(x), ad::constant(other))); }},
        {"cross_entropy", [&](const ad::Var& x) {
             const std::vector<int> labels{0, 2, 1, 2};
             const std::vector<std::size_t> rows{0, 1, 3};
             return ad::cross_entropy(x, labels, rows);
         }},
        {"bce_with_logits", [&](const ad::Var& x) {
             return ad::bce_with_logits(ad::slice_cols(x, 0, 1),
                                        Dense::from_rows({{1}, {0}, {1}, {0}}));
         }},
        {"with_col", [&](const ad::Var& x) { return ad::sum(ad::mul_col(x, ad::constant(col))); }},
        {"with_row", [&](const ad::Var& x) { return ad::sum(ad::tanh(ad::add_row(x, ad::constant(row)))); }},
    };
    for (const auto& [name, f] : cases) {
        CAPTURE(name);
        const auto res = grad_check_input(f, away_from_zero(random_dense(4, 3, 21)));
        CHECK(res.max_rel_error < 1e-4);
    }
}

TEST_CASE("segment softmax and spmm gradients") {
    const auto pattern = CsrPattern::from_pairs(3, 3, {{0, 1}, {0, 2}, {1, 0}, {2, 0}, {2, 1}});
    const Dense feats = random_dense(3, 2, 5);
    const auto res = grad_check_input(
        [&](const ad::Var& w) {
            const auto alpha = ad::segment_softmax(w, pattern);
            return ad::sum(ad::tanh(ad::spmm(alpha, pattern, ad::constant(feats))));
        },
        random_dense(5, 1, 6));
    CHECK(res.max_rel_error < 1e-4);
    const Dense w = random_dense(5, 1, 7);
    const auto res2 = grad_check_input(
        [&](const ad::Var& x) { return ad::sum(ad::tanh(ad::spmm(ad::constant(w), pattern, x))); },
        random_dense(3, 2, 8));
    CHECK(res2.max_rel_error < 1e-4);

    const auto alpha = ad::segment_softmax(ad::constant(random_dense(5, 1, 9, -50, 50)), pattern);
    for (std::size_t r = 0; r < 3; ++r) {
        double s = 0.0;
        for (std::size_t e = pattern.offsets[r]; e < pattern.offsets[r + 1]; ++e) s += alpha.value()(e, 0);
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("softmax examples") {
    const auto u = ad::softmax_rows(ad::constant(Dense::from_rows({{0, 0, 0}})));
    for (double v : u.value().values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const auto big = ad::softmax_rows(ad::constant(Dense::from_rows({{1000, 0}})));
    CHECK(big.value().all_finite());
    CHECK(big.value()(0, 0) == doctest::Approx(1.0));
    CHECK(big.value()(0, 1) < 1e-300);

    // long double reference without max-subtraction
    const auto s = ad::softmax_rows(ad::constant(Dense::from_rows({{1, 2, 3}})));
    long double z = 0;
    for (int i = 1; i <= 3; ++i) z += std::exp(static_cast<long double>(i));
    for (int i = 1; i <= 3; ++i) {
        const long double ref = std::exp(static_cast<long double>(i)) / z;
        CHECK(std::abs(static_cast<long double>(s.value()(0, i - 1)) - ref) < 1e-15L);
    }
}

TEST_CASE("softmax rows sum to one for large inputs") {
    const auto s = ad::softmax_rows(ad::constant(random_dense(200, 7, 31, -1e4, 1e4)));
    for (std::size_t r = 0; r < s.rows(); ++r) {
        double t = 0.0;
        for (double v : s.value().row(r)) {
            CHECK(v >= 0.0);
            t += v;
        }
        CHECK(std::abs(t - 1.0) < 1e-9);
    }
}

TEST_CASE("backward contracts") {
    auto x = ad::variable(random_dense(2, 3, 1));
    auto loss = ad::sum(x);
    ad::backward(loss);
    CHECK(x.adjoint() == Dense(2, 3, 1.0));
    CHECK_THROWS_AS(ad::backward(loss), ContractError);
    ad::reset(loss);
    ad::backward(loss);
    CHECK(x.adjoint() == Dense(2, 3, 1.0));

    CHECK_THROWS_AS(ad::backward(ad::tanh(x)), ContractError);

    auto y = ad::variable(random_dense(3, 2, 2));
    ad::backward(ad::scale(ad::sum(ad::mul(y, y)), 0.5));
    CHECK(y.adjoint() == y.value());

    auto unused = ad::variable(random_dense(2, 2, 3));
    auto used = ad::variable(random_dense(2, 2, 4));
    ad::backward(ad::sum(used));
    CHECK(unused.adjoint() == Dense(2, 2, 0.0));
}

TEST_CASE("identical passes give bit-identical adjoints") {
    auto run = [] {
        Parameter w("w", random_dense(6, 4, 42));
        const Dense x = random_dense(10, 6, 43);
        auto loss = ad::mean(ad::tanh(ad::matmul(ad::constant(x), w.var)));
        ad::backward(loss);
        return w.grad();
    };
    CHECK(run() == run());
}

TEST_CASE("adam") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        Parameter p("p", random_dense(3, 3, 1));
        const Dense before = p.value();
        Adam opt;
        std::vector<Parameter*> ps{&p};
        for (int i = 0; i < 5; ++i) opt.step(ps);
        CHECK(p.value() == before);
    }
    SUBCASE("first step from zero moments") {
        Parameter p("p", Dense(1, 1, 0.0));
        p.grad()(0, 0) = 1.0;
        Adam opt;
        std::vector<Parameter*> ps{&p};
        opt.step(ps);
        const double expected = -0.1 * (1.0 / (1.0 - 0.9) * 0.1) /
                                (std::sqrt(0.001 / (1.0 - 0.999)) + 1e-8);
        CHECK(p.value()(0, 0) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(std::abs(p.value()(0, 0) + 0.1) < 1e-6);
    }
    SUBCASE("constant gradient gives lr-sized steps") {
        Parameter p("p", Dense(1, 1, 0.0));
        Adam opt(AdamConfig{.lr = 0.01});
        std::vector<Parameter*> ps{&p};
        double prev = 0.0;
        for (int i = 0; i < 100; ++i) {
            p.grad()(0, 0) = -3.0;
            opt.step(ps);
            CHECK(p.value()(0, 0) - prev == doctest::Approx(0.01).epsilon(1e-6));
            prev = p.value()(0, 0);
        }
    }
    SUBCASE("non-finite gradient aborts without touching anything") {
        Parameter a("a", Dense(1, 2, 1.0)), b("b", Dense(1, 1, 1.0));
        a.grad()(0, 0) = 1.0;
        b.grad()(0, 0) = NAN;
        Adam opt;
        std::vector<Parameter*> ps{&a, &b};
        try {
            opt.step(ps);
            FAIL("expected NonFiniteError");
        } catch (const NonFiniteError& e) {
            CHECK(std::string(e.what()).find("b") != std::string::npos);
        }
        CHECK(a.value() == Dense(1, 2, 1.0));
        CHECK(opt.steps() == 0);
    }
}

}  // TEST_SUITE
