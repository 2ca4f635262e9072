#include "hygraph/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hygraph/detail/ratio_functions.hpp"
#include "hygraph/errors.hpp"

namespace hygraph::geometry {

using namespace hygraph::detail;
using manifold::Curvature;

namespace {

// Largest sqrt(|c|) |v| accepted by the batched Lorentz exp0: the origin distance of the
// clamped Poincare ball radius, so both models saturate at the same geodesic radius.
const double kLorentzMaxArg = 2.0 * std::atanh(1.0 - manifold::kBallMargin);

ad::Var broadcast_row(const ad::Var& row, std::size_t n) {
    if (row.rows() != 1) throw DimensionError("bias must be a single row, got " + row.value().shape_string());
    const std::vector<std::size_t> idx(n, 0);
    return ad::gather_rows(row, idx);
}

ad::Var reciprocal(const ad::Var& a) {
    return ad::unary(
        a, [](double x) { return 1.0 / x; }, [](double x) { return -1.0 / (x * x); }, "reciprocal");
}

// Scales rows whose norm exceeds the clamped ball radius back onto it.
ad::Var project_rows(const ad::Var& x, Curvature c) {
    const double limit = (1.0 - manifold::kBallMargin) / c.sqrt_abs();
    const auto r = ad::row_norm(x);
    const auto f = ad::unary(
        r, [limit](double v) { return v > limit ? limit / v : 1.0; },
        [limit](double v) { return v > limit ? -limit / (v * v) : 0.0; }, "project");
    return ad::mul_col(x, f);
}

ad::Var poincare_exp0(const ad::Var& v, Curvature c) {
    const double s = c.sqrt_abs();
    const double cap = 1.0 - manifold::kBallMargin;
    const auto r = ad::row_norm(v);
    const auto f = ad::unary(
        r,
        [s, cap](double x) {
            const double z = s * x;
            return std::tanh(z) > cap ? cap / z : tanh_ratio(z);
        },
        [s, cap](double x) {
            const double z = s * x;
            return std::tanh(z) > cap ? -cap / (s * x * x) : s * tanh_ratio_d(z);
        },
        "tanh_ratio");
    return ad::mul_col(v, f);
}

ad::Var poincare_log0(const ad::Var& y, Curvature c) {
    const double s = c.sqrt_abs();
    const auto r = ad::row_norm(y);
    const auto f = ad::unary(
        r, [s](double x) { return artanh_ratio(s * x); },
        [s](double x) { return s * artanh_ratio_d(s * x); }, "artanh_ratio");
    return ad::mul_col(y, f);
}

ad::Var lorentz_exp0(const ad::Var& v, Curvature c) {
    const double s = c.sqrt_abs();
    const double m = kLorentzMaxArg;
    const auto r = ad::row_norm(v);
    // Past the cap the point stays on the ray of v at the capped distance.
    const auto time = ad::unary(
        r, [s, m](double x) { return std::cosh(std::min(s * x, m)) / s; },
        [s, m](double x) { return s * x < m ? std::sinh(s * x) : 0.0; }, "cosh");
    const auto ratio = ad::unary(
        r,
        [s, m](double x) { return s * x < m ? sinh_ratio(s * x) : std::sinh(m) / (s * x); },
        [s, m](double x) {
            return s * x < m ? s * sinh_ratio_d(s * x) : -std::sinh(m) / (s * x * x);
        },
        "sinh_ratio");
    const ad::Var parts[] = {time, ad::mul_col(v, ratio)};
    return ad::concat_cols(parts);
}

ad::Var lorentz_log0(const ad::Var& y, Curvature c) {
    if (y.cols() < 2) throw DimensionError("Lorentz batch needs at least two columns");
    const double s = c.sqrt_abs();
    const auto ys = ad::slice_cols(y, 1, y.cols() - 1);
    const auto r = ad::row_norm(ys);
    const auto f = ad::unary(
        r, [s](double x) { return asinh_ratio(s * x); },
        [s](double x) { return s * asinh_ratio_d(s * x); }, "asinh_ratio");
    return ad::mul_col(ys, f);
}

}  // namespace

Space parse_space(std::string_view name) {
    if (name == "poincare") return Space::poincare;
    if (name == "lorentz") return Space::lorentz;
    if (name == "euclidean") return Space::euclidean;
    throw ContractError("unknown space '" + std::string(name) +
                        "' (expected poincare, lorentz or euclidean)");
}

std::string to_string(Space s) {
    switch (s) {
        case Space::poincare: return "poincare";
        case Space::lorentz: return "lorentz";
        case Space::euclidean: return "euclidean";
    }
    return "?";
}

ad::Var mobius_add_rows(const ad::Var& x, const ad::Var& y, Curvature c) {
    if (!x.value().same_shape(y.value()))
        throw DimensionError("mobius_add_rows: " + x.value().shape_string() + " vs " +
                             y.value().shape_string());
    const double k = c.abs();
    const auto xy = ad::row_dot(x, y);
    const auto x2 = ad::row_dot(x, x);
    const auto y2 = ad::row_dot(y, y);
    const auto a = ad::add_scalar(ad::add(ad::scale(xy, 2.0 * k), ad::scale(y2, k)), 1.0);
    const auto b = ad::add_scalar(ad::scale(x2, -k), 1.0);
    const auto den =
        ad::add_scalar(ad::add(ad::scale(xy, 2.0 * k), ad::scale(ad::mul(x2, y2), k * k)), 1.0);
    const auto num = ad::add(ad::mul_col(x, a), ad::mul_col(y, b));
    return project_rows(ad::mul_col(num, reciprocal(den)), c);
}

ad::Var poincare_exp_rows(const ad::Var& x, const ad::Var& u, Curvature c) {
    const double k = c.abs(), s = c.sqrt_abs();
    const auto x2 = ad::row_dot(x, x);
    const auto lambda = ad::unary(
        x2, [k](double q) { return 2.0 / (1.0 - k * q); },
        [k](double q) { return 2.0 * k / ((1.0 - k * q) * (1.0 - k * q)); }, "conformal");
    const auto z = ad::scale(ad::mul(lambda, ad::row_norm(u)), s / 2.0);
    const auto g = ad::unary(z, tanh_ratio, tanh_ratio_d, "tanh_ratio");
    const auto step = project_rows(ad::mul_col(u, ad::scale(ad::mul(g, lambda), 0.5)), c);
    return mobius_add_rows(x, step, c);
}

ad::Var lorentz_renormalize(const ad::Var& x, Curvature c) {
    const double inv_k = 1.0 / c.abs();
    const auto xs = ad::slice_cols(x, 1, x.cols() - 1);
    const auto t = ad::unary(
        ad::row_dot(xs, xs), [inv_k](double q) { return std::sqrt(inv_k + q); },
        [inv_k](double q) { return 0.5 / std::sqrt(inv_k + q); }, "time");
    const ad::Var parts[] = {t, xs};
    return ad::concat_cols(parts);
}

ad::Var lorentz_transport_rows(const ad::Var& x, const ad::Var& bias, Curvature c) {
    const std::size_t n = x.rows(), d = x.cols() - 1;
    if (bias.cols() != d)
        throw DimensionError("lorentz_transport_rows: bias " + bias.value().shape_string() +
                             " for points " + x.value().shape_string());
    const double k = c.abs(), s = c.sqrt_abs();
    const auto b = broadcast_row(bias, n);
    const auto x0 = ad::slice_cols(x, 0, 1);
    const auto xs = ad::slice_cols(x, 1, d);
    // <x, (0, b)>_L only involves spatial coordinates.
    const auto inner = ad::row_dot(xs, b);
    const auto inv = ad::unary(
        x0, [s](double t) { return 1.0 / (1.0 + s * t); },
        [s](double t) { return -s / ((1.0 + s * t) * (1.0 + s * t)); }, "transport_den");
    const auto coef = ad::scale(ad::mul(inner, inv), k);
    const ad::Var sum_parts[] = {ad::add_scalar(x0, 1.0 / s), xs};
    const ad::Var v_parts[] = {ad::constant(Dense(n, 1)), b};
    return ad::add(ad::concat_cols(v_parts), ad::mul_col(ad::concat_cols(sum_parts), coef));
}

ad::Var lorentz_exp_rows(const ad::Var& x, const ad::Var& u, Curvature c) {
    const auto q = ad::scale(ad::minkowski_row_dot(u, u), c.abs());
    const auto ch = ad::unary(q, cosh_sqrt, cosh_sqrt_d, "cosh_sqrt");
    const auto sh = ad::unary(q, sinhc_sqrt, sinhc_sqrt_d, "sinhc_sqrt");
    return lorentz_renormalize(ad::add(ad::mul_col(x, ch), ad::mul_col(u, sh)), c);
}

ad::Var Geometry::exp0(const ad::Var& tangent) const {
    switch (space_) {
        case Space::poincare: return poincare_exp0(tangent, c_);
        case Space::lorentz: return lorentz_exp0(tangent, c_);
        case Space::euclidean: return tangent;
    }
    return tangent;
}

ad::Var Geometry::log0(const ad::Var& points) const {
    switch (space_) {
        case Space::poincare: return poincare_log0(points, c_);
        case Space::lorentz: return lorentz_log0(points, c_);
        case Space::euclidean: return points;
    }
    return points;
}

ad::Var Geometry::bias_add(const ad::Var& points, const ad::Var& bias) const {
    switch (space_) {
        case Space::euclidean: return ad::add_row(points, bias);
        case Space::lorentz:
            return lorentz_exp_rows(points, lorentz_transport_rows(points, bias, c_), c_);
        case Space::poincare: {
            if (bias.cols() != points.cols())
                throw DimensionError("bias_add: bias " + bias.value().shape_string() +
                                     " for points " + points.value().shape_string());
            // P_{o->x}(b) = (lambda_o / lambda_x) b = (1 - k|x|^2) b
            const double k = c_.abs();
            const auto scale = ad::add_scalar(ad::scale(ad::row_dot(points, points), -k), 1.0);
            const auto u = ad::mul_col(broadcast_row(bias, points.rows()), scale);
            return poincare_exp_rows(points, u, c_);
        }
    }
    return points;
}

double Geometry::max_violation(const Dense& points) const {
    double worst = 0.0;
    if (space_ == Space::euclidean) return worst;
    const double limit = (1.0 - manifold::kBallMargin) / c_.sqrt_abs();
    for (std::size_t r = 0; r < points.rows(); ++r) {
        const auto row = points.row(r);
        if (space_ == Space::poincare) {
            double sq = 0.0;
            for (double v : row) sq += v * v;
            worst = std::max(worst, std::sqrt(sq) - limit);
        } else {
            worst = std::max(worst, std::abs(manifold::minkowski_dot(row, row) - 1.0 / c_.value()));
        }
    }
    return worst;
}

manifold::ManifoldPoint Geometry::point(const Dense& points, std::size_t row) const {
    const auto r = points.row(row);
    std::vector<double> coords(r.begin(), r.end());
    if (space_ == Space::poincare) return manifold::PoincarePoint{std::move(coords), c_};
    if (space_ == Space::lorentz) return manifold::LorentzPoint{std::move(coords), c_};
    throw ContractError("euclidean rows are not manifold points");
}

}  // namespace hygraph::geometry
