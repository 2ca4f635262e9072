#include "hygraph/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hygraph/detail/ratio_functions.hpp"
#include "hygraph/errors.hpp"

namespace hygraph::manifold {

using detail::artanh_ratio;
using detail::inv_sinh_ratio;
using detail::sinh_ratio;

namespace {

// Largest sqrt(k)*|v| for which cosh/sinh of the Lorentz exp map stay squarable in double.
constexpr double kLorentzMaxArg = 350.0;

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw ContractError(std::string(what) + ": non-finite input");
}

void require_same_space(Curvature a, Curvature b, std::size_t da, std::size_t db, const char* op) {
    if (!(a == b)) throw ContractError(std::string(op) + ": curvature mismatch");
    if (da != db)
        throw ContractError(std::string(op) + ": dimension mismatch " + std::to_string(da) +
                            " vs " + std::to_string(db));
}

double max_ball_norm(Curvature c) { return (1.0 - kBallMargin) / c.sqrt_abs(); }

PoincarePoint poincare_from_tangent_at_origin(std::span<const double> v, Curvature c,
                                              bool* clamped = nullptr) {
    const double s = c.sqrt_abs();
    const double r = norm(v);
    const double factor = detail::tanh_ratio(s * r);
    PoincarePoint p{std::vector<double>(v.begin(), v.end()), c};
    for (double& x : p.coords) x *= factor;
    if (clamped) *clamped = norm(p.coords) > max_ball_norm(c);
    return project(std::move(p));
}

LorentzPoint renormalized(std::vector<double> coords, Curvature c) {
    double spatial = 0.0;
    for (std::size_t i = 1; i < coords.size(); ++i) spatial += coords[i] * coords[i];
    coords[0] = std::sqrt(1.0 / c.abs() + spatial);
    return LorentzPoint{std::move(coords), c};
}

const LorentzPoint& as_lorentz(const ManifoldPoint& p, const char* op) {
    if (const auto* l = std::get_if<LorentzPoint>(&p)) return *l;
    throw ContractError(std::string(op) + ": expected a Lorentz point");
}

const PoincarePoint& as_poincare(const ManifoldPoint& p, const char* op) {
    if (const auto* b = std::get_if<PoincarePoint>(&p)) return *b;
    throw ContractError(std::string(op) + ": expected a Poincare point");
}

}  // namespace

Curvature::Curvature(double c) : c_(c) {
    if (!std::isfinite(c) || !(c < 0.0))
        throw ContractError("curvature must be finite and strictly negative, got " +
                            std::to_string(c));
}

double Curvature::sqrt_abs() const { return std::sqrt(-c_); }
double Curvature::radius() const { return 1.0 / sqrt_abs(); }

Model model_of(const ManifoldPoint& p) {
    return std::holds_alternative<PoincarePoint>(p) ? Model::poincare : Model::lorentz;
}

Curvature curvature_of(const ManifoldPoint& p) {
    return std::visit([](const auto& x) { return x.curvature; }, p);
}

PoincarePoint make_poincare(std::vector<double> coords, Curvature c) {
    require_finite(coords, "make_poincare");
    if (dot(coords, coords) >= 1.0 / c.abs())
        throw ContractError("make_poincare: point lies outside the ball of radius " +
                            std::to_string(c.radius()));
    return project(PoincarePoint{std::move(coords), c});
}

LorentzPoint make_lorentz(std::vector<double> coords, Curvature c) {
    if (coords.empty()) throw ContractError("make_lorentz: empty coordinates");
    require_finite(coords, "make_lorentz");
    if (!(coords[0] > 0.0)) throw ContractError("make_lorentz: time coordinate must be positive");
    const double err = std::abs(minkowski_dot(coords, coords) - 1.0 / c.value());
    if (err > 1e-6 * std::max(1.0, coords[0] * coords[0]))
        throw ContractError("make_lorentz: point is not on the hyperboloid (error " +
                            std::to_string(err) + ")");
    return renormalized(std::move(coords), c);
}

PoincarePoint poincare_origin(std::size_t dim, Curvature c) {
    return PoincarePoint{std::vector<double>(dim, 0.0), c};
}

LorentzPoint lorentz_origin(std::size_t dim, Curvature c) {
    std::vector<double> coords(dim + 1, 0.0);
    coords[0] = c.radius();
    return LorentzPoint{std::move(coords), c};
}

ManifoldPoint origin(Model m, std::size_t dim, Curvature c) {
    if (m == Model::poincare) return poincare_origin(dim, c);
    return lorentz_origin(dim, c);
}

TangentVector origin_tangent(std::vector<double> components, Model m, Curvature c) {
    if (m == Model::poincare) {
        const std::size_t n = components.size();
        return TangentVector{std::move(components), poincare_origin(n, c)};
    }
    const std::size_t n = components.size();
    components.insert(components.begin(), 0.0);
    return TangentVector{std::move(components), lorentz_origin(n, c)};
}

double minkowski_dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw DimensionError("minkowski_dot: sizes " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    return dot(a, b) - 2.0 * a[0] * b[0];
}

double lorentz_constraint_error(const LorentzPoint& x) {
    return std::abs(minkowski_dot(x.coords, x.coords) - 1.0 / x.curvature.value());
}

// --- Poincare ---------------------------------------------------------------------------

double conformal_factor(const PoincarePoint& x) {
    const double denom = 1.0 + x.curvature.value() * dot(x.coords, x.coords);
    if (denom <= 1e-12) throw BoundaryError("conformal_factor: point on or beyond the boundary");
    return 2.0 / denom;
}

PoincarePoint project(PoincarePoint x) {
    const double r = norm(x.coords);
    const double limit = max_ball_norm(x.curvature);
    if (r > limit) {
        const double s = limit / r;
        for (double& v : x.coords) v *= s;
    }
    return x;
}

PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y) {
    require_same_space(x.curvature, y.curvature, x.dim(), y.dim(), "mobius_add");
    const double k = x.curvature.abs();
    const double xy = dot(x.coords, y.coords);
    const double x2 = dot(x.coords, x.coords);
    const double y2 = dot(y.coords, y.coords);
    const double a = 1.0 + 2.0 * k * xy + k * y2;
    const double b = 1.0 - k * x2;
    const double den = 1.0 + 2.0 * k * xy + k * k * x2 * y2;
    PoincarePoint out{std::vector<double>(x.dim()), x.curvature};
    for (std::size_t i = 0; i < x.dim(); ++i) out.coords[i] = (a * x.coords[i] + b * y.coords[i]) / den;
    return project(std::move(out));
}

PoincarePoint exp_map(const PoincarePoint& x, const TangentVector& v) {
    require_finite(v.components, "exp_map");
    require_finite(x.coords, "exp_map");
    if (v.components.size() != x.dim())
        throw ContractError("exp_map: tangent has " + std::to_string(v.components.size()) +
                            " components, point has dimension " + std::to_string(x.dim()));
    const double r = norm(v.components);
    if (r < 1e-12) return x;
    const double s = x.curvature.sqrt_abs();
    const double lambda = conformal_factor(x);
    // tanh(s * lambda * r / 2) / (s * r) = tanh_ratio(z) * lambda / 2 with z = s * lambda * r / 2
    const double z = s * lambda * r / 2.0;
    const double factor = detail::tanh_ratio(z) * lambda / 2.0;
    PoincarePoint step{v.components, x.curvature};
    for (double& c : step.coords) c *= factor;
    return mobius_add(x, project(std::move(step)));
}

TangentVector log_map(const PoincarePoint& x, const PoincarePoint& y) {
    require_same_space(x.curvature, y.curvature, x.dim(), y.dim(), "log_map");
    require_finite(y.coords, "log_map");
    if (dot(y.coords, y.coords) >= 1.0 / y.curvature.abs())
        throw ContractError("log_map: target point outside the ball");
    if (x.coords == y.coords) return TangentVector{std::vector<double>(x.dim(), 0.0), x};
    PoincarePoint neg_x = x;
    for (double& c : neg_x.coords) c = -c;
    const PoincarePoint w = mobius_add(neg_x, y);
    const double s = x.curvature.sqrt_abs();
    const double factor = 2.0 / conformal_factor(x) * artanh_ratio(s * norm(w.coords));
    TangentVector out{w.coords, x};
    for (double& c : out.components) c *= factor;
    return out;
}

// --- Lorentz ------------------------------------------------------------------------------

LorentzPoint exp_map(const LorentzPoint& x, const TangentVector& v) {
    require_finite(v.components, "exp_map");
    if (v.components.size() != x.coords.size())
        throw ContractError("exp_map: tangent has " + std::to_string(v.components.size()) +
                            " components, point has " + std::to_string(x.coords.size()));
    const double tangency = std::abs(minkowski_dot(x.coords, v.components));
    if (tangency > 1e-8 * std::max(1.0, norm(x.coords) * norm(v.components)))
        throw ContractError("exp_map: vector is not tangent at the base point (<x,v>_L = " +
                            std::to_string(tangency) + ")");
    const double q = std::max(0.0, minkowski_dot(v.components, v.components));
    if (std::sqrt(q) < 1e-12) return x;
    const double s = x.curvature.sqrt_abs() * std::sqrt(q);
    const double ch = std::cosh(s), shr = sinh_ratio(s);
    std::vector<double> out(x.coords.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ch * x.coords[i] + shr * v.components[i];
    return renormalized(std::move(out), x.curvature);
}

TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y) {
    require_same_space(x.curvature, y.curvature, x.dim(), y.dim(), "log_map");
    const double k = x.curvature.abs();
    std::vector<double> diff(x.coords.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = y.coords[i] - x.coords[i];
    // <y-x, y-x>_L = 2(alpha - 1)/k with alpha = -k<x,y>_L, so the acosh argument never
    // has to be formed and no clamp is needed near x = y.
    const double q = std::max(0.0, minkowski_dot(diff, diff));
    TangentVector out{std::vector<double>(diff.size(), 0.0), x};
    if (q == 0.0) return out;
    const double sd = 2.0 * std::asinh(std::sqrt(k * q) / 2.0);  // sqrt(k) * distance
    const double factor = inv_sinh_ratio(sd);
    const double alpha_minus_one = 0.5 * k * q;
    for (std::size_t i = 0; i < diff.size(); ++i)
        out.components[i] = factor * (diff[i] - alpha_minus_one * x.coords[i]);
    return out;
}

// --- generic ------------------------------------------------------------------------------

ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v) {
    return std::visit([&](const auto& p) -> ManifoldPoint { return exp_map(p, v); }, x);
}

TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y) {
    if (model_of(x) != model_of(y)) throw ContractError("log_map: model mismatch");
    if (model_of(x) == Model::poincare)
        return log_map(std::get<PoincarePoint>(x), std::get<PoincarePoint>(y));
    return log_map(std::get<LorentzPoint>(x), std::get<LorentzPoint>(y));
}

ManifoldPoint lift_euclidean(std::span<const double> x, Model m, Curvature c) {
    require_finite(x, "lift_euclidean");
    if (m == Model::poincare) return poincare_from_tangent_at_origin(x, c);
    const auto o = lorentz_origin(x.size(), c);
    return exp_map(o, origin_tangent(std::vector<double>(x.begin(), x.end()), m, c));
}

ManifoldPoint mobius_matvec(const Dense& w, const ManifoldPoint& x, bool* clamped) {
    const Curvature c = curvature_of(x);
    const Model m = model_of(x);
    const auto o = origin(m, m == Model::poincare ? std::get<PoincarePoint>(x).dim()
                                                  : std::get<LorentzPoint>(x).dim(), c);
    const TangentVector t = log_map(o, x);
    std::span<const double> spatial(t.components);
    if (m == Model::lorentz) spatial = spatial.subspan(1);
    if (w.cols() != spatial.size())
        throw DimensionError("mobius_matvec: matrix " + w.shape_string() + " for tangent of size " +
                             std::to_string(spatial.size()));
    std::vector<double> u(w.rows(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) u[r] = dot(w.row(r), spatial);

    if (m == Model::poincare) return poincare_from_tangent_at_origin(u, c, clamped);

    const double arg = c.sqrt_abs() * norm(u);
    if (clamped) *clamped = arg > kLorentzMaxArg;
    if (arg > kLorentzMaxArg)
        for (double& v : u) v *= kLorentzMaxArg / arg;
    const auto base = lorentz_origin(u.size(), c);
    return exp_map(base, origin_tangent(std::move(u), m, c));
}

TangentVector transport_from_origin(const ManifoldPoint& x, const TangentVector& v) {
    if (model_of(x) != model_of(v.base)) throw ContractError("transport_from_origin: model mismatch");
    if (const auto* p = std::get_if<PoincarePoint>(&x)) {
        if (v.components.size() != p->dim())
            throw ContractError("transport_from_origin: dimension mismatch");
        // gyr[x, -o] is the identity, leaving only the conformal rescaling lambda_o / lambda_x.
        const double scale = 2.0 / conformal_factor(*p);
        TangentVector out{v.components, x};
        for (double& c : out.components) c *= scale;
        return out;
    }
    const auto& l = std::get<LorentzPoint>(x);
    if (v.components.size() != l.coords.size())
        throw ContractError("transport_from_origin: dimension mismatch");
    const double s = l.curvature.sqrt_abs();
    const double coef =
        l.curvature.abs() * minkowski_dot(l.coords, v.components) / (1.0 + s * l.coords[0]);
    TangentVector out{v.components, x};
    const double o0 = 1.0 / s;
    out.components[0] += coef * (o0 + l.coords[0]);
    for (std::size_t i = 1; i < out.components.size(); ++i) out.components[i] += coef * l.coords[i];
    return out;
}

ManifoldPoint parallel_transport_bias(const ManifoldPoint& x, const ManifoldPoint& b) {
    if (model_of(x) != model_of(b)) throw ContractError("parallel_transport_bias: model mismatch");
    if (!(curvature_of(x) == curvature_of(b)))
        throw ContractError("parallel_transport_bias: curvature mismatch");
    const std::size_t dim = std::visit([](const auto& p) { return p.dim(); }, b);
    const auto o = origin(model_of(b), dim, curvature_of(b));
    const TangentVector at_origin = log_map(o, b);
    return exp_map(x, transport_from_origin(x, at_origin));
}

ManifoldPoint convert(const ManifoldPoint& x, Model target) {
    if (model_of(x) == target) return x;
    const Curvature c = curvature_of(x);
    const double k = c.abs(), s = c.sqrt_abs();
    if (target == Model::poincare) {
        const auto& l = as_lorentz(x, "convert");
        const double den = 1.0 + s * l.coords[0];
        std::vector<double> p(l.coords.begin() + 1, l.coords.end());
        for (double& v : p) v /= den;
        return project(PoincarePoint{std::move(p), c});
    }
    const auto& p = as_poincare(x, "convert");
    const double p2 = dot(p.coords, p.coords);
    const double den = 1.0 - k * p2;
    std::vector<double> out(p.dim() + 1);
    out[0] = (1.0 + k * p2) / (s * den);
    for (std::size_t i = 0; i < p.dim(); ++i) out[i + 1] = 2.0 * p.coords[i] / den;
    return renormalized(std::move(out), c);
}

double geodesic_distance(const ManifoldPoint& x, const ManifoldPoint& y) {
    if (model_of(x) != model_of(y)) throw ContractError("geodesic_distance: model mismatch");
    const Curvature c = curvature_of(x);
    if (!(c == curvature_of(y))) throw ContractError("geodesic_distance: curvature mismatch");
    const double s = c.sqrt_abs();
    if (model_of(x) == Model::poincare) {
        // sinh(sqrt(k) d / 2) = sqrt(k) |x - y| / sqrt((1 - k|x|^2)(1 - k|y|^2)); unlike the
        // artanh of the Mobius difference this neither clamps nor loses digits near the boundary.
        const auto& a = std::get<PoincarePoint>(x).coords;
        const auto& b = std::get<PoincarePoint>(y).coords;
        if (a.size() != b.size()) throw DimensionError("geodesic_distance: dimension mismatch");
        const double k = c.abs();
        double diff2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) diff2 += (a[i] - b[i]) * (a[i] - b[i]);
        const double den = (1.0 - k * dot(a, a)) * (1.0 - k * dot(b, b));
        return 2.0 / s * std::asinh(s * std::sqrt(diff2 / den));
    }
    const auto& a = std::get<LorentzPoint>(x);
    const auto& b = std::get<LorentzPoint>(y);
    require_same_space(a.curvature, b.curvature, a.dim(), b.dim(), "geodesic_distance");
    std::vector<double> diff(a.coords.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = b.coords[i] - a.coords[i];
    const double q = std::max(0.0, minkowski_dot(diff, diff));
    return 2.0 / s * std::asinh(s * std::sqrt(q) / 2.0);
}

double riemannian_norm(const TangentVector& v) {
    if (const auto* p = std::get_if<PoincarePoint>(&v.base))
        return conformal_factor(*p) * norm(v.components);
    return std::sqrt(std::max(0.0, minkowski_dot(v.components, v.components)));
}

}  // namespace hygraph::manifold
