#include "hygraph/geometry_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <variant>

#include "hygraph/errors.hpp"

namespace hygraph::geometry {

namespace {

using manifold::ManifoldPoint;
using manifold::Model;


std::vector<double> random_tangent(std::size_t d, double max_norm, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(d);
    double s = 0.0;
    for (double& x : v) {
        x = g(rng);
        s += x * x;
    }
    const double r = max_norm * u(rng) / std::sqrt(s);
    for (double& x : v) x *= r;
    return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double constraint_error(const ManifoldPoint& p) {
    if (const auto* l = std::get_if<manifold::LorentzPoint>(&p)) return manifold::lorentz_constraint_error(*l);
    const auto& x = std::get<manifold::PoincarePoint>(p);
    double s = 0.0;
    for (double v : x.coords) s += v * v;
    const double limit = (1.0 - manifold::kBallMargin) / x.curvature.sqrt_abs();
    return std::max(0.0, std::sqrt(s) - limit);
}

// Ambient tangent at the origin: Lorentz vectors carry a zero time component.
std::vector<double> ambient(const std::vector<double>& v, Model m) {
    if (m == Model::poincare) return v;
    std::vector<double> out{0.0};
    out.insert(out.end(), v.begin(), v.end());
    return out;
}

}  // namespace

GeometryCheckReport geometry_check(Model model, double curvature, std::size_t trials, std::uint64_t seed,
                                   const GeometryTolerances& tol, double max_norm) {
    if (trials == 0) throw ContractError("geometry_check: trials must be at least 1");
    const manifold::Curvature c(curvature);
    GeometryCheckReport rep;
    rep.model = model;
    rep.curvature = curvature;
    rep.trials = trials;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const Model other = model == Model::poincare ? Model::lorentz : Model::poincare;

    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t d = 2 + t % 8;
        const auto o = manifold::origin(model, d, c);

        // round trip at the origin
        const auto v = random_tangent(d, max_norm, rng);
        const manifold::TangentVector tv{ambient(v, model), o};
        const auto back = manifold::log_map(o, manifold::exp_map(o, tv));
        rep.max_round_trip = std::max(rep.max_round_trip, max_abs_diff(back.components, tv.components));

        // round trip at a base point near the origin, with the tangent transported there
        const auto x = manifold::exp_map(o, {ambient(random_tangent(d, 0.5, rng), model), o});
        const auto vx = manifold::transport_from_origin(x, {ambient(random_tangent(d, max_norm, rng), model), o});
        const auto back_x = manifold::log_map(x, manifold::exp_map(x, vx));
        rep.max_round_trip = std::max(rep.max_round_trip, max_abs_diff(back_x.components, vx.components));

        // chained matrix actions and bias additions
        ManifoldPoint p = manifold::lift_euclidean(random_tangent(d, max_norm, rng), model, c);
        for (int step = 0; step < 4; ++step) {
            // Frobenius-normalised, so the chain stays within a bounded distance of the origin
            Dense w(d, d);
            double f = 0.0;
            for (double& e : w.values()) {
                e = g(rng);
                f += e * e;
            }
            for (double& e : w.values()) e /= std::sqrt(f);
            p = manifold::mobius_matvec(w, p);
            const auto b = manifold::lift_euclidean(random_tangent(d, 1.0, rng), model, c);
            p = manifold::parallel_transport_bias(p, b);
            rep.max_constraint = std::max(rep.max_constraint, constraint_error(p));
        }

        // conversion preserves distances
        const auto a = manifold::lift_euclidean(random_tangent(d, max_norm, rng), model, c);
        const auto b = manifold::lift_euclidean(random_tangent(d, max_norm, rng), model, c);
        const double d1 = manifold::geodesic_distance(a, b);
        const double d2 = manifold::geodesic_distance(manifold::convert(a, other), manifold::convert(b, other));
        rep.max_distance = std::max(rep.max_distance, std::abs(d1 - d2));
    }
    if (!(rep.max_round_trip < tol.round_trip))
        rep.failures.push_back("round_trip " + std::to_string(rep.max_round_trip));
    if (!(rep.max_constraint < tol.constraint))
        rep.failures.push_back("constraint " + std::to_string(rep.max_constraint));
    if (!(rep.max_distance < tol.distance)) rep.failures.push_back("distance " + std::to_string(rep.max_distance));
    return rep;
}

}  // namespace hygraph::geometry
