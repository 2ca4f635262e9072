#pragma once

// Point-wise kernels for the Poincare ball and Lorentz (hyperboloid) models of hyperbolic
// space with constant curvature c < 0. Coordinates are plain std::vector<double>; the batched,
// differentiable counterparts used by the encoder live in geometry.hpp.
//
// Conventions, with k = |c|:
//   Poincare ball   { x in R^n : |x|^2 < 1/k },  lambda_x = 2 / (1 + c |x|^2)
//   Lorentz model   { x in R^{n+1} : <x,x>_L = 1/c, x_0 > 0 },  <x,y>_L = -x_0 y_0 + sum x_i y_i
// The Lorentz origin is (1/sqrt(k), 0, ..., 0).

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "hygraph/dense.hpp"

namespace hygraph::manifold {

class Curvature {
public:
    Curvature() = default;
    explicit Curvature(double c);

    double value() const { return c_; }
    double abs() const { return -c_; }
    double sqrt_abs() const;
    double radius() const;  // 1/sqrt(|c|)

    friend bool operator==(Curvature, Curvature) = default;

private:
    double c_ = -1.0;
};

enum class Model { poincare, lorentz };

// Points are kept this far inside the ball: |x| <= (1 - kBallMargin) / sqrt(|c|).
inline constexpr double kBallMargin = 1e-5;

struct PoincarePoint {
    std::vector<double> coords;
    Curvature curvature;
    std::size_t dim() const { return coords.size(); }
};

struct LorentzPoint {
    std::vector<double> coords;  // n + 1 entries, time coordinate first
    Curvature curvature;
    std::size_t dim() const { return coords.size() - 1; }
};

using ManifoldPoint = std::variant<PoincarePoint, LorentzPoint>;

// Tangent vector at `base`. Lorentz tangents carry all n + 1 ambient components.
struct TangentVector {
    std::vector<double> components;
    ManifoldPoint base;
};

Model model_of(const ManifoldPoint& p);
Curvature curvature_of(const ManifoldPoint& p);

// Validating constructors. make_poincare rejects points outside the open ball and applies
// the boundary clamp; make_lorentz recomputes the time coordinate from the spatial ones.
PoincarePoint make_poincare(std::vector<double> coords, Curvature c = {});
LorentzPoint make_lorentz(std::vector<double> coords, Curvature c = {});
PoincarePoint poincare_origin(std::size_t dim, Curvature c = {});
LorentzPoint lorentz_origin(std::size_t dim, Curvature c = {});
ManifoldPoint origin(Model m, std::size_t dim, Curvature c = {});

TangentVector origin_tangent(std::vector<double> components, Model m, Curvature c = {});

double minkowski_dot(std::span<const double> a, std::span<const double> b);
double lorentz_constraint_error(const LorentzPoint& x);

// --- Poincare ball ----------------------------------------------------------------------
double conformal_factor(const PoincarePoint& x);
PoincarePoint project(PoincarePoint x);
PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y);
PoincarePoint exp_map(const PoincarePoint& x, const TangentVector& v);
TangentVector log_map(const PoincarePoint& x, const PoincarePoint& y);

// --- Lorentz ------------------------------------------------------------------------------
LorentzPoint exp_map(const LorentzPoint& x, const TangentVector& v);
TangentVector log_map(const LorentzPoint& x, const LorentzPoint& y);

// --- model-generic ------------------------------------------------------------------------
ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v);
TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y);

// Reads a Euclidean vector as a tangent at the origin and maps it onto the manifold; the
// Lorentz variant prepends a zero time component first.
ManifoldPoint lift_euclidean(std::span<const double> x, Model m, Curvature c = {});

// exp_o(W log_o(x)); W is (out x in) acting on the spatial tangent components. `clamped`
// is set when the image had to be pulled back inside the representable range.
ManifoldPoint mobius_matvec(const Dense& w, const ManifoldPoint& x, bool* clamped = nullptr);

// Transports a tangent at the origin to `x`.
TangentVector transport_from_origin(const ManifoldPoint& x, const TangentVector& v);

// x (+) b realised as exp_x(P_{o->x}(log_o(b))).
ManifoldPoint parallel_transport_bias(const ManifoldPoint& x, const ManifoldPoint& b);

ManifoldPoint convert(const ManifoldPoint& x, Model target);

double geodesic_distance(const ManifoldPoint& x, const ManifoldPoint& y);

// Length of a tangent vector under the Riemannian metric at its base point.
double riemannian_norm(const TangentVector& v);

}  // namespace hygraph::manifold
