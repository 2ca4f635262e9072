#pragma once

// Row-batched, differentiable versions of the manifold maps. A batch is an ad::Var whose rows
// are points (Poincare: n x d, Lorentz: n x (d + 1) with the time coordinate first) or
// tangent vectors at the origin (always n x d, spatial components only).
//
// The euclidean space is a flat bypass: exp0/log0 are identities and the bias is added
// directly, so every other code path stays the same when comparing geometries.

#include <cstddef>
#include <string>
#include <string_view>

#include "hygraph/autodiff.hpp"
#include "hygraph/manifold.hpp"

namespace hygraph::geometry {

enum class Space { poincare, lorentz, euclidean };

Space parse_space(std::string_view name);
std::string to_string(Space s);

class Geometry {
public:
    Geometry() = default;
    Geometry(Space space, manifold::Curvature c) : space_(space), c_(c) {}

    Space space() const { return space_; }
    manifold::Curvature curvature() const { return c_; }

    // Columns of a point batch for tangent dimension d.
    std::size_t point_cols(std::size_t d) const { return space_ == Space::lorentz ? d + 1 : d; }

    ad::Var exp0(const ad::Var& tangent) const;
    ad::Var log0(const ad::Var& points) const;
    // Each row x becomes exp_x(P_{o->x}(b)) for the origin tangent b (1 x d).
    ad::Var bias_add(const ad::Var& points, const ad::Var& bias) const;

    // Largest violation of the model's validity condition over the rows: distance past the
    // clamped ball radius (Poincare) or |<x,x>_L - 1/c| (Lorentz). Zero for euclidean.
    double max_violation(const Dense& points) const;

    manifold::ManifoldPoint point(const Dense& points, std::size_t row) const;

private:
    Space space_ = Space::poincare;
    manifold::Curvature c_;
};

// Building blocks, exposed for tests.
ad::Var mobius_add_rows(const ad::Var& x, const ad::Var& y, manifold::Curvature c);
ad::Var poincare_exp_rows(const ad::Var& x, const ad::Var& u, manifold::Curvature c);
ad::Var lorentz_exp_rows(const ad::Var& x, const ad::Var& u, manifold::Curvature c);
ad::Var lorentz_transport_rows(const ad::Var& x, const ad::Var& bias, manifold::Curvature c);
// Recomputes the time column from the spatial ones.
ad::Var lorentz_renormalize(const ad::Var& x, manifold::Curvature c);

}  // namespace hygraph::geometry
