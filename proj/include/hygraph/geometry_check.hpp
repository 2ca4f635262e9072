#pragma once

// Randomised property suite for the manifold maps: exp/log round trips, the Lorentz constraint
// after chained operations, and distance preservation of model conversion.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hygraph/manifold.hpp"

namespace hygraph::geometry {

struct GeometryTolerances {
    double round_trip = 1e-9;
    double constraint = 1e-8;
    double distance = 1e-7;
};

struct GeometryCheckReport {
    manifold::Model model = manifold::Model::poincare;
    double curvature = -1.0;
    std::size_t trials = 0;
    double max_round_trip = 0.0;   // |log_x(exp_x(v)) - v|_inf, at the origin and nearby bases
    double max_constraint = 0.0;   // ball overshoot or |<x,x>_L - 1/c| after chained maps
    double max_distance = 0.0;     // |d(p, q) - d(convert p, convert q)|
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

// Tangent vectors have norm up to `max_norm`, dimensions cycle through 2..9.
GeometryCheckReport geometry_check(manifold::Model model, double curvature, std::size_t trials, std::uint64_t seed,
                                   const GeometryTolerances& tol = {}, double max_norm = 3.0);

}  // namespace hygraph::geometry
