#pragma once

// f(z)/z style functions that stay smooth through z = 0. The exp/log maps are all of the
// form "vector times ratio(norm)", and evaluating the ratio directly loses every digit near
// the origin. Below kSeriesCut the Taylor expansions are exact to double precision.

#include <algorithm>
#include <cmath>

namespace hygraph::detail {

inline constexpr double kSeriesCut = 1e-3;
inline constexpr double kArtanhMax = 1.0 - 1e-12;
inline constexpr double kAcoshMin = 1.0 + 1e-12;

// tanh(z)/z
inline double tanh_ratio(double z) {
    if (std::abs(z) < kSeriesCut) {
        const double z2 = z * z;
        return 1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 15.0;
    }
    return std::tanh(z) / z;
}
inline double tanh_ratio_d(double z) {
    if (std::abs(z) < kSeriesCut) return -2.0 * z / 3.0 + 8.0 * z * z * z / 15.0;
    const double t = std::tanh(z);
    return (z * (1.0 - t * t) - t) / (z * z);
}

// artanh(z)/z, argument clamped below 1.
inline double artanh_ratio(double z) {
    z = std::min(z, kArtanhMax);
    if (std::abs(z) < kSeriesCut) {
        const double z2 = z * z;
        return 1.0 + z2 / 3.0 + z2 * z2 / 5.0;
    }
    return std::atanh(z) / z;
}
inline double artanh_ratio_d(double z) {
    if (z > kArtanhMax) return 0.0;
    if (std::abs(z) < kSeriesCut) return 2.0 * z / 3.0 + 4.0 * z * z * z / 5.0;
    return (z / (1.0 - z * z) - std::atanh(z)) / (z * z);
}

// sinh(z)/z
inline double sinh_ratio(double z) {
    if (std::abs(z) < kSeriesCut) {
        const double z2 = z * z;
        return 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sinh(z) / z;
}
inline double sinh_ratio_d(double z) {
    if (std::abs(z) < kSeriesCut) return z / 3.0 + z * z * z / 30.0;
    return (z * std::cosh(z) - std::sinh(z)) / (z * z);
}

// asinh(z)/z
inline double asinh_ratio(double z) {
    if (std::abs(z) < kSeriesCut) {
        const double z2 = z * z;
        return 1.0 - z2 / 6.0 + 3.0 * z2 * z2 / 40.0;
    }
    return std::asinh(z) / z;
}
inline double asinh_ratio_d(double z) {
    if (std::abs(z) < kSeriesCut) return -z / 3.0 + 3.0 * z * z * z / 10.0;
    return (z / std::sqrt(1.0 + z * z) - std::asinh(z)) / (z * z);
}

// z/sinh(z)
inline double inv_sinh_ratio(double z) { return 1.0 / sinh_ratio(z); }

// Functions of a squared norm q >= 0; smooth in q at q = 0, unlike their sqrt(q) forms.
inline double cosh_sqrt(double q) { return std::cosh(std::sqrt(std::max(q, 0.0))); }
inline double cosh_sqrt_d(double q) { return 0.5 * sinh_ratio(std::sqrt(std::max(q, 0.0))); }
inline double sinhc_sqrt(double q) { return sinh_ratio(std::sqrt(std::max(q, 0.0))); }
inline double sinhc_sqrt_d(double q) {
    q = std::max(q, 0.0);
    if (q < kSeriesCut * kSeriesCut) return 1.0 / 6.0 + q / 60.0;
    const double s = std::sqrt(q);
    return sinh_ratio_d(s) / (2.0 * s);
}

}  // namespace hygraph::detail
