#pragma once

#include <cmath>

namespace lensq {

inline constexpr double pi = 3.14159265358979323846;
/// Double nearest to 2π.
inline constexpr double two_pi = 6.283185307179586;

namespace detail {
// 2π minus two_pi; together they carry about 106 bits of 2π.
inline constexpr double two_pi_tail = 2.4492935982947064e-16;
}  // namespace detail

/// The exact product a*b reduced modulo 2π into roughly [-π, π].
///
/// The product is split into a rounded part and its exact rounding error, and
/// the rounded part is reduced with a two-term Cody-Waite scheme. Absolute error
/// stays near 1e-15 rad while |a*b| is below about 1e15.
inline double reduce_product(double a, double b) {
    const double p = a * b;
    const double e = std::fma(a, b, -p);
    const double n = std::nearbyint(p / two_pi);
    double r = std::fma(-n, two_pi, p);
    r = std::fma(-n, detail::two_pi_tail, r);
    return r + e;
}

/// Phase folded into [0, 2π).
inline double wrap_phase(double x) {
    double r = reduce_product(x, 1.0);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r -= two_pi;
    return r;
}

/// Fractional part of the exact product a*b, in [-0.5, 0.5].
inline double frac_product(double a, double b) {
    const double p = a * b;
    const double e = std::fma(a, b, -p);
    const double n = std::nearbyint(p);
    return (p - n) + e;
}

}  // namespace lensq
