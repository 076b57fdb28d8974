#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lensq/phase.hpp"
#include "lensq/signal_model.hpp"

namespace lensq {

/// Quadrature settings for the capacity integrals. The frequency integral spans
/// omega0 +- half_width / tc; `tolerance` is the relative target of the adaptive rules.
struct CapacityGrid {
    double half_width = 10.0;
    double tolerance = 1e-9;
    unsigned max_depth = 18;

    /// Wider span and tighter tolerance.
    CapacityGrid refined() const { return {half_width * 1.2, tolerance * 0.1, max_depth + 2}; }

    void validate() const {
        if (!(half_width >= 10.0)) throw std::invalid_argument("capacity grid: must span at least omega0 +- 10/tc");
        if (!(tolerance > 0.0 && tolerance < 1e-3)) throw std::invalid_argument("capacity grid: tolerance in (0, 1e-3)");
    }
};

struct CapacityResult {
    double chi = 0.0;          ///< nats per photon
    double S_left = 0.0;       ///< entropy of the delay-averaged frequency density, in T nu
    double S_right = 0.0;      ///< mean conditional entropy, in T nu
    double chi_refined = 0.0;  ///< same quantity on the refined grid
};

namespace detail {

/// (1 + g cos phi) ln(1 + g cos phi), taken as zero where the fringe vanishes.
inline double fringe_entropy_term(double phi, double g) {
    const double x = 1.0 + g * std::cos(phi);
    return x > 0.0 ? x * std::log(x) : 0.0;
}

/// Integral of fringe_entropy_term over [0, b] with b <= 2π. The log
/// singularity of the g = 1 case sits at phi = π, so the range is split there.
inline double fringe_entropy_integral(double b, double g, double tol) {
    if (b <= 0.0) return 0.0;
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [g](double phi) { return fringe_entropy_term(phi, g); };
    if (b <= pi) return ts.integrate(f, 0.0, b, tol);
    return ts.integrate(f, 0.0, pi, tol) + ts.integrate(f, pi, b, tol);
}

inline CapacityResult capacity_once(const WavePacketSpec& packet, double g, const CapacityGrid& grid) {
    using boost::math::quadrature::gauss_kronrod;
    const double tc = packet.tc, T = packet.T, w0 = packet.omega0;
    const double lo = w0 - grid.half_width / tc;
    const double hi = w0 + grid.half_width / tc;
    const double period = fringe_entropy_integral(two_pi, g, grid.tolerance);

    // (1/T) * integral over delays in [0, T] of (1 + g cos(nu t)) ln(1 + g cos(nu t))
    auto delay_average = [&](double nu) {
        const double span = nu * T;
        const double turns = std::floor(span / two_pi);
        const double rem = span - turns * two_pi;
        return (turns * period + fringe_entropy_integral(rem, g, grid.tolerance)) / span;
    };
    auto env = [&](double nu) { return envelope_density(nu - w0, packet); };
    auto sinc = [&](double nu) { return std::sin(nu * T) / (nu * T); };
    // densities are expressed in the dimensionless variable T nu
    auto xlogx = [&](double p) { return p > 0.0 ? p * std::log(p / T) : 0.0; };

    auto left = [&](double nu) { return -xlogx(env(nu) * (1.0 + g * sinc(nu))); };
    auto right = [&](double nu) {
        const double e = env(nu);
        if (e <= 0.0) return 0.0;
        return -e * std::log(e / T) * (1.0 + g * sinc(nu)) - e * delay_average(nu);
    };
    CapacityResult r;
    r.S_left = gauss_kronrod<double, 61>::integrate(left, lo, hi, grid.max_depth, grid.tolerance);
    r.S_right = gauss_kronrod<double, 61>::integrate(right, lo, hi, grid.max_depth, grid.tolerance);
    r.chi = r.S_left - r.S_right;
    return r;
}

}  // namespace detail

/// Information per photon about a delay uniform on [0, T], chi = S_left - S_right,
/// for a fringe of visibility gamma_factor(A). Throws if refining the grid moves
/// the result by more than 1e-2.
inline CapacityResult holevo_capacity_numeric(const WavePacketSpec& packet, const CapacityGrid& grid = {},
                                              double A = std::numeric_limits<double>::infinity()) {
    packet.validate();
    grid.validate();
    if (packet.T * packet.omega0 < 1e3) throw std::invalid_argument("holevo_capacity_numeric: need T * omega0 >= 1e3");
    const double g = gamma_factor(A);
    CapacityResult r = detail::capacity_once(packet, g, grid);
    r.chi_refined = detail::capacity_once(packet, g, grid.refined()).chi;
    if (!(std::abs(r.chi - r.chi_refined) <= 1e-2))
        throw std::runtime_error("holevo_capacity_numeric: quadrature did not converge under refinement");
    return r;
}

/// Large-window value of chi for visibility g: (1/2π) * integral over one fringe period.
inline double capacity_large_window(double g) {
    return detail::fringe_entropy_integral(two_pi, g, 1e-12) / two_pi;
}

}  // namespace lensq
