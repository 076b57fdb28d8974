#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "lensq/constants.hpp"

namespace lensq {

/// Point-mass lens seen against a background source.
struct LensGeometry {
    double M = constants::M_jup;               ///< lens mass, kg
    double D_L = 4.0 * constants::kiloparsec;  ///< observer-lens distance, m
    double D_S = 8.0 * constants::kiloparsec;  ///< observer-source distance, m
    double v_T = 55.0e3;                       ///< relative transverse velocity, m/s
    double u = 1.0;                            ///< impact parameter in Einstein radii

    double D_LS() const { return D_S - D_L; }

    void validate() const {
        if (!(M > 0.0)) throw std::invalid_argument("lens geometry: mass must be positive");
        if (!(D_L > 0.0 && D_L < D_S)) throw std::invalid_argument("lens geometry: need 0 < D_L < D_S");
        if (!(u >= 0.0)) throw std::invalid_argument("lens geometry: impact parameter must be >= 0");
    }
};

struct SourceGeometry {
    double R_S = constants::R_sun;             ///< radius of the emitting region, m
    double D_S = 8.0 * constants::kiloparsec;  ///< m
};

/// Angular Einstein radius, rad.
inline double einstein_radius(const LensGeometry& g) {
    g.validate();
    using namespace constants;
    return std::sqrt(4.0 * G * g.M * (1.0 - g.D_L / g.D_S) / (g.D_L * c * c));
}

/// Einstein crossing time, s.
inline double crossing_time(const LensGeometry& g) {
    if (!(g.v_T > 0.0)) throw std::invalid_argument("crossing_time: transverse velocity must be positive");
    return einstein_radius(g) * g.D_L / g.v_T;
}

/// Major and minor image positions for source angle beta.
inline std::pair<double, double> image_positions(double beta, double theta_E) {
    if (!(theta_E > 0.0)) throw std::invalid_argument("image_positions: Einstein radius must be positive");
    const double root = std::sqrt(beta * beta + 4.0 * theta_E * theta_E);
    // the minor image is formed as -theta_E^2 / theta_plus to avoid cancellation
    const double plus = 0.5 * (beta + root);
    return {plus, -theta_E * theta_E / plus};
}

struct Magnification {
    double A = 0.0;
    double plus = 0.0;   ///< A/2 + 1/2
    double minus = 0.0;  ///< A/2 - 1/2
};

inline Magnification magnification(double u) {
    if (u == 0.0) throw std::domain_error("magnification: diverges at u = 0");
    if (!(u > 0.0)) throw std::invalid_argument("magnification: u must be positive");
    Magnification m;
    m.A = (u * u + 2.0) / (u * std::sqrt(u * u + 4.0));
    m.plus = 0.5 * m.A + 0.5;
    m.minus = 0.5 * m.A - 0.5;
    return m;
}

/// Dimensionless delay factor f(u).
inline double delay_factor(double u) {
    if (!(u >= 0.0)) throw std::invalid_argument("delay_factor: u must be >= 0");
    const double r = std::sqrt(u * u + 4.0);
    // ln((r + u) / (r - u)) = 2 asinh(u / 2)
    return 0.5 * u * r + 2.0 * std::asinh(0.5 * u);
}

/// Delay between the two images, s.
inline double time_delay(double M, double u) {
    if (!(M > 0.0)) throw std::invalid_argument("time_delay: mass must be positive");
    using namespace constants;
    return 4.0 * G * M / (c * c * c) * delay_factor(u);
}

/// Shortest wavelength whose fringe survives the finite source size, m.
inline double finite_source_lambda_min(const SourceGeometry& src, double A) {
    if (!(src.R_S >= 0.0) || !(src.D_S > 0.0)) throw std::invalid_argument("finite_source_lambda_min: bad source");
    return 2.0 * src.R_S * src.R_S * A / src.D_S;
}

}  // namespace lensq
