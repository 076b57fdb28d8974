#pragma once

/// SI constants used throughout. Values are rounded to the precision the
/// feasibility estimates need.
namespace lensq::constants {

inline constexpr double G = 6.674e-11;          ///< m^3 kg^-1 s^-2
inline constexpr double c = 2.998e8;            ///< m / s
inline constexpr double h = 6.62607015e-34;     ///< J s
inline constexpr double k_B = 1.380649e-23;     ///< J / K
inline constexpr double M_sun = 1.989e30;       ///< kg
inline constexpr double M_jup = 1.898e27;       ///< kg
inline constexpr double R_sun = 6.957e8;        ///< m
inline constexpr double R_earth = 6.371e6;      ///< m
inline constexpr double parsec = 3.086e16;      ///< m
inline constexpr double kiloparsec = 3.086e19;  ///< m
inline constexpr double day = 86400.0;          ///< s
inline constexpr double erg = 1e-7;             ///< J

}  // namespace lensq::constants
