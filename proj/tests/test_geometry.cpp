#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "lensq/geometry.hpp"
#include "lensq/rng.hpp"
#include "lensq/signal_model.hpp"

using namespace lensq;
using namespace lensq::constants;

namespace {

LensGeometry fiducial() { return LensGeometry{M_jup, 4.0 * kiloparsec, 8.0 * kiloparsec, 55e3, 1.0}; }

// Source-plane position of image-plane point (x, y) for a point lens with unit Einstein radius.
std::array<double, 2> lens_map(double x, double y) {
    const double r2 = x * x + y * y;
    return {x - x / r2, y - y / r2};
}

// |det d(beta)/d(theta)|^-1 by central differences.
double fd_magnification(double x, double y, double h = 1e-6) {
    const auto px = lens_map(x + h, y), mx = lens_map(x - h, y);
    const auto py = lens_map(x, y + h), my = lens_map(x, y - h);
    const double a = (px[0] - mx[0]) / (2 * h), b = (py[0] - my[0]) / (2 * h);
    const double c = (px[1] - mx[1]) / (2 * h), d = (py[1] - my[1]) / (2 * h);
    return 1.0 / std::abs(a * d - b * c);
}

}  // namespace

TEST(EinsteinRadius, JupiterMassBulgeLens) {
    const double theta = einstein_radius(fiducial());
    const double ref = std::sqrt(4.0 * 6.674e-11 * 1.898e27 * 0.5 / (4.0 * 3.086e19 * 2.998e8 * 2.998e8));
    EXPECT_NEAR(theta, ref, 1e-12 * ref);
    EXPECT_NEAR(theta, 1.51e-10, 0.01e-10);
}

TEST(EinsteinRadius, Scalings) {
    auto g = fiducial();
    const double base = einstein_radius(g);
    g.M *= 4.0;
    EXPECT_NEAR(einstein_radius(g), 2.0 * base, 1e-12 * base);
    g = fiducial();
    g.D_L = g.D_S * (1.0 - 1e-12);
    EXPECT_LT(einstein_radius(g), 1e-5 * base);
    g.D_L = g.D_S;
    EXPECT_THROW(einstein_radius(g), std::invalid_argument);
    g = fiducial();
    g.M = 0.0;
    EXPECT_THROW(einstein_radius(g), std::invalid_argument);
}

TEST(CrossingTime, AboutFourDaysForJupiter) {
    const double tE = crossing_time(fiducial());
    EXPECT_NEAR(tE / day, 4.0, 0.4);
}

TEST(CrossingTime, Scalings) {
    auto g = fiducial();
    const double base = crossing_time(g);
    g.M *= 225.0;
    EXPECT_NEAR(crossing_time(g), 15.0 * base, 1e-12 * base);
    g = fiducial();
    g.v_T *= 2.0;
    EXPECT_NEAR(crossing_time(g), 0.5 * base, 1e-12 * base);
    g.v_T = 0.0;
    EXPECT_THROW(crossing_time(g), std::invalid_argument);
}

TEST(ImagePositions, RingAndGoldenRatio) {
    const auto [p0, m0] = image_positions(0.0, 2.0);
    EXPECT_DOUBLE_EQ(p0, 2.0);
    EXPECT_DOUBLE_EQ(m0, -2.0);
    const auto [p1, m1] = image_positions(3.0, 3.0);
    EXPECT_NEAR(p1 / 3.0, (1.0 + std::sqrt(5.0)) / 2.0, 1e-14);
    EXPECT_NEAR(m1 / 3.0, (1.0 - std::sqrt(5.0)) / 2.0, 1e-14);
    EXPECT_THROW(image_positions(1.0, 0.0), std::invalid_argument);
}

TEST(ImagePositions, LensEquationIdentities) {
    RngStream rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double tE = 1e-10 * (0.1 + rng.uniform());
        const double beta = tE * 10.0 * rng.uniform();
        const auto [p, m] = image_positions(beta, tE);
        EXPECT_NEAR(p * m / (tE * tE), -1.0, 1e-12);
        EXPECT_NEAR((p - m) / std::sqrt(beta * beta + 4.0 * tE * tE), 1.0, 1e-12);
        // each image maps back to the source
        EXPECT_NEAR((p - tE * tE / p) / tE, beta / tE, 1e-9);
        EXPECT_NEAR((m - tE * tE / m) / tE, beta / tE, 1e-9);
    }
}

TEST(Magnification, UnitImpactParameter) {
    const auto m = magnification(1.0);
    EXPECT_NEAR(m.A, 3.0 / std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(m.A, 1.3416, 1e-4);
    EXPECT_DOUBLE_EQ(m.plus - m.minus, 1.0);
    EXPECT_DOUBLE_EQ(m.plus + m.minus, m.A);
}

TEST(Magnification, LimitsAndErrors) {
    EXPECT_NEAR(magnification(1e4).A, 1.0, 1e-12);
    EXPECT_THROW(magnification(0.0), std::domain_error);
    EXPECT_THROW(magnification(-1.0), std::invalid_argument);
}

TEST(Magnification, MatchesFiniteDifferenceJacobian) {
    for (double u : {0.1, 0.5, 2.0}) {
        const auto [p, m] = image_positions(u, 1.0);
        const double total = fd_magnification(p, 0.0) + fd_magnification(m, 0.0);
        EXPECT_NEAR(total, magnification(u).A, 1e-6 * magnification(u).A) << "u=" << u;
        EXPECT_NEAR(fd_magnification(p, 0.0), magnification(u).plus, 1e-6 * magnification(u).A);
    }
}

TEST(Magnification, VisibilityConsistency) {
    RngStream rng(2);
    for (int i = 0; i < 200; ++i) {
        const double u = 0.01 + 5.0 * rng.uniform();
        const auto m = magnification(u);
        EXPECT_NEAR(gamma_factor(m.A), 2.0 * std::sqrt(m.plus * m.minus) / m.A, 1e-12);
    }
}

TEST(DelayFactor, ValuesAndClosedForm) {
    EXPECT_DOUBLE_EQ(delay_factor(0.0), 0.0);
    EXPECT_NEAR(delay_factor(1.0), 2.0805, 1e-4);
    for (double u : {0.01, 0.3, 1.0, 4.0, 9.0}) {
        const double r = std::sqrt(u * u + 4.0);
        EXPECT_NEAR(delay_factor(u), 0.5 * u * r + std::log((r + u) / (r - u)), 1e-12 * delay_factor(u));
    }
    EXPECT_THROW(delay_factor(-0.1), std::invalid_argument);
}

TEST(DelayFactor, MonotoneAgainstMagnification) {
    double f_prev = 0.0, a_prev = 1e300;
    for (double u = 0.001; u <= 10.0; u += 0.001) {
        const double f = delay_factor(u), a = magnification(u).A;
        ASSERT_GT(f, f_prev);
        ASSERT_LT(a, a_prev);
        f_prev = f;
        a_prev = a;
    }
}

TEST(TimeDelay, SolarMassAtUnitImpact) {
    EXPECT_DOUBLE_EQ(time_delay(M_sun, 0.0), 0.0);
    const double dt = time_delay(M_sun, 1.0);
    EXPECT_NEAR(dt, 4.1e-5, 0.02 * 4.1e-5);
    const double GMc3 = G * M_sun / (c * c * c);
    EXPECT_NEAR(dt / GMc3, 8.32, 0.01);
    EXPECT_THROW(time_delay(0.0, 1.0), std::invalid_argument);
}

TEST(FiniteSource, WavelengthBounds) {
    const double A = 1.34;
    EXPECT_NEAR(finite_source_lambda_min({R_sun, 8.0 * kiloparsec}, A), 5e-3, 0.5e-3);
    EXPECT_NEAR(finite_source_lambda_min({R_earth, 8.0 * kiloparsec}, A), 440e-9, 44e-9);
    EXPECT_DOUBLE_EQ(finite_source_lambda_min({0.0, 8.0 * kiloparsec}, A), 0.0);
    EXPECT_THROW(finite_source_lambda_min({R_sun, 0.0}, A), std::invalid_argument);
}
