#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "lensq/dust.hpp"
#include "lensq/harness/stats.hpp"

using namespace lensq;

namespace {

// Planar tree with d/r = 2^levels and Poisson mean x = r R rho.
DustModelConfig planar(int levels, double x, double r = 1e-6) {
    DustModelConfig c;
    c.r = r;
    c.d = r * std::ldexp(1.0, levels);
    c.R = 1.0;
    c.rho_N = x / (c.r * c.R);
    return c;
}

harness::RunningStats run_trials(const DustModelConfig& c, std::size_t trials, std::uint64_t seed) {
    harness::RunningStats st;
    for (std::size_t t = 0; t < trials; ++t) {
        RngStream rng(seed, t);
        st.add(simulate_tree(c, rng).unblocked_fraction);
    }
    return st;
}

}  // namespace

TEST(LayerSurvival, NoDustMeansEveryCellIsClear) {
    const auto c = planar(6, 0.0);
    for (int k = 1; k <= c.layers(); ++k) EXPECT_DOUBLE_EQ(layer_survival(k, c), 1.0);
    EXPECT_DOUBLE_EQ(loss_rate(c), 0.0);
}

TEST(LayerSurvival, SecondLayerAndOrdering) {
    const auto c = planar(8, 0.3);
    const double base = c.r * c.r * c.R * c.rho_N / c.d;
    EXPECT_NEAR(layer_survival(1, c), std::exp(-0.5 * base), 1e-15);
    EXPECT_NEAR(layer_survival(2, c), std::exp(-0.75 * base), 1e-15);
    for (int k = 2; k < c.layers(); ++k) EXPECT_LT(layer_survival(k + 1, c), layer_survival(k, c));
    EXPECT_THROW(layer_survival(0, c), std::out_of_range);
    EXPECT_THROW(layer_survival(c.layers() + 1, c), std::out_of_range);
}

TEST(LossRate, ProductOfLayerSurvivals) {
    for (int levels : {1, 4, 10, 20})
        for (double x : {0.01, 0.5, 2.0}) {
            const auto c = planar(levels, x);
            double prod = 1.0;
            for (int k = 1; k <= c.layers(); ++k) prod *= layer_survival(k, c);
            EXPECT_NEAR(prod, 1.0 - loss_rate(c), 1e-12) << levels << " " << x;
        }
}

TEST(LossRate, TenPercentTransmission) {
    // 3 r R rho / 4 = ln 10 with r << d
    const auto c = planar(20, 4.0 * std::log(10.0) / 3.0);
    EXPECT_NEAR(loss_rate(c), 0.9, 1e-5);
}

TEST(LossRate, IndependentOfTelescopeSizeForSmallParticles) {
    const auto a = planar(10, 1.5);
    auto b = a;
    b.d *= 2.0;
    EXPECT_NEAR(loss_rate(b), loss_rate(a), 0.01 * loss_rate(a));
}

TEST(VarianceBound, SmallestTreeAndScaling) {
    const auto c = planar(1, 0.4);
    EXPECT_NEAR(variance_bound(c), 2.0 * (1.0 - loss_rate(c)) / 2.0, 1e-15);
    const auto big = planar(12, 0.4), bigger = planar(13, 0.4);
    const double ratio = variance_bound(bigger) / variance_bound(big);
    EXPECT_NEAR(ratio, 0.5 * 14.0 / 13.0 * (1.0 - loss_rate(bigger)) / (1.0 - loss_rate(big)), 1e-12);
}

TEST(VarianceBound, ConeAtTenMillion) {
    DustModelConfig c;
    c.r = 1e-9;
    c.d = 1e-2;
    c.R = 1.0;
    c.dims = 3;
    // choose rho so that 1 - p_loss = 0.1
    const double x = std::log(10.0) / (0.75 - c.r / (4.0 * c.d));
    c.rho_N = x / (c.r * c.R);
    EXPECT_NEAR(1.0 - loss_rate(c), 0.1, 1e-9);
    EXPECT_NEAR(std::sqrt(variance_bound(c)), 2.2e-7, 0.05e-7);
}

TEST(SimulateTree, ClearSkyKeepsEveryPath) {
    const auto c = planar(10, 0.0);
    RngStream rng(1);
    const auto t = simulate_tree(c, rng);
    EXPECT_DOUBLE_EQ(t.unblocked_fraction, 1.0);
    for (auto b : t.blocked_per_layer) EXPECT_EQ(b, 0u);
}

TEST(SimulateTree, MeanMatchesClosedForm) {
    const auto c = planar(10, 1.0);
    const auto st = run_trials(c, 20000, 5);
    EXPECT_NEAR(st.mean(), 1.0 - loss_rate(c), 3.0 * st.standard_error());
    EXPECT_LE(st.variance(), variance_bound(c));
}

TEST(SimulateTree, VarianceBoundHoldsAcrossConfigs) {
    RngStream pick(9);
    for (int i = 0; i < 10; ++i) {
        const int levels = 2 + static_cast<int>(pick.uniform() * 15);
        const double x = 0.05 + 3.0 * pick.uniform();
        const auto c = planar(levels, x);
        const auto st = run_trials(c, 10000, 100 + i);
        EXPECT_LE(st.variance(), variance_bound(c)) << "levels=" << levels << " x=" << x;
        EXPECT_NEAR(st.mean(), 1.0 - loss_rate(c), 4.0 * st.standard_error() + 1e-12);
    }
}

TEST(SimulateTree, ConeSpotCheck) {
    auto c = planar(5, 0.8);
    c.dims = 3;
    // the 4-ary tree reuses the planar layer survivals, so only the mean is checked
    const auto st = run_trials(c, 20000, 6);
    EXPECT_NEAR(st.mean(), 1.0 - loss_rate(c), 3.0 * st.standard_error());
}

TEST(SimulateTree, BlockedCountsAreConsistent) {
    const auto c = planar(8, 1.2);
    RngStream rng(3);
    const auto t = simulate_tree(c, rng);
    // survivors at the leaves = 2^8 * fraction; every lost path was blocked at exactly one layer
    std::uint64_t alive = 1;
    for (std::size_t k = 0; k < t.blocked_per_layer.size(); ++k) {
        if (k > 0) alive *= 2;
        ASSERT_LE(t.blocked_per_layer[k], alive);
        alive -= t.blocked_per_layer[k];
    }
    EXPECT_DOUBLE_EQ(static_cast<double>(alive) / 256.0, t.unblocked_fraction);
}

TEST(SimulateTree, Rejections) {
    RngStream rng(1);
    auto c = planar(4, 0.1);
    c.d = 3.0 * c.r;
    EXPECT_THROW(simulate_tree(c, rng), std::invalid_argument);
    EXPECT_THROW(simulate_tree(planar(21, 0.1), rng), std::invalid_argument);
    auto cone = planar(11, 0.1);
    cone.dims = 3;
    EXPECT_THROW(simulate_tree(cone, rng), std::invalid_argument);
    auto bad = planar(4, 0.1);
    bad.dims = 4;
    EXPECT_THROW(loss_rate(bad), std::invalid_argument);
    bad = planar(4, 0.1);
    bad.d = 0.5 * bad.r;
    EXPECT_THROW(loss_rate(bad), std::invalid_argument);
}

TEST(CoherenceOffdiag, SmallSpreadExpansion) {
    EXPECT_DOUBLE_EQ(coherence_offdiag(0.0), 0.5);
    EXPECT_NEAR(coherence_offdiag(0.1), 0.49, 1e-3);
    for (double s : {0.02, 0.05, 0.1, 0.15}) {
        const double diff = std::abs(coherence_offdiag(s) - (0.5 - s * s));
        EXPECT_LE(diff, 4.0 * std::pow(s, 4)) << "sigma=" << s;
    }
}

TEST(CoherenceOffdiag, MonteCarloOracle) {
    const double sigma = 0.3;
    RngStream rng(12);
    harness::RunningStats st;
    while (st.count() < 1000000) {
        const double s = rng.normal(0.5, sigma);
        if (s < 0.0 || s > 1.0) continue;
        st.add(std::sqrt(s * (1.0 - s)));
    }
    EXPECT_NEAR(coherence_offdiag(sigma), st.mean(), 4.0 * st.standard_error());
}

TEST(CoherenceOffdiag, DecreasesWithSpread) {
    double prev = 0.5;
    for (double s = 0.05; s <= 0.7; s += 0.05) {
        const double g = coherence_offdiag(s);
        EXPECT_LT(g, prev);
        prev = g;
    }
    EXPECT_THROW(coherence_offdiag(0.8), std::invalid_argument);
    EXPECT_THROW(coherence_offdiag(-0.1), std::invalid_argument);
}
