#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "lensq/harness/experiments.hpp"
#include "lensq/undersampling.hpp"

using namespace lensq;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Probability that round(N(0, 1/2)) equals b.
double band_probability(int b) {
    auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    const double sd = 1.0 / std::sqrt(2.0);
    return Phi((b + 0.5) / sd) - Phi((b - 0.5) / sd);
}

// Brute-force pmf: every integer L near the band centre contributes to residue class -L mod n_s.
std::vector<double> brute_pmf(double delta_t, double omega_carrier, const UndersampleSpec& spec,
                              const WavePacketSpec& packet, double gamma) {
    const double centre = omega_carrier * spec.span / two_pi;
    const double sigma = spec.span / (two_pi * packet.tc * std::sqrt(2.0));
    std::vector<double> p(static_cast<std::size_t>(spec.n_s), 0.0);
    const auto lo = static_cast<long long>(std::floor(centre - 12.0 * sigma));
    const auto hi = static_cast<long long>(std::ceil(centre + 12.0 * sigma));
    for (long long L = lo; L <= hi; ++L) {
        const double z = (static_cast<double>(L) - centre) / sigma;
        const double w = std::exp(-0.5 * z * z) * (1.0 + gamma * std::cos(two_pi * static_cast<double>(L) * delta_t / spec.span));
        long long k = (-L) % spec.n_s;
        if (k < 0) k += spec.n_s;
        p[static_cast<std::size_t>(k)] += w;
    }
    double total = 0.0;
    for (double v : p) total += v;
    for (double& v : p) v /= total;
    return p;
}

}  // namespace

TEST(UndersampleSpec, DefaultCoversTwiceTheWindow) {
    const auto s = make_undersample_spec(WavePacketSpec{1e3, 1.0, 1e4});
    EXPECT_EQ(s.n_s, 200000);
    EXPECT_DOUBLE_EQ(s.span, 2e4);
    EXPECT_DOUBLE_EQ(s.tau_s, 0.1);
    EXPECT_DOUBLE_EQ(s.band_width, 1.0);
    EXPECT_NO_THROW(s.validate());
}

TEST(UndersampleSpec, Rejections) {
    const WavePacketSpec p{1e3, 1.0, 100.0};
    EXPECT_THROW(make_undersample_spec(p, 0), std::invalid_argument);
    EXPECT_THROW(make_undersample_spec(p, 10, 0.5), std::invalid_argument);
    EXPECT_THROW(make_undersample_spec(p, 10, 1.00037), std::invalid_argument);
    UndersampleSpec bad{100, 0.1, 11.0, 1.0, 10};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(AliasFrequency, WorkedExamples) {
    // span 20 s over 200 bins: sampling rate 10 Hz
    const auto s = make_undersample_spec(WavePacketSpec{100.0, 1.0, 10.0});
    const auto d = alias_decompose(two_pi * 123.4, s);
    EXPECT_EQ(d.multiple, 12);
    EXPECT_NEAR(d.f_alias, 3.4, 1e-10);
    const auto e = alias_decompose(two_pi * 50.0, s);
    EXPECT_EQ(e.multiple, 5);
    EXPECT_NEAR(e.f_alias, 0.0, 1e-12);
    EXPECT_NEAR(alias_frequency(two_pi * 9.99, s), 9.99, 1e-12);
    EXPECT_THROW(alias_frequency(-1.0, s), std::invalid_argument);
}

TEST(AliasFrequency, FoldsIntoBaseBand) {
    const auto s = make_undersample_spec(WavePacketSpec{1e3, 1.0, 1e4});
    const double rate = static_cast<double>(s.n_s) / s.span;
    RngStream rng(2);
    for (int i = 0; i < 1000; ++i) {
        const double omega = 1e15 * (1.0 + rng.uniform());
        const auto d = alias_decompose(omega, s);
        ASSERT_GE(d.f_alias, 0.0);
        ASSERT_LT(d.f_alias, rate);
        const double f = omega / two_pi;
        EXPECT_NEAR((f - d.f_alias) / rate, static_cast<double>(d.multiple), 1e-3);
    }
}

TEST(AliasedPmf, ZeroDelayIsTheEnvelope) {
    const WavePacketSpec p{50.0, 1.0, 20.0};
    const auto s = make_undersample_spec(p);
    const auto pmf = aliased_pmf(0.0, p.omega0, s, p, 0.0);
    const auto ref = brute_pmf(0.0, p.omega0, s, p, 0.0);
    for (std::size_t k = 0; k < pmf.size(); ++k) EXPECT_NEAR(pmf[k], ref[k], 1e-12);
}

TEST(AliasedPmf, MatchesTwoSpikeDft) {
    // delay a whole number m of bins: the fringe is the DFT of two register spikes
    const WavePacketSpec p{50.0, 1.0, 20.0};
    const auto s = make_undersample_spec(p);
    const std::int64_t m = 73;
    const double dt = static_cast<double>(m) * s.tau_s;
    const double A = 1.34, g = gamma_factor(A);
    // amplitudes with 2ab / (a^2 + b^2) = g
    const double a = std::sqrt((1.0 + std::sqrt(1.0 - g * g)) / 2.0), b = std::sqrt(1.0 - a * a);
    const auto env = brute_pmf(0.0, p.omega0, s, p, 0.0);
    std::vector<double> ref(env.size());
    double total = 0.0;
    for (std::int64_t k = 0; k < s.n_s; ++k) {
        std::complex<double> amp = a;
        amp += b * std::polar(1.0, two_pi * static_cast<double>(k * m % s.n_s) / static_cast<double>(s.n_s));
        ref[static_cast<std::size_t>(k)] = env[static_cast<std::size_t>(k)] * std::norm(amp);
        total += ref[static_cast<std::size_t>(k)];
    }
    const auto pmf = aliased_pmf(dt, p.omega0, s, p, g);
    for (std::size_t k = 0; k < pmf.size(); ++k) EXPECT_NEAR(pmf[k], ref[k] / total, 1e-10) << k;
}

TEST(AliasedPmf, AgreesWithBruteForceOffGrid) {
    const WavePacketSpec p{50.0, 1.0, 20.0};
    const auto s = make_undersample_spec(p);
    for (double dt : {5.0, 7.3456, 14.9})
        for (int band : {-2, 0, 1}) {
            const double wc = p.omega0 + band * s.band_width;
            const auto pmf = aliased_pmf(dt, wc, s, p, 0.6655);
            const auto ref = brute_pmf(dt, wc, s, p, 0.6655);
            for (std::size_t k = 0; k < pmf.size(); ++k) ASSERT_NEAR(pmf[k], ref[k], 1e-10);
        }
}

TEST(AliasedPmf, NormalisedAndRangeChecked) {
    const WavePacketSpec p{50.0, 1.0, 20.0};
    const auto s = make_undersample_spec(p);
    const auto pmf = aliased_pmf(9.1, p.omega0, s, p, 1.0);
    double total = 0.0;
    for (double v : pmf) {
        EXPECT_GE(v, 0.0);
        total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_THROW(aliased_pdf(-1, 9.1, p.omega0, s, p), std::out_of_range);
    EXPECT_THROW(aliased_pdf(s.n_s, 9.1, p.omega0, s, p), std::out_of_range);
    EXPECT_DOUBLE_EQ(aliased_pdf(17, 9.1, p.omega0, s, p), pmf[17]);
}

TEST(AliasedPmf, PointMassesTrackTheContinuousDensity) {
    // each index carries the continuous pdf integrated over its frequency cell
    const WavePacketSpec p{50.0, 1.0, 100.0};
    const auto s = make_undersample_spec(p);
    const LensSignalSpec lens{6.0, 1.34, 0.0, 1.0};
    const auto pmf = aliased_pmf(lens.delta_t, p.omega0, s, p, gamma_factor(lens.A));
    const detail::AliasFrame f(p, s);
    const double cell = two_pi / s.span;
    double worst = 0.0, peak = 0.0;
    for (std::int64_t ell = -150; ell <= 150; ++ell) {
        const double d = f.detuning(ell);
        const int n = 64;
        double mass = 0.0;
        for (int i = 0; i < n; ++i) mass += channel_pdf_detuned(d + cell * ((i + 0.5) / n - 0.5), p, lens);
        mass *= cell / n;
        const double got = pmf[static_cast<std::size_t>(f.k_of(ell))];
        worst = std::max(worst, std::abs(got - mass));
        peak = std::max(peak, mass);
    }
    EXPECT_LT(worst, 0.02 * peak);
}

TEST(AliasedPmf, RegisterSpanningTIsMirrorSymmetric) {
    const WavePacketSpec p{50.0, 1.0, 20.0};
    const auto narrow = make_undersample_spec(p, 10, 1.0);
    const auto wide = make_undersample_spec(p, 10, 2.0);
    const double dt = 7.3, mirror = p.T - dt;
    const auto a = aliased_pmf(dt, p.omega0, narrow, p, 1.0);
    const auto b = aliased_pmf(mirror, p.omega0, narrow, p, 1.0);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);

    const auto c = aliased_pmf(dt, p.omega0, wide, p, 1.0);
    const auto d = aliased_pmf(mirror, p.omega0, wide, p, 1.0);
    double diff = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) diff = std::max(diff, std::abs(c[k] - d[k]));
    EXPECT_GT(diff, 1e-3);
}

class AliasedHistogram : public ::testing::TestWithParam<double> {};

TEST_P(AliasedHistogram, MatchesBandMixture) {
    const double Q = GetParam();
    const WavePacketSpec p{50.0, 1.0, 20.0};
    const auto s = make_undersample_spec(p);
    const LensSignalSpec lens{7.3456, kInf, 0.0, Q};
    std::vector<double> expected(static_cast<std::size_t>(s.n_s), 0.0);
    for (int b = -6; b <= 6; ++b) {
        const double wc = p.omega0 + b * s.band_width;
        const auto sig = aliased_pmf(lens.delta_t, wc, s, p, 1.0);
        const auto bg = aliased_pmf(lens.delta_t, wc, s, p, 0.0);
        for (std::size_t k = 0; k < expected.size(); ++k)
            expected[k] += band_probability(b) * (Q * sig[k] + (1.0 - Q) * bg[k]);
    }
    RngStream rng(77, static_cast<std::uint64_t>(Q * 10));
    const std::size_t n = 200000;
    std::vector<double> counts(expected.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) counts[static_cast<std::size_t>(sample_aliased(p, lens, s, rng).k)] += 1.0;
    double chi2 = 0.0;
    int dof = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double e = expected[k] * n;
        if (e < 5.0) continue;
        chi2 += (counts[k] - e) * (counts[k] - e) / e;
        ++dof;
    }
    ASSERT_GT(dof, 30);
    EXPECT_LT(chi2 / dof, 1.5) << "chi2=" << chi2 << " dof=" << dof;
}

INSTANTIATE_TEST_SUITE_P(SignalFractions, AliasedHistogram, ::testing::Values(0.0, 1.0));

TEST(AliasedSampler, MeanCosineAtDelay) {
    const WavePacketSpec p{200.0, 1.0, 200.0};
    const auto s = make_undersample_spec(p);
    const LensSignalSpec lens{57.3, 1.34, 0.0, 1.0};
    RngStream rng(9);
    const std::size_t n = 200000;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = sample_aliased(p, lens, s, rng);
        sum += std::cos(photon_phase(p.omega0, alias_detuning(a, s, p), lens.delta_t));
    }
    EXPECT_NEAR(sum / n, gamma_factor(lens.A) / 2.0, 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(QuantizePhoton, LandsOnTheNearestIndex) {
    const WavePacketSpec p{1e3, 1.0, 1e3};
    const auto s = make_undersample_spec(p);
    RngStream rng(10);
    const double cell = two_pi / s.span;
    for (int i = 0; i < 500; ++i) {
        const PhotonSample ph{detail::draw_detuning(p, rng), PhotonOrigin::signal};
        const auto q = quantize_photon(ph, s, p);
        EXPECT_LE(std::abs(alias_detuning(q, s, p) - ph.detuning), 0.5 * cell * (1.0 + 1e-6));
        EXPECT_LE(std::abs(q.omega_carrier - p.omega0 - ph.detuning), 0.5 * s.band_width + 1e-12);
    }
}

TEST(Alg2, PairedPhotonsGiveTheSameDelay) {
    const WavePacketSpec p{1e3, 1.0, 1e3};
    const auto s = make_undersample_spec(p);
    const double A = 1.34;
    const std::size_t n = 2 * required_photons(p.window_ratio(), 1.0, A, 0.95);
    const std::size_t trials = 200;
    std::size_t agree = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        RngStream rng(55, t);
        const LensSignalSpec lens{5.0 + (p.T - 10.0) * rng.uniform(), A, 0.0, 1.0};
        const auto photons = sample_photons(n, p, lens, rng);
        std::vector<AliasedSample> q;
        for (const auto& ph : photons) q.push_back(quantize_photon(ph, s, p));
        const auto r1 = estimate_alg1(photons, p, 1.0, A);
        const auto r2 = estimate_alg2(q, p, s, 1.0, A);
        agree += std::abs(r1.tau_hat - r2.tau_hat) <= p.tc ? 1 : 0;
    }
    EXPECT_GE(static_cast<double>(agree) / trials, 0.95);
}

TEST(Alg2, ConfidenceIntervalsOverlapAlg1) {
    harness::ExperimentConfig cfg;
    cfg.packet = WavePacketSpec{1e3, 1.0, 300.0};
    cfg.Q = 0.5;
    cfg.trials = 100;
    cfg.seed = 12;
    cfg.n_sig = {60.0, 120.0, 200.0};
    const auto rows = harness::run_alg2_compare(cfg);
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) EXPECT_TRUE(r.overlap) << "n_sig=" << r.alg1.n_sig;
}

TEST(Alg2, RejectsEmptyInput) {
    const WavePacketSpec p{1e3, 1.0, 100.0};
    const auto s = make_undersample_spec(p);
    EXPECT_THROW(estimate_alg2({}, p, s, 1.0, 1.34), std::invalid_argument);
}
