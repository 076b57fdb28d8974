#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lensq/phasor_sum.hpp"
#include "lensq/signal_model.hpp"

namespace lensq {

/// Candidate delays tau(i, k) = (first + i) * tc + k * 2π / (fine * omega0).
/// Candidates are ordered by i first and k second, which is increasing tau.
struct CandidateGrid {
    double omega0 = 0.0;
    double tc = 0.0;
    long first = 5;            ///< index of the first coarse candidate, in units of tc
    std::size_t coarse = 0;    ///< number of coarse candidates
    std::size_t fine = 10;     ///< carrier-phase offsets per coarse candidate

    std::size_t size() const { return coarse * fine; }
    double start() const { return static_cast<double>(first) * tc; }
    double fine_offset(std::size_t k) const {
        return two_pi * static_cast<double>(k) / (static_cast<double>(fine) * omega0);
    }
    double tau(std::size_t i, std::size_t k) const {
        return static_cast<double>(first + static_cast<long>(i)) * tc + fine_offset(k);
    }
    double tau(std::size_t flat) const { return tau(flat / fine, flat % fine); }
};

inline CandidateGrid build_grid(const WavePacketSpec& packet, std::size_t fine = 10) {
    packet.validate();
    if (fine == 0) throw std::invalid_argument("build_grid: at least one fine offset is required");
    CandidateGrid g;
    g.omega0 = packet.omega0;
    g.tc = packet.tc;
    g.first = 5;
    // small tolerance so that T/tc = 10000 is not truncated to 9999 by rounding
    const long last = static_cast<long>(std::floor(packet.T / packet.tc * (1.0 + 1e-12))) - 5;
    if (last < g.first) throw std::invalid_argument("build_grid: window too short");
    g.coarse = static_cast<std::size_t>(last - g.first + 1);
    g.fine = fine;
    return g;
}

struct EstimationResult {
    double tau_hat = 0.0;
    double peak_score = 0.0;
    double threshold = 0.0;
    bool detected = false;
    std::size_t index = 0;                 ///< flat candidate index of tau_hat
    std::optional<std::vector<double>> scores;
};

/// A flare's photons and the delay they were simulated with.
struct FlareBatch {
    std::vector<PhotonSample> samples;
    double true_delta_t = 0.0;
};

namespace detail {

/// Per-photon phase increment and starting phasors for the grid.
/// `freq_phase(t)` must return nu_j * t reduced modulo 2π for photon j.
struct GridPhasors {
    std::vector<double> step;
    std::vector<std::complex<double>> start;
};

inline GridPhasors grid_phasors(const CandidateGrid& grid, std::span<const PhotonSample> samples) {
    GridPhasors p;
    const std::size_t K = grid.fine;
    p.step.resize(samples.size());
    p.start.resize(samples.size() * K);
    const double step0 = reduce_product(grid.omega0, grid.tc);
    const double start0 = reduce_product(grid.omega0, grid.start());
    for (std::size_t j = 0; j < samples.size(); ++j) {
        const double d = samples[j].detuning;
        p.step[j] = step0 + d * grid.tc;
        const double base = start0 + d * grid.start();
        for (std::size_t k = 0; k < K; ++k) {
            // omega0 times the fine offset is exactly 2πk/K
            const double ph = base + two_pi * static_cast<double>(k) / static_cast<double>(K) + d * grid.fine_offset(k);
            p.start[j * K + k] = {std::cos(ph), std::sin(ph)};
        }
    }
    return p;
}

/// Complex sums S(i, k) = sum_j exp(i nu_j tau(i, k)), laid out [i * K + k].
inline std::vector<std::complex<double>> grid_sums(const CandidateGrid& grid, const GridPhasors& p,
                                                   PhasorMethod method) {
    std::vector<std::complex<double>> raw(grid.coarse * grid.fine);
    PhasorSumRequest req{p.step, p.start, grid.fine, grid.coarse};
    phasor_sums(req, raw, method);
    std::vector<std::complex<double>> out(raw.size());
    for (std::size_t k = 0; k < grid.fine; ++k)
        for (std::size_t i = 0; i < grid.coarse; ++i) out[i * grid.fine + k] = raw[k * grid.coarse + i];
    return out;
}

inline EstimationResult pick_peak(const CandidateGrid& grid, std::vector<double> scores, double threshold,
                                  bool keep_trace) {
    EstimationResult r;
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c)
        if (scores[c] > scores[best]) best = c;  // strict: ties keep the smaller tau
    r.index = best;
    r.tau_hat = grid.tau(best);
    r.peak_score = scores[best];
    r.threshold = threshold;
    r.detected = r.peak_score >= threshold;
    if (keep_trace) r.scores = std::move(scores);
    return r;
}

}  // namespace detail

/// Score sum_j cos(nu_j tau) at every candidate, laid out [i * fine + k].
inline std::vector<double> score_alg1(const CandidateGrid& grid, std::span<const PhotonSample> samples,
                                      PhasorMethod method = PhasorMethod::automatic) {
    if (samples.empty()) throw std::invalid_argument("score_alg1: no samples");
    const auto sums = detail::grid_sums(grid, detail::grid_phasors(grid, samples), method);
    std::vector<double> s(sums.size());
    for (std::size_t c = 0; c < sums.size(); ++c) s[c] = sums[c].real();
    return s;
}

/// Detection threshold n Q gamma / 4, half of the expected peak score.
inline double alg1_threshold(std::size_t n, double Q, double A) {
    return static_cast<double>(n) * Q * gamma_factor(A) / 4.0;
}

inline EstimationResult estimate_alg1(std::span<const PhotonSample> samples, const WavePacketSpec& packet, double Q,
                                      double A, bool keep_trace = false,
                                      PhasorMethod method = PhasorMethod::automatic) {
    if (samples.empty()) throw std::invalid_argument("estimate_alg1: no samples");
    const CandidateGrid grid = build_grid(packet);
    return detail::pick_peak(grid, score_alg1(grid, samples, method), alg1_threshold(samples.size(), Q, A),
                             keep_trace);
}

/// Combined score G(tau) = sum_i |sum_j exp(i nu_ij tau)|^2.
inline std::vector<double> multiflare_scores(std::span<const FlareBatch> batches, const CandidateGrid& grid,
                                             PhasorMethod method = PhasorMethod::automatic) {
    if (batches.empty()) throw std::invalid_argument("multiflare_scores: no flares");
    std::vector<double> G(grid.size(), 0.0);
    for (const auto& b : batches) {
        if (b.samples.empty()) throw std::invalid_argument("multiflare_scores: empty flare");
        const auto sums = detail::grid_sums(grid, detail::grid_phasors(grid, b.samples), method);
        for (std::size_t c = 0; c < sums.size(); ++c) G[c] += std::norm(sums[c]);
    }
    return G;
}

inline double multiflare_threshold(std::size_t flares, double n_per_flare, double n_sig, double A) {
    const double g = gamma_factor(A);
    const double m = static_cast<double>(flares);
    return m * n_per_flare + m * g * g * (n_sig * n_sig - n_sig) / 8.0;
}

/// Multi-flare estimate on the coarse grid. |S|^2 does not depend on the carrier
/// phase, so the fine offsets would only repeat each coarse value.
inline EstimationResult estimate_multiflare(std::span<const FlareBatch> batches, const WavePacketSpec& packet,
                                            double Q, double A, double n_per_flare, bool keep_trace = false,
                                            PhasorMethod method = PhasorMethod::automatic) {
    const double n_sig = n_per_flare * Q;
    if (n_sig < 2.0) throw std::invalid_argument("estimate_multiflare: insufficient photons per flare (n*Q < 2)");
    const CandidateGrid grid = build_grid(packet, 1);
    return detail::pick_peak(grid, multiflare_scores(batches, grid, method),
                             multiflare_threshold(batches.size(), n_per_flare, n_sig, A), keep_trace);
}

/// Scanning Mach-Zehnder baseline: one setting per coarse candidate, the photon
/// budget split evenly, and the setting with the largest port imbalance reported.
/// Detection uses a Hoeffding union bound over settings at the given confidence.
template <RandomSource Rng>
EstimationResult mz_scan_estimate(const WavePacketSpec& packet, const LensSignalSpec& lens, std::size_t budget,
                                  Rng& rng, double confidence = 0.95) {
    if (budget == 0) throw std::invalid_argument("mz_scan_estimate: photon budget must be positive");
    lens.validate(packet);
    const CandidateGrid grid = build_grid(packet, 1);
    const std::size_t S = grid.coarse;
    const std::size_t base = budget / S, extra = budget % S;
    std::vector<double> bias(S, 0.0);
    std::vector<std::size_t> counts(S, 0);
    for (std::size_t i = 0; i < S; ++i) {
        const double tau = grid.tau(i, 0);
        const double s = lens.delta_t - tau;
        double p1 = 0.5;
        if (std::abs(s) <= packet.tc)
            p1 = 0.5 * (1.0 + std::cos(reduce_product(packet.omega0, s)) *
                                  std::exp(-s * s / (4.0 * packet.tc * packet.tc)));
        const std::size_t n = base + (i < extra ? 1 : 0);
        counts[i] = n;
        long imbalance = 0;
        for (std::size_t j = 0; j < n; ++j) imbalance += rng.uniform() < p1 ? 1 : -1;
        bias[i] = std::abs(static_cast<double>(imbalance));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < S; ++i)
        if (bias[i] > bias[best]) best = i;
    EstimationResult r;
    r.index = best;
    r.tau_hat = grid.tau(best, 0);
    r.peak_score = bias[best];
    const double n = static_cast<double>(counts[best]);
    r.threshold = std::sqrt(2.0 * n * std::log(2.0 * static_cast<double>(S) / (1.0 - confidence)));
    r.detected = counts[best] > 0 && r.peak_score > 0.0 && r.peak_score >= r.threshold;
    return r;
}

/// Photon count that the union and Hoeffding bounds certify at the given confidence:
/// ceil(32 / (Q^2 gamma^2) * ln(10 (T/tc) / (1 - confidence))).
inline std::size_t required_photons(double T_over_tc, double Q, double A, double confidence) {
    if (!(T_over_tc >= 10.0)) throw std::domain_error("required_photons: T/tc must be >= 10");
    if (!(Q > 0.0 && Q <= 1.0)) throw std::domain_error("required_photons: Q must lie in (0, 1]");
    if (!(confidence > 0.0 && confidence < 1.0)) throw std::domain_error("required_photons: confidence in (0,1)");
    const double g = gamma_factor(A);
    if (g <= 0.0) throw std::domain_error("required_photons: no fringe (A = 1)");
    const double n = 32.0 / (Q * Q * g * g) * std::log(10.0 * T_over_tc / (1.0 - confidence));
    return static_cast<std::size_t>(std::ceil(n - 1e-9));
}

/// Sufficient flare count from the two-branch Bernstein bound.
inline std::size_t required_flares(double n_sig, double Q, double A, double T_over_tc, double confidence) {
    if (n_sig < 2.0) throw std::invalid_argument("required_flares: n_sig must be at least 2");
    if (!(Q > 0.0 && Q <= 1.0)) throw std::domain_error("required_flares: Q must lie in (0, 1]");
    if (!(confidence > 0.0 && confidence < 1.0)) throw std::domain_error("required_flares: confidence in (0,1)");
    const double g2 = gamma_factor(A) * gamma_factor(A);
    if (g2 <= 0.0) throw std::domain_error("required_flares: no fringe (A = 1)");
    const double log_term = std::log(T_over_tc / (1.0 - confidence));
    const double s = n_sig - 1.0;
    const double split = 32.0 / (Q * g2);
    const double m = s < split ? 512.0 / (Q * Q * g2 * g2 * s * s) * log_term : 16.0 / (Q * g2 * s) * log_term;
    return static_cast<std::size_t>(std::max(1.0, std::ceil(m - 1e-9)));
}

}  // namespace lensq
