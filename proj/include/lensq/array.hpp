#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lensq/estimators.hpp"
#include "lensq/signal_model.hpp"

namespace lensq {

/// N telescope sites sharing one photon. Site 0 is the reference: its delay is
/// zero and its coherence phase is one.
struct ArraySpec {
    std::vector<double> delays;                    ///< per-site delay, s
    std::vector<std::complex<double>> coherence;   ///< unit-modulus phase per site

    std::size_t N() const { return delays.size(); }
    std::size_t pairs() const { return N() * (N() - 1) / 2; }

    static ArraySpec in_phase(std::vector<double> delays) {
        ArraySpec a;
        a.coherence.assign(delays.size(), {1.0, 0.0});
        a.delays = std::move(delays);
        return a;
    }

    void validate(const WavePacketSpec& packet) const {
        packet.validate();
        if (N() < 2) throw std::invalid_argument("array: at least two sites are required");
        if (coherence.size() != N()) throw std::invalid_argument("array: one coherence phase per site");
        if (delays[0] != 0.0) throw std::invalid_argument("array: the reference site must have zero delay");
        if (coherence[0] != std::complex<double>(1.0, 0.0))
            throw std::invalid_argument("array: the reference site must have unit coherence");
        for (const auto& g : coherence)
            if (std::abs(std::abs(g) - 1.0) > 1e-12) throw std::invalid_argument("array: coherences must be unit modulus");
        for (std::size_t i = 0; i < N(); ++i) {
            if (delays[i] < 0.0 || delays[i] > packet.T) throw std::invalid_argument("array: delays must lie in [0, T]");
            for (std::size_t j = 0; j < i; ++j)
                if (std::abs(delays[i] - delays[j]) < 3.0 * packet.tc)
                    throw std::invalid_argument("array: delays must differ pairwise by at least 3 tc");
        }
    }
};

namespace detail {

/// sum_{i<j} cos(omega (t_j - t_i) + arg g_j - arg g_i), with omega = omega0 + detuning.
inline double array_cross_sum(double detuning, const ArraySpec& arr, double omega0) {
    double s = 0.0;
    for (std::size_t j = 1; j < arr.N(); ++j)
        for (std::size_t i = 0; i < j; ++i) {
            const double lag = arr.delays[j] - arr.delays[i];
            double phase = reduce_product(omega0, lag) + detuning * lag;
            const double dphi = std::arg(arr.coherence[j]) - std::arg(arr.coherence[i]);
            if (dphi != 0.0) phase += dphi;
            s += std::cos(phase);
        }
    return s;
}

}  // namespace detail

/// Density of the measured frequency, envelope * |sum_i g_i e^{i omega t_i}|^2 / N.
inline double array_channel_pdf(double omega, const ArraySpec& arr, const WavePacketSpec& packet) {
    const double n = static_cast<double>(arr.N());
    const double d = omega - packet.omega0;
    return envelope_density(d, packet) * (n + 2.0 * detail::array_cross_sum(d, arr, packet.omega0)) / n;
}

/// Draws one photon by rejection from the envelope; the acceptance
/// |sum g e^{i omega t}|^2 / N^2 is at most one.
template <RandomSource Rng>
PhotonSample sample_array_photon(const ArraySpec& arr, const WavePacketSpec& packet, Rng& rng) {
    const double n = static_cast<double>(arr.N());
    for (;;) {
        const double d = detail::draw_detuning(packet, rng);
        const double accept = (n + 2.0 * detail::array_cross_sum(d, arr, packet.omega0)) / (n * n);
        if (rng.uniform() < accept) return {d, PhotonOrigin::signal};
    }
}

template <RandomSource Rng>
std::vector<PhotonSample> sample_array_photons(std::size_t count, const ArraySpec& arr, const WavePacketSpec& packet,
                                               Rng& rng) {
    arr.validate(packet);
    std::vector<PhotonSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_array_photon(arr, packet, rng));
    return out;
}

struct DelayPeak {
    double tau = 0.0;
    double score = 0.0;
    std::size_t multiplicity = 1;  ///< how many site pairs share this delay
    bool detected = false;
};

struct PairwiseDelayEstimate {
    std::vector<DelayPeak> peaks;   ///< strongest first
    double threshold = 0.0;
    double expected_pair_peak = 0.0;
    bool complete = false;          ///< every pair accounted for by a detected peak
    std::string warning;
    std::optional<std::vector<double>> scores;

    /// Detected delays, each repeated by its multiplicity.
    std::vector<double> delays() const {
        std::vector<double> out;
        for (const auto& p : peaks)
            if (p.detected) out.insert(out.end(), p.multiplicity, p.tau);
        return out;
    }
};

/// Finds the N(N-1)/2 delay differences as separated score peaks. Each pair
/// contributes about n/N to the score at its delay; peaks at least half of that
/// count as detected, and a peak's multiplicity is its score in units of n/N.
inline PairwiseDelayEstimate estimate_pairwise_delays(std::span<const PhotonSample> samples,
                                                      const WavePacketSpec& packet, std::size_t N,
                                                      bool keep_trace = false,
                                                      PhasorMethod method = PhasorMethod::automatic) {
    if (samples.empty()) throw std::invalid_argument("estimate_pairwise_delays: no samples");
    if (N < 2) throw std::invalid_argument("estimate_pairwise_delays: N must be at least 2");
    const CandidateGrid grid = build_grid(packet);
    auto scores = score_alg1(grid, samples, method);

    PairwiseDelayEstimate est;
    const double n = static_cast<double>(samples.size());
    est.expected_pair_peak = n / static_cast<double>(N);
    est.threshold = 0.5 * est.expected_pair_peak;
    const std::size_t wanted = N * (N - 1) / 2;

    std::vector<std::size_t> best_fine(grid.coarse, 0);
    std::vector<double> coarse_score(grid.coarse);
    for (std::size_t i = 0; i < grid.coarse; ++i) {
        for (std::size_t k = 1; k < grid.fine; ++k)
            if (scores[i * grid.fine + k] > scores[i * grid.fine + best_fine[i]]) best_fine[i] = k;
        coarse_score[i] = scores[i * grid.fine + best_fine[i]];
    }
    std::vector<char> suppressed(grid.coarse, 0);
    std::size_t accounted = 0;
    while (est.peaks.size() < wanted) {
        std::size_t best = grid.coarse;
        for (std::size_t i = 0; i < grid.coarse; ++i)
            if (!suppressed[i] && (best == grid.coarse || coarse_score[i] > coarse_score[best])) best = i;
        if (best == grid.coarse) break;
        // neighbours within 3 tc cannot be a different pair
        const std::size_t lo = best >= 3 ? best - 3 : 0;
        const std::size_t hi = std::min(grid.coarse - 1, best + 3);
        for (std::size_t i = lo; i <= hi; ++i) suppressed[i] = 1;

        DelayPeak p;
        p.tau = grid.tau(best, best_fine[best]);
        p.score = coarse_score[best];
        p.detected = p.score >= est.threshold;
        p.multiplicity =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(p.score / est.expected_pair_peak)));
        if (p.detected) accounted += p.multiplicity;
        est.peaks.push_back(p);
        if (accounted >= wanted) break;
    }
    est.complete = accounted >= wanted;
    if (!est.complete)
        est.warning = "only " + std::to_string(accounted) + " of " + std::to_string(wanted) +
                      " pairwise delays rose above the threshold";
    if (keep_trace) est.scores = std::move(scores);
    return est;
}

}  // namespace lensq
