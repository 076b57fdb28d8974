#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "lensq/estimators.hpp"
#include "lensq/signal_model.hpp"

namespace lensq {

/// Temporal discretisation of the stored photon. The register covers `span`
/// seconds in n_s bins. A span of exactly T cannot tell a delay d from T - d,
/// because the stored two-spike state only sees d modulo the span, so the
/// default covers 2T and the mirror image lands outside the search window.
struct UndersampleSpec {
    std::int64_t n_s = 0;    ///< number of temporal bins
    double tau_s = 0.0;      ///< bin width span / n_s, s
    double span = 0.0;       ///< time covered by the register, s
    double band_width = 0.0; ///< width of the carrier localisation band, rad/s
    int bins_per_tc = 10;

    void validate() const {
        if (n_s < 1 || !(tau_s > 0.0) || !(span > 0.0))
            throw std::invalid_argument("undersampling: n_s, tau_s and span must be positive");
        if (std::abs(static_cast<double>(n_s) * tau_s - span) > 1e-9 * span)
            throw std::invalid_argument("undersampling: span must equal n_s * tau_s");
    }
};

inline UndersampleSpec make_undersample_spec(const WavePacketSpec& packet, int bins_per_tc = 10,
                                             double span_over_T = 2.0) {
    packet.validate();
    if (bins_per_tc < 1) throw std::invalid_argument("undersampling: bins per tc must be positive");
    if (!(span_over_T >= 1.0)) throw std::invalid_argument("undersampling: the register must cover at least T");
    const double span = span_over_T * packet.T;
    const double exact = span / packet.tc * bins_per_tc;
    const double n = std::round(exact);
    if (std::abs(exact - n) > 1e-6 * std::max(1.0, exact))
        throw std::invalid_argument("undersampling: span / tau_s must be an integer");
    UndersampleSpec s;
    s.n_s = static_cast<std::int64_t>(n);
    s.span = span;
    s.tau_s = span / n;
    s.band_width = 1.0 / packet.tc;
    s.bins_per_tc = bins_per_tc;
    return s;
}

struct AliasDecomposition {
    std::int64_t multiple = 0;  ///< m in omega = 2π (f_alias + m / tau_s)
    double f_alias = 0.0;       ///< Hz, in [0, 1 / tau_s)
};

inline AliasDecomposition alias_decompose(double omega, const UndersampleSpec& spec) {
    spec.validate();
    if (!(omega > 0.0)) throw std::invalid_argument("alias_frequency: omega must be positive");
    const double rate = static_cast<double>(spec.n_s) / spec.span;
    const double f = omega / two_pi;
    const double q = std::floor(f / rate);
    double r = std::fma(-q, rate, f);
    AliasDecomposition d{static_cast<std::int64_t>(q), r};
    if (r < 0.0) {
        d.multiple -= 1;
        d.f_alias = r + rate;
    } else if (r >= rate * (1.0 - 1e-14)) {
        d.multiple += 1;
        d.f_alias = std::max(0.0, r - rate);
    }
    return d;
}

/// Carrier frequency folded into [0, n_s / span), Hz.
inline double alias_frequency(double omega, const UndersampleSpec& spec) {
    return alias_decompose(omega, spec).f_alias;
}

namespace detail {

/// omega * T / 2π minus the integer `ref`, kept accurate when the product is ~1e12.
inline double cycles_minus(double omega, double T, double ref) {
    const double p = omega * T;
    const double pe = std::fma(omega, T, -p);
    const double q = p / two_pi;
    const double r = std::fma(-q, two_pi, p) + pe - q * two_pi_tail;
    return (q - ref) + r / two_pi;
}

/// Frequency bookkeeping shared by the sampler, the pmf and the estimator.
/// A frequency index L stands for nu = 2π L / span and is stored relative to L0,
/// the integer nearest omega0 span / 2π.
struct AliasFrame {
    double omega0, span, tc;
    std::int64_t n_s;
    double L0;       ///< integer nearest omega0 span / 2π
    double offset0;  ///< omega0 span / 2π - L0

    AliasFrame(const WavePacketSpec& packet, const UndersampleSpec& spec)
        : omega0(packet.omega0), span(spec.span), tc(packet.tc), n_s(spec.n_s) {
        spec.validate();
        L0 = std::nearbyint(packet.omega0 * span / two_pi);
        offset0 = cycles_minus(packet.omega0, span, L0);
    }

    /// Envelope centre for a photon localised at carrier omega, relative to L0.
    double centre(double omega_carrier) const { return cycles_minus(omega_carrier, span, L0); }
    double sigma() const { return span / (two_pi * tc * std::sqrt(2.0)); }
    /// Index shift of one carrier band.
    double band_step(double band_width) const { return band_width * span / two_pi; }

    /// nu - omega0 for the index L0 + ell.
    double detuning(std::int64_t ell) const { return two_pi * (static_cast<double>(ell) - offset0) / span; }

    std::int64_t k_of(std::int64_t ell) const {
        const auto L0i = static_cast<std::int64_t>(L0);
        std::int64_t k = -((L0i % n_s) + (ell % n_s)) % n_s;
        if (k < 0) k += n_s;
        return k;
    }

    /// The index ell with k_of(ell) == k that lies nearest the envelope centre.
    std::int64_t ell_of(std::int64_t k, double centre_ell) const {
        const auto L0i = static_cast<std::int64_t>(L0);
        std::int64_t base = -(k % n_s) - (L0i % n_s);  // congruent to -k - L0
        const double wraps = std::nearbyint((centre_ell - static_cast<double>(base)) / static_cast<double>(n_s));
        return base + static_cast<std::int64_t>(wraps) * n_s;
    }
};

inline double std_normal_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Exact sampler for P(ell) proportional to exp(-(ell - mu)^2 / (2 sigma^2)) over the integers:
/// propose by rounding a continuous normal, accept with the point-to-bin mass ratio.
template <RandomSource Rng>
std::int64_t sample_discrete_gaussian(double mu, double sigma, Rng& rng) {
    // The point/bin ratio peaks where the bin is centred on mu; `centre_bin` is that bin's mass.
    const double centre_bin = std::erf(1.0 / (2.0 * std::sqrt(2.0) * sigma));
    for (;;) {
        const double y = rng.normal(mu, sigma);
        const double ell = std::nearbyint(y);
        const double z = (ell - mu) / sigma;
        const double half = 0.5 / sigma;
        const double bin = z >= 0.0 ? std_normal_upper(z - half) - std_normal_upper(z + half)
                                    : std_normal_upper(-z - half) - std_normal_upper(-z + half);
        if (rng.uniform() * bin < std::exp(-0.5 * z * z) * centre_bin) return static_cast<std::int64_t>(ell);
    }
}

}  // namespace detail

/// Outcome of the undersampled measurement: frequency index and the photon's band centre.
struct AliasedSample {
    std::int64_t k = 0;
    double omega_carrier = 0.0;
    PhotonOrigin origin = PhotonOrigin::signal;
};

/// Probability of every index k in [0, n_s) for a photon localised at omega_carrier.
inline std::vector<double> aliased_pmf(double delta_t, double omega_carrier, const UndersampleSpec& spec,
                                       const WavePacketSpec& packet, double gamma = 1.0) {
    const detail::AliasFrame f(packet, spec);
    const double mu = f.centre(omega_carrier);
    const double sig = f.sigma();
    std::vector<double> p(static_cast<std::size_t>(spec.n_s));
    const double carrier = reduce_product(packet.omega0, delta_t);
    double total = 0.0;
    for (std::int64_t k = 0; k < spec.n_s; ++k) {
        const std::int64_t ell = f.ell_of(k, mu);
        const double z = (static_cast<double>(ell) - mu) / sig;
        const double fringe = gamma * std::cos(carrier + f.detuning(ell) * delta_t);
        const double v = std::exp(-0.5 * z * z) * (1.0 + fringe);
        p[static_cast<std::size_t>(k)] = v;
        total += v;
    }
    for (double& v : p) v /= total;
    return p;
}

inline double aliased_pdf(std::int64_t k, double delta_t, double omega_carrier, const UndersampleSpec& spec,
                          const WavePacketSpec& packet, double gamma = 1.0) {
    if (k < 0 || k >= spec.n_s) throw std::out_of_range("aliased_pdf: index outside [0, n_s)");
    return aliased_pmf(delta_t, omega_carrier, spec, packet, gamma)[static_cast<std::size_t>(k)];
}

/// Angular frequency 2π L / span that an aliased outcome stands for, as a detuning from
/// omega0. L is the member of the residue class of m n_s - k nearest the band centre.
inline double alias_detuning(const AliasedSample& s, const UndersampleSpec& spec, const WavePacketSpec& packet) {
    const detail::AliasFrame f(packet, spec);
    return f.detuning(f.ell_of(s.k, f.centre(s.omega_carrier)));
}

/// The outcome an exactly known frequency would produce: the nearest carrier
/// band, and the index of the nearest frequency 2π L / span.
inline AliasedSample quantize_photon(const PhotonSample& p, const UndersampleSpec& spec, const WavePacketSpec& packet) {
    const detail::AliasFrame f(packet, spec);
    AliasedSample s;
    s.origin = p.origin;
    s.omega_carrier = packet.omega0 + std::nearbyint(p.detuning / spec.band_width) * spec.band_width;
    s.k = f.k_of(static_cast<std::int64_t>(std::nearbyint(f.offset0 + p.detuning * spec.span / two_pi)));
    return s;
}

/// Draws the band, then the frequency index, for one photon.
template <RandomSource Rng>
AliasedSample sample_aliased(const WavePacketSpec& packet, const LensSignalSpec& lens, const UndersampleSpec& spec,
                             Rng& rng) {
    const detail::AliasFrame f(packet, spec);
    const bool signal = detail::draw_signal_flag(lens.Q, rng);
    const double band = std::nearbyint(rng.normal(0.0, 1.0 / std::sqrt(2.0)));
    AliasedSample out;
    out.omega_carrier = packet.omega0 + band * spec.band_width;
    out.origin = signal ? PhotonOrigin::signal : PhotonOrigin::background;
    const double mu = f.offset0 + band * f.band_step(spec.band_width);
    const double sig = f.sigma();
    if (!signal) {
        out.k = f.k_of(detail::sample_discrete_gaussian(mu, sig, rng));
        return out;
    }
    const double delay = lens.delta_fs > 0.0 ? rng.normal(lens.delta_t, lens.delta_fs) : lens.delta_t;
    const double g = gamma_factor(lens.A);
    const double carrier = reduce_product(packet.omega0, delay);
    for (;;) {
        const std::int64_t ell = detail::sample_discrete_gaussian(mu, sig, rng);
        const double accept = (1.0 + g * std::cos(carrier + f.detuning(ell) * delay)) / 2.0;
        if (rng.uniform() < accept) {
            out.k = f.k_of(ell);
            return out;
        }
    }
}

template <RandomSource Rng>
std::vector<AliasedSample> sample_aliased_batch(std::size_t n, const WavePacketSpec& packet,
                                                const LensSignalSpec& lens, const UndersampleSpec& spec, Rng& rng) {
    lens.validate(packet);
    std::vector<AliasedSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_aliased(packet, lens, spec, rng));
    return out;
}

/// Score sum_j cos(tau (omega_j - 2π f_alias,j - 2π k_j / span)) on the standard grid.
inline std::vector<double> score_alg2(const CandidateGrid& grid, std::span<const AliasedSample> samples,
                                      const UndersampleSpec& spec, const WavePacketSpec& packet,
                                      PhasorMethod method = PhasorMethod::automatic) {
    if (samples.empty()) throw std::invalid_argument("score_alg2: no samples");
    std::vector<PhotonSample> as_freq;
    as_freq.reserve(samples.size());
    for (const auto& s : samples) as_freq.push_back({alias_detuning(s, spec, packet), s.origin});
    return score_alg1(grid, as_freq, method);
}

inline EstimationResult estimate_alg2(std::span<const AliasedSample> samples, const WavePacketSpec& packet,
                                      const UndersampleSpec& spec, double Q, double A, bool keep_trace = false,
                                      PhasorMethod method = PhasorMethod::automatic) {
    if (samples.empty()) throw std::invalid_argument("estimate_alg2: no samples");
    const CandidateGrid grid = build_grid(packet);
    return detail::pick_peak(grid, score_alg2(grid, samples, spec, packet, method),
                             alg1_threshold(samples.size(), Q, A), keep_trace);
}

}  // namespace lensq
