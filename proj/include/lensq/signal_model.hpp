#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lensq/phase.hpp"
#include "lensq/rng.hpp"

namespace lensq {

/// Gaussian single-photon wave packet and the delay search window.
struct WavePacketSpec {
    double omega0 = 1.0e3;  ///< carrier angular frequency, rad/s
    double tc = 1.0;        ///< coherence time, s
    double T = 1.0e4;       ///< upper limit of the delay search window, s

    double window_ratio() const { return T / tc; }

    void validate() const {
        if (!(omega0 > 0.0) || !(tc > 0.0) || !(T > 0.0))
            throw std::invalid_argument("wave packet: omega0, tc and T must be positive");
        if (T / tc < 10.0) throw std::invalid_argument("wave packet: T/tc must be at least 10");
        if (omega0 * tc < 10.0) throw std::invalid_argument("wave packet: omega0*tc must be at least 10");
    }
};

/// Two-image lensing parameters seen by one observer.
struct LensSignalSpec {
    double delta_t = 0.0;   ///< true delay, s
    double A = 1.34;        ///< total magnification (may be +inf for a fully modulated fringe)
    double delta_fs = 0.0;  ///< finite-source delay spread, s
    double Q = 1.0;         ///< fraction of photons carrying the two-path state

    void validate(const WavePacketSpec& packet) const {
        packet.validate();
        if (!(A >= 1.0)) throw std::domain_error("lens: magnification must be >= 1");
        if (!(Q >= 0.0 && Q <= 1.0)) throw std::invalid_argument("lens: Q must lie in [0, 1]");
        if (!(delta_fs >= 0.0)) throw std::invalid_argument("lens: finite-source spread must be >= 0");
        if (delta_t < 5.0 * packet.tc || delta_t > packet.T - 5.0 * packet.tc)
            throw std::invalid_argument("lens: delay must lie within [5 tc, T - 5 tc]");
    }
};

enum class PhotonOrigin { signal, background };

inline const char* to_string(PhotonOrigin o) { return o == PhotonOrigin::signal ? "signal" : "background"; }

/// One detected photon. The frequency is stored as a detuning from the packet
/// carrier so that phases stay exact when omega0 is large.
struct PhotonSample {
    double detuning = 0.0;  ///< omega - omega0, rad/s
    PhotonOrigin origin = PhotonOrigin::signal;

    double omega(const WavePacketSpec& packet) const { return packet.omega0 + detuning; }
};

/// Fringe visibility of two images with total magnification A.
inline double gamma_factor(double A) {
    if (!(A >= 1.0)) throw std::domain_error("gamma_factor: magnification must be >= 1");
    if (std::isinf(A)) return 1.0;
    return std::sqrt(A * A - 1.0) / A;
}

/// |alpha(omega - omega0)|^2 for the Gaussian packet.
inline double envelope_density(double detuning, const WavePacketSpec& packet) {
    const double u = packet.tc * detuning;
    return packet.tc / std::sqrt(pi) * std::exp(-u * u);
}

/// Damping of the fringe at frequency omega for a Gaussian spread of delays.
inline double suppression_factor(double omega, double delta) {
    if (omega < 0.0 || delta < 0.0) throw std::invalid_argument("suppression_factor: negative input");
    const double x = omega * delta;
    return std::exp(-0.5 * x * x);
}

/// Phase omega*t computed without losing the low bits of omega0*t.
inline double photon_phase(double omega0, double detuning, double t) {
    return reduce_product(omega0, t) + detuning * t;
}

/// Density of the measured frequency, given as a detuning from the carrier.
inline double channel_pdf_detuned(double detuning, const WavePacketSpec& packet, const LensSignalSpec& lens) {
    const double g = gamma_factor(lens.A);
    const double omega = packet.omega0 + detuning;
    const double fringe = g * suppression_factor(std::abs(omega), lens.delta_fs) *
                          std::cos(photon_phase(packet.omega0, detuning, lens.delta_t));
    return envelope_density(detuning, packet) * (1.0 + fringe);
}

/// Density of the measured angular frequency omega (s/rad) for a signal photon.
inline double channel_pdf(double omega, const WavePacketSpec& packet, const LensSignalSpec& lens) {
    return channel_pdf_detuned(omega - packet.omega0, packet, lens);
}

namespace detail {

inline double envelope_sd(const WavePacketSpec& packet) { return 1.0 / (std::sqrt(2.0) * packet.tc); }

// Detuning drawn from the packet envelope, truncated at 8/tc.
template <RandomSource Rng>
double draw_detuning(const WavePacketSpec& packet, Rng& rng) {
    const double sd = envelope_sd(packet);
    const double cut = 8.0 / packet.tc;
    for (;;) {
        const double d = rng.normal(0.0, sd);
        if (std::abs(d) <= cut) return d;
    }
}

// Q = 0 and Q = 1 consume no randomness, which keeps streams aligned across pipelines.
template <RandomSource Rng>
bool draw_signal_flag(double Q, Rng& rng) {
    if (Q >= 1.0) return true;
    if (Q <= 0.0) return false;
    return rng.uniform() < Q;
}

}  // namespace detail

/// Draws one photon: signal photons by rejection from the envelope, background
/// photons from the bare envelope.
template <RandomSource Rng>
PhotonSample sample_photon(const WavePacketSpec& packet, const LensSignalSpec& lens, Rng& rng) {
    if (!detail::draw_signal_flag(lens.Q, rng))
        return {detail::draw_detuning(packet, rng), PhotonOrigin::background};
    const double delay = lens.delta_fs > 0.0 ? rng.normal(lens.delta_t, lens.delta_fs) : lens.delta_t;
    const double g = gamma_factor(lens.A);
    const double carrier = reduce_product(packet.omega0, delay);
    for (;;) {
        const double d = detail::draw_detuning(packet, rng);
        const double accept = (1.0 + g * std::cos(carrier + d * delay)) / 2.0;
        if (rng.uniform() < accept) return {d, PhotonOrigin::signal};
    }
}

template <RandomSource Rng>
std::vector<PhotonSample> sample_photons(std::size_t n, const WavePacketSpec& packet, const LensSignalSpec& lens,
                                         Rng& rng) {
    lens.validate(packet);
    std::vector<PhotonSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_photon(packet, lens, rng));
    return out;
}

/// Expected per-photon score E[cos(nu * tau)], including the weak term centred on tau = 0.
inline double score_expectation(double tau, const WavePacketSpec& packet, const LensSignalSpec& lens) {
    const double tc = packet.tc;
    const double w0 = packet.omega0;
    const double central = std::exp(-tau * tau / (4.0 * tc * tc)) * std::cos(reduce_product(w0, tau));

    const double eps = lens.delta_fs * lens.delta_fs / (2.0 * tc * tc);
    const double norm = 1.0 / std::sqrt(1.0 + eps);
    const double damp = std::exp(-0.5 * w0 * w0 * lens.delta_fs * lens.delta_fs / (1.0 + eps));
    auto lobe = [&](double s) {
        // omega0 * s / (1 + eps) evaluated as omega0*s minus a small correction
        const double phase = reduce_product(w0, s) - w0 * s * eps / (1.0 + eps);
        return norm * damp * std::exp(-s * s / (4.0 * tc * tc * (1.0 + eps))) * std::cos(phase);
    };
    const double g = gamma_factor(lens.A);
    return central + lens.Q * g * 0.5 * (lobe(lens.delta_t - tau) + lobe(lens.delta_t + tau));
}

}  // namespace lensq
