#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "lensq/phase.hpp"
#include "lensq/rng.hpp"

namespace lensq {

/// Discretised light cone between a point source and a telescope, with dust
/// particles of cross-section length r at number density rho_N. The product
/// rho_N * V_k is used directly as the Poisson mean of particles in a cell.
struct DustModelConfig {
    double r = 1e-6;      ///< particle cross-section length, m
    double d = 1.024e-3;  ///< telescope linear size, m
    double R = 1.0;       ///< source distance, m
    double rho_N = 0.0;   ///< particle density
    int dims = 2;         ///< 2 for the planar model, 3 for the cone

    double ratio() const { return d / r; }

    /// Number of layers, 1 + log2(d/r).
    int layers() const { return 1 + static_cast<int>(std::lround(std::log2(ratio()))); }

    void validate() const {
        if (!(r > 0.0 && d > 0.0 && R > 0.0)) throw std::invalid_argument("dust model: r, d and R must be positive");
        if (!(rho_N >= 0.0)) throw std::invalid_argument("dust model: density must be >= 0");
        if (!(r < d)) throw std::invalid_argument("dust model: need r < d");
        if (dims != 2 && dims != 3) throw std::invalid_argument("dust model: dims must be 2 or 3");
    }

    bool ratio_is_power_of_two() const {
        const double l = std::log2(ratio());
        return std::abs(l - std::round(l)) < 1e-9;
    }
};

/// Probability q_k that no particle sits in a cell of layer k (1-based).
inline double layer_survival(int k, const DustModelConfig& cfg) {
    cfg.validate();
    if (k < 1 || k > cfg.layers()) throw std::out_of_range("layer_survival: layer index out of range");
    const double base = cfg.r * cfg.r * cfg.R * cfg.rho_N / cfg.d;
    if (k == 1) return std::exp(-0.5 * base);
    return std::exp(-3.0 * base * std::ldexp(1.0, k - 4));
}

/// Expected blocked fraction, from 1 - p_loss = exp(r^2 R rho / (4d) - 3 r R rho / 4).
inline double loss_rate(const DustModelConfig& cfg) {
    cfg.validate();
    const double x = cfg.r * cfg.R * cfg.rho_N;
    return -std::expm1(x * cfg.r / (4.0 * cfg.d) - 0.75 * x);
}

/// Upper bound on the variance of the unblocked fraction.
inline double variance_bound(const DustModelConfig& cfg) {
    cfg.validate();
    const double n = cfg.ratio();
    const double lg = std::log2(n);
    const double survive = 1.0 - loss_rate(cfg);
    if (cfg.dims == 2) return (1.0 + lg) * survive / n;
    return (1.0 + 2.0 * lg) * survive / (n * n);
}

struct TreeTrialResult {
    double unblocked_fraction = 0.0;
    std::vector<std::uint64_t> blocked_per_layer;  ///< red nodes with a green path above them
};

/// One colouring of the tree. Only cells whose whole ancestry is clear matter,
/// so each layer draws the number of clear children among the survivors of the
/// previous layer. Branching is 2 in the planar model and 4 in the cone.
template <RandomSource Rng>
TreeTrialResult simulate_tree(const DustModelConfig& cfg, Rng& rng) {
    cfg.validate();
    if (!cfg.ratio_is_power_of_two()) throw std::invalid_argument("simulate_tree: d/r must be a power of two");
    if (cfg.ratio() > 1048576.5) throw std::invalid_argument("simulate_tree: d/r above 2^20 is too large");
    if (cfg.dims == 3 && cfg.ratio() > 1024.5)
        throw std::invalid_argument("simulate_tree: the cone tree is limited to d/r <= 2^10");
    const std::uint64_t branching = cfg.dims == 2 ? 2 : 4;
    const int L = cfg.layers();

    TreeTrialResult out;
    out.blocked_per_layer.resize(static_cast<std::size_t>(L), 0);
    std::uint64_t candidates = 1;
    std::uint64_t leaves = 1;
    for (int k = 1; k <= L; ++k) {
        if (k > 1) {
            candidates *= branching;
            leaves *= branching;
        }
        const double q = layer_survival(k, cfg);
        std::uint64_t alive = candidates;
        if (q < 1.0 && candidates > 0) {
            std::binomial_distribution<std::uint64_t> draw(candidates, q);
            alive = draw(rng.engine());
        }
        out.blocked_per_layer[static_cast<std::size_t>(k - 1)] = candidates - alive;
        candidates = alive;
    }
    out.unblocked_fraction = static_cast<double>(candidates) / static_cast<double>(leaves);
    return out;
}

/// Mean off-diagonal amplitude E[sqrt(s (1 - s))] for a split fraction s drawn
/// from Normal(1/2, sigma^2) restricted to [0, 1].
inline double coherence_offdiag(double sigma) {
    if (!(sigma >= 0.0 && sigma <= 1.0 / std::sqrt(2.0) + 1e-12))
        throw std::invalid_argument("coherence_offdiag: sigma must lie in [0, 1/sqrt(2)]");
    if (sigma == 0.0) return 0.5;
    using boost::math::quadrature::gauss_kronrod;
    auto weight = [sigma](double s) {
        const double z = (s - 0.5) / sigma;
        return std::exp(-0.5 * z * z);
    };
    // split at the peak; the square-root endpoints are handled by the adaptive rule
    const double num = gauss_kronrod<double, 61>::integrate(
                           [&](double s) { return weight(s) * std::sqrt(s * (1.0 - s)); }, 0.0, 0.5, 15, 1e-12) +
                       gauss_kronrod<double, 61>::integrate(
                           [&](double s) { return weight(s) * std::sqrt(s * (1.0 - s)); }, 0.5, 1.0, 15, 1e-12);
    const double den = std::sqrt(two_pi) * sigma * std::erf(0.5 / (std::sqrt(2.0) * sigma));
    return num / den;
}

}  // namespace lensq
