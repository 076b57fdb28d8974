#pragma once

#include <cstdint>
#include <random>

namespace lensq {

/// Seedable random stream. A stream is keyed by up to three integers so that
/// experiments can derive independent per-trial streams from one master seed.
class RngStream {
public:
    using result_type = std::mt19937_64::result_type;

    explicit RngStream(std::uint64_t seed = 0) : RngStream(seed, 0, 0) {}

    RngStream(std::uint64_t master, std::uint64_t stream, std::uint64_t substream = 0) {
        std::seed_seq seq{lo(master), hi(master), lo(stream), hi(stream), lo(substream), hi(substream)};
        engine_.seed(seq);
    }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return unit_(engine_); }

    double normal(double mean, double sd) {
        return gauss_(engine_, std::normal_distribution<double>::param_type(mean, sd));
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return engine_; }

private:
    static std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
    static std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> gauss_;
};

/// Anything that can stand in for RngStream inside the samplers.
template <class R>
concept RandomSource = requires(R& r, double a, double b) {
    { r.uniform() } -> std::convertible_to<double>;
    { r.normal(a, b) } -> std::convertible_to<double>;
};

}  // namespace lensq
