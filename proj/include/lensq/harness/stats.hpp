#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>

namespace lensq::harness {

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Wilson score interval for a binomial proportion; z = 1.959964 gives 95%.
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959964) {
    if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
    if (successes > trials) throw std::invalid_argument("wilson_interval: successes exceed trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline bool intervals_overlap(const Interval& a, const Interval& b) { return a.low <= b.high && b.low <= a.high; }

/// First x at which y reaches `level`, by linear interpolation between samples.
inline std::optional<double> first_crossing(std::span<const double> x, std::span<const double> y, double level) {
    if (x.size() != y.size()) throw std::invalid_argument("first_crossing: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] < level) continue;
        if (i == 0) return x[0];
        const double t = (level - y[i - 1]) / (y[i] - y[i - 1]);
        return x[i - 1] + t * (x[i] - x[i - 1]);
    }
    return std::nullopt;
}

/// Running mean and unbiased variance (Welford).
class RunningStats {
public:
    void add(double v) {
        ++n_;
        const double d = v - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (v - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double standard_error() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace lensq::harness
