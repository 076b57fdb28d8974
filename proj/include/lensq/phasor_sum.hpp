#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "lensq/phase.hpp"

namespace lensq {

enum class PhasorMethod { automatic, direct, nufft };

/// Batched phasor sums over an arithmetic progression of evaluation points:
///
///   out[k * steps + i] = sum_j start[j * offsets + k] * exp(1i * i * step[j])
///
/// for i in [0, steps) and k in [0, offsets). Each term j contributes one
/// increment `step[j]` (radians, any range) and `offsets` starting phasors.
struct PhasorSumRequest {
    std::span<const double> step;
    std::span<const std::complex<double>> start;
    std::size_t offsets = 1;
    std::size_t steps = 0;

    std::size_t terms() const { return step.size(); }

    void validate(std::size_t out_size) const {
        if (offsets == 0) throw std::invalid_argument("phasor sum: offsets must be positive");
        if (start.size() != step.size() * offsets)
            throw std::invalid_argument("phasor sum: start array has wrong length");
        if (out_size != offsets * steps) throw std::invalid_argument("phasor sum: output array has wrong length");
    }
};

/// Recurrence e^{i(t+1)x} = e^{itx} e^{ix}; cost O(terms * offsets * steps).
inline void phasor_sums_direct(const PhasorSumRequest& req, std::span<std::complex<double>> out) {
    req.validate(out.size());
    std::fill(out.begin(), out.end(), std::complex<double>{});
    const std::size_t K = req.offsets, M = req.steps;
    for (std::size_t j = 0; j < req.terms(); ++j) {
        const double x = req.step[j];
        const double rr = std::cos(x), ri = std::sin(x);
        for (std::size_t k = 0; k < K; ++k) {
            double zr = req.start[j * K + k].real(), zi = req.start[j * K + k].imag();
            std::complex<double>* row = out.data() + k * M;
            for (std::size_t i = 0; i < M; ++i) {
                row[i] += std::complex<double>{zr, zi};
                // written out so the compiler skips the inf/nan recovery of operator*
                const double t = zr * rr - zi * ri;
                zi = zr * ri + zi * rr;
                zr = t;
            }
        }
    }
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Smallest integer >= n whose only prime factors are 2, 3 and 5.
inline std::size_t next_smooth(std::size_t n) {
    for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
        std::size_t r = m;
        for (std::size_t p : {2u, 3u, 5u})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

/// Gaussian-gridding type-1 transform (Greengard & Lee, 2004) with oversampling 2.
/// One workspace per thread; FFTW plans are created under a global lock because the
/// FFTW planner is not reentrant, while plan execution is.
class NufftWorkspace {
public:
    NufftWorkspace() = default;
    NufftWorkspace(const NufftWorkspace&) = delete;
    NufftWorkspace& operator=(const NufftWorkspace&) = delete;
    ~NufftWorkspace() { release(); }

    void run(const PhasorSumRequest& req, std::span<std::complex<double>> out, double tol) {
        prepare(req.steps, req.offsets, tol);
        spread(req);
        fftw_execute(plan_);
        deconvolve(req, out);
    }

private:
    void prepare(std::size_t modes, std::size_t batch, double tol) {
        if (modes == modes_ && batch == batch_ && tol == tol_ && plan_ != nullptr) return;
        release();
        modes_ = modes;
        batch_ = batch;
        tol_ = tol;
        constexpr double ratio = 2.0;
        const double decay = pi * (ratio - 0.5) / ratio;
        spread_half_ = std::clamp(static_cast<int>(std::ceil(-std::log(tol) / decay)), 4, 16);
        grid_ = next_smooth(std::max<std::size_t>(2 * modes, 4 * static_cast<std::size_t>(spread_half_)));
        const double m = static_cast<double>(modes);
        tau_ = pi * spread_half_ / (m * m * ratio * (ratio - 0.5));
        h_ = two_pi / static_cast<double>(grid_);

        shift_ = modes / 2;
        deconv_.resize(modes);
        const double scale = std::sqrt(pi / tau_) / static_cast<double>(grid_);
        for (std::size_t i = 0; i < modes; ++i) {
            const double mode = static_cast<double>(i) - static_cast<double>(shift_);
            deconv_[i] = scale * std::exp(mode * mode * tau_);
        }
        tail_.resize(static_cast<std::size_t>(spread_half_) + 1);
        for (int l = 0; l <= spread_half_; ++l) tail_[l] = std::exp(-(l * h_) * (l * h_) / (4.0 * tau_));

        buffer_ = fftw_alloc_complex(grid_ * batch_);
        if (buffer_ == nullptr) throw std::bad_alloc();
        const int n = static_cast<int>(grid_);
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan_ = fftw_plan_many_dft(1, &n, static_cast<int>(batch_), buffer_, nullptr, 1, n, buffer_, nullptr, 1, n,
                                   FFTW_BACKWARD, FFTW_ESTIMATE);
        if (plan_ == nullptr) throw std::runtime_error("FFTW planning failed");
    }

    void release() {
        if (plan_ != nullptr) {
            std::lock_guard<std::mutex> lock(fftw_planner_mutex());
            fftw_destroy_plan(plan_);
            plan_ = nullptr;
        }
        if (buffer_ != nullptr) {
            fftw_free(buffer_);
            buffer_ = nullptr;
        }
    }

    void spread(const PhasorSumRequest& req) {
        auto* grid = reinterpret_cast<std::complex<double>*>(buffer_);
        std::fill(grid, grid + grid_ * batch_, std::complex<double>{});
        const int width = 2 * spread_half_;
        weights_.resize(static_cast<std::size_t>(width));
        const auto G = static_cast<long>(grid_);
        const double shift = static_cast<double>(shift_);
        for (std::size_t j = 0; j < req.terms(); ++j) {
            const double x = wrap_phase(req.step[j]);
            long l0 = static_cast<long>(std::floor(x / h_));
            if (l0 >= G) l0 = G - 1;
            const double dx = x - static_cast<double>(l0) * h_;
            const double e1 = std::exp(-dx * dx / (4.0 * tau_));
            const double e2 = std::exp(dx * h_ / (2.0 * tau_));
            // weights for offsets l = -spread_half_+1 .. spread_half_ relative to l0
            double up = e1;
            for (int l = 0; l <= spread_half_; ++l) {
                weights_[static_cast<std::size_t>(l + spread_half_ - 1)] = up * tail_[l];
                up *= e2;
            }
            const double inv = 1.0 / e2;
            double down = e1 * inv;
            for (int l = 1; l < spread_half_; ++l) {
                weights_[static_cast<std::size_t>(spread_half_ - 1 - l)] = down * tail_[l];
                down *= inv;
            }
            const double rot = reduce_product(shift, x);
            const std::complex<double> centre{std::cos(rot), std::sin(rot)};
            long first = l0 - spread_half_ + 1;
            first %= G;
            if (first < 0) first += G;
            for (std::size_t k = 0; k < batch_; ++k) {
                const std::complex<double> c = req.start[j * batch_ + k] * centre;
                std::complex<double>* row = grid + k * grid_;
                long p = first;
                for (int w = 0; w < width; ++w) {
                    row[p] += c * weights_[static_cast<std::size_t>(w)];
                    if (++p == G) p = 0;
                }
            }
        }
    }

    void deconvolve(const PhasorSumRequest& req, std::span<std::complex<double>> out) const {
        const auto* grid = reinterpret_cast<const std::complex<double>*>(buffer_);
        const auto G = static_cast<long>(grid_);
        for (std::size_t k = 0; k < req.offsets; ++k) {
            const std::complex<double>* row = grid + k * grid_;
            for (std::size_t i = 0; i < modes_; ++i) {
                long idx = static_cast<long>(i) - static_cast<long>(shift_);
                if (idx < 0) idx += G;
                out[k * modes_ + i] = row[idx] * deconv_[i];
            }
        }
    }

    std::size_t modes_ = 0, batch_ = 0, grid_ = 0, shift_ = 0;
    double tol_ = 0.0, tau_ = 0.0, h_ = 0.0;
    int spread_half_ = 0;
    std::vector<double> deconv_, tail_, weights_;
    fftw_complex* buffer_ = nullptr;
    fftw_plan plan_ = nullptr;
};

inline NufftWorkspace& thread_nufft_workspace() {
    thread_local NufftWorkspace ws;
    return ws;
}

}  // namespace detail

inline void phasor_sums_nufft(const PhasorSumRequest& req, std::span<std::complex<double>> out, double tol = 1e-12) {
    req.validate(out.size());
    if (req.steps == 0) return;
    detail::thread_nufft_workspace().run(req, out, tol);
}

/// Dispatches on a rough cost estimate; both paths agree to ~1e-12 relative. The
/// direct recurrence is latency bound, about twenty times dearer per term than
/// an FFT butterfly on typical hardware.
inline void phasor_sums(const PhasorSumRequest& req, std::span<std::complex<double>> out,
                        PhasorMethod method = PhasorMethod::automatic, double tol = 1e-12) {
    if (method == PhasorMethod::automatic) {
        const double n = static_cast<double>(req.terms()), K = static_cast<double>(req.offsets);
        const double M = static_cast<double>(req.steps);
        const double direct = 20.0 * n * K * M;
        const double grid = 2.0 * M;
        const double nufft = n * K * 24.0 + n * 30.0 + K * grid * (5.0 * std::log2(grid + 2.0) + 4.0);
        method = (M >= 64 && nufft < direct) ? PhasorMethod::nufft : PhasorMethod::direct;
    }
    if (method == PhasorMethod::nufft)
        phasor_sums_nufft(req, out, tol);
    else
        phasor_sums_direct(req, out);
}

}  // namespace lensq
