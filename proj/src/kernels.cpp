#include "prefevo/kernels.hpp"

#include <fftw3.h>
#include <omp.h>

#include <algorithm>
#include <bit>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace prefevo::kernels {

namespace {

// The FFTW planner is not thread-safe; executing an existing plan on new
// arrays is. Plans are created once per size and kept for the process.
std::mutex planner_mutex;

struct PlanPair {
    fftw_plan forward;
    fftw_plan inverse;
};

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (p == nullptr) throw std::bad_alloc();
    return FftwBuffer<T>(p);
}

const PlanPair& plans_for(std::size_t n) {
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard lock(planner_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto real = fftw_buffer<double>(n);
    auto spec = fftw_buffer<fftw_complex>(n / 2 + 1);
    const int size = static_cast<int>(n);
    PlanPair plans{
        fftw_plan_dft_r2c_1d(size, real.get(), spec.get(), FFTW_ESTIMATE),
        fftw_plan_dft_c2r_1d(size, spec.get(), real.get(), FFTW_ESTIMATE),
    };
    return cache.emplace(n, plans).first->second;
}

} // namespace

std::vector<double> convolve_direct(std::span<const float> x, std::span<const double> h) {
    if (x.empty() || h.empty()) return {};
    std::vector<double> y(x.size() + h.size() - 1, 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double xn = x[n];
        if (xn == 0.0) continue;
        for (std::size_t k = 0; k < h.size(); ++k) y[n + k] += xn * h[k];
    }
    return y;
}

std::vector<double> convolve_fft(std::span<const float> x, std::span<const double> h) {
    if (x.empty() || h.empty()) return {};
    const std::size_t taps = h.size();
    const std::size_t fft_size = std::bit_ceil(std::max<std::size_t>(4 * taps, 1024));
    const std::size_t block = fft_size - taps + 1;
    const std::size_t bins = fft_size / 2 + 1;
    const std::size_t blocks = (x.size() + block - 1) / block;
    const PlanPair& plans = plans_for(fft_size);

    auto filter_spectrum = fftw_buffer<fftw_complex>(bins);
    {
        auto padded = fftw_buffer<double>(fft_size);
        std::fill_n(padded.get(), fft_size, 0.0);
        std::copy(h.begin(), h.end(), padded.get());
        fftw_execute_dft_r2c(plans.forward, padded.get(), filter_spectrum.get());
    }

    std::vector<double> y(x.size() + taps - 1, 0.0);
    const double scale = 1.0 / static_cast<double>(fft_size);

    // Block tails (taps - 1 samples) only reach into the next block, so even
    // and odd blocks can each be accumulated without write conflicts.
    for (std::size_t parity = 0; parity < 2; ++parity) {
#pragma omp parallel
        {
            auto work = fftw_buffer<double>(fft_size);
            auto spec = fftw_buffer<fftw_complex>(bins);
#pragma omp for schedule(static)
            for (std::ptrdiff_t b = static_cast<std::ptrdiff_t>(parity); b < static_cast<std::ptrdiff_t>(blocks);
                 b += 2) {
                const std::size_t start = static_cast<std::size_t>(b) * block;
                const std::size_t len = std::min(block, x.size() - start);
                std::fill_n(work.get(), fft_size, 0.0);
                for (std::size_t i = 0; i < len; ++i) work[i] = x[start + i];
                fftw_execute_dft_r2c(plans.forward, work.get(), spec.get());
                for (std::size_t k = 0; k < bins; ++k) {
                    const double re = spec[k][0] * filter_spectrum[k][0] - spec[k][1] * filter_spectrum[k][1];
                    const double im = spec[k][0] * filter_spectrum[k][1] + spec[k][1] * filter_spectrum[k][0];
                    spec[k][0] = re;
                    spec[k][1] = im;
                }
                fftw_execute_dft_c2r(plans.inverse, spec.get(), work.get());
                const std::size_t out_len = std::min(len + taps - 1, y.size() - start);
                for (std::size_t i = 0; i < out_len; ++i) y[start + i] += work[i] * scale;
            }
        }
    }
    return y;
}

std::vector<double> inverse_real_dft(std::span<const double> half_spectrum_re, std::size_t n) {
    if (half_spectrum_re.size() != n / 2 + 1) throw std::invalid_argument("inverse_real_dft: spectrum size");
    const PlanPair& plans = plans_for(n);
    auto spec = fftw_buffer<fftw_complex>(n / 2 + 1);
    auto out = fftw_buffer<double>(n);
    for (std::size_t k = 0; k < half_spectrum_re.size(); ++k) {
        spec[k][0] = half_spectrum_re[k];
        spec[k][1] = 0.0;
    }
    fftw_execute_dft_c2r(plans.inverse, spec.get(), out.get());
    std::vector<double> result(out.get(), out.get() + n);
    for (double& v : result) v /= static_cast<double>(n);
    return result;
}

} // namespace prefevo::kernels
