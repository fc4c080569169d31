#pragma once

/// Convolution kernels behind apply_fir.
///
/// `convolve_direct` is the serial reference: a plain O(N*M) sum, kept for
/// tests and benchmarks. `convolve_fft` is the production path: FFT
/// overlap-add with blocks processed in parallel under OpenMP. Both return
/// the full linear convolution (x.size() + h.size() - 1 samples).

#include <span>
#include <vector>

namespace prefevo::kernels {

std::vector<double> convolve_direct(std::span<const float> x, std::span<const double> h);

/// Deterministic for any thread count: overlapping block tails are summed in
/// a fixed order.
std::vector<double> convolve_fft(std::span<const float> x, std::span<const double> h);

/// Inverse real DFT of a half spectrum (n/2 + 1 bins), scaled by 1/n.
std::vector<double> inverse_real_dft(std::span<const double> half_spectrum_re, std::size_t n);

} // namespace prefevo::kernels
