#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "prefevo/audio.hpp"
#include "prefevo/curve.hpp"

namespace prefevo {

/// Band center frequencies, strictly increasing.
struct BandPlan {
    std::vector<double> centers_hz;

    /// Ten one-octave centers, 31.25 Hz .. 16 kHz.
    static BandPlan octaves();

    std::size_t bands() const noexcept { return centers_hz.size(); }
    void validate() const;

    friend bool operator==(const BandPlan&, const BandPlan&) = default;
};

struct FirFilter {
    std::vector<double> taps;
    int sample_rate = 48000;
    /// Samples trimmed from the head of the full convolution by apply_fir.
    /// (taps - 1) / 2 for the symmetric designs produced here.
    std::size_t latency = 0;

    void validate() const;
};

inline constexpr std::size_t kDefaultTapCount = 16383;

/// Shortest odd length whose window resolution suits the lowest band.
std::size_t minimum_tap_count(const BandPlan& plan, int sample_rate);

/// Linear-phase equalizer realizing `curve` at the plan's band centers.
///
/// Frequency-sampling design: monotone cubic interpolation of the band gains
/// over log-frequency (held flat outside the outermost centers), zero-phase
/// inverse DFT, Hann window. The window smooths the response, which matters
/// most at the low bands, so the interpolation knots are re-solved a few
/// times until the windowed response lands on the requested gains.
FirFilter design_eq_filter(const Curve& curve, const BandPlan& plan, int sample_rate,
                           std::size_t tap_count = kDefaultTapCount);

/// Zero-phase magnitude (dB) of a symmetric filter at `frequency_hz`.
double magnitude_db(const FirFilter& filter, double frequency_hz);

/// Per-channel convolution, same length as the input, latency removed.
AudioClip apply_fir(const AudioClip& clip, const FirFilter& filter);

/// Impulse response from a WAV file (first channel) or a text file with one
/// coefficient per line ('#' comments allowed). Text files take
/// `sample_rate`; latency is placed at the largest-magnitude tap.
FirFilter load_fir(const std::filesystem::path& path, int sample_rate);

/// Monotone piecewise-cubic interpolant through (x, y) knots, x increasing.
/// Values outside [x.front(), x.back()] are held at the end values.
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;

private:
    std::vector<double> x_, y_, slope_;
};

} // namespace prefevo
