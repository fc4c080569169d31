#pragma once

/// Test fixtures and independent reference computations.

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "prefevo/audio.hpp"
#include "prefevo/config.hpp"
#include "prefevo/rng.hpp"

namespace testing {

/// Integrated loudness of the signals below (samples rounded to float32),
/// computed with pyloudnorm 0.1.1 using its "DeMan" K-weighting filters.
namespace loudness_oracle {
inline constexpr double kSine997Left48k = -3.010279921694225;
inline constexpr double kSine997Left44k = -3.0075175274429777;
inline constexpr double kStereoMix48k = -11.159693201982753;
inline constexpr double kStereoMix44k = -11.15599745223908;
inline constexpr double kGated440_48k = -9.879683426596051;
inline constexpr double kGated440_44k = -9.875937522158958;
} // namespace loudness_oracle

inline double sine_at(double amplitude, double f, std::size_t n, int fs) {
    return amplitude * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(n) / fs);
}

/// 997 Hz full-scale sine on the left channel, silent right channel.
inline prefevo::AudioClip sine997_left(int fs, double seconds = 10.0, std::size_t channels = 2) {
    const auto frames = static_cast<std::size_t>(seconds * fs);
    auto clip = prefevo::AudioClip::silence(fs, channels, frames);
    for (std::size_t n = 0; n < frames; ++n) clip.channels[0][n] = static_cast<float>(sine_at(1.0, 997.0, n, fs));
    return clip;
}

inline prefevo::AudioClip stereo_mix(int fs) {
    const auto frames = static_cast<std::size_t>(5.0 * fs);
    auto clip = prefevo::AudioClip::silence(fs, 2, frames);
    for (std::size_t n = 0; n < frames; ++n) {
        clip.channels[0][n] = static_cast<float>(sine_at(0.3, 100, n, fs) + sine_at(0.2, 1000, n, fs) + sine_at(0.1, 5000, n, fs));
        clip.channels[1][n] = static_cast<float>(sine_at(0.25, 60, n, fs) + sine_at(0.05, 3000, n, fs));
    }
    return clip;
}

/// 8 s of 440 Hz: loud for 4 s, 40 dB quieter afterwards (exercises the relative gate).
inline prefevo::AudioClip gated_tone(int fs) {
    const auto frames = static_cast<std::size_t>(8.0 * fs);
    auto clip = prefevo::AudioClip::silence(fs, 1, frames);
    for (std::size_t n = 0; n < frames; ++n) {
        const double a = n < static_cast<std::size_t>(4 * fs) ? 0.5 : 0.005;
        clip.channels[0][n] = static_cast<float>(sine_at(a, 440, n, fs));
    }
    return clip;
}

/// Sum of random-phase sines with 1/sqrt(f) amplitudes on a log grid over
/// [f_lo, f_hi]: pink-like and exactly band-limited.
inline std::vector<double> pink_tones(int fs, std::size_t frames, double f_lo, double f_hi, std::size_t tones,
                                      std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<double> out(frames, 0.0);
    for (std::size_t k = 0; k < tones; ++k) {
        const double f = f_lo * std::pow(f_hi / f_lo, static_cast<double>(k) / static_cast<double>(tones - 1));
        const double a = 1.0 / std::sqrt(f);
        const double p = phase(gen);
        const double w = 2.0 * std::numbers::pi * f / fs;
        for (std::size_t n = 0; n < frames; ++n) out[n] += a * std::sin(w * static_cast<double>(n) + p);
    }
    double peak = 0.0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    for (double& v : out) v *= 0.5 / peak;
    return out;
}

inline prefevo::AudioClip mono(int fs, const std::vector<double>& samples) {
    prefevo::AudioClip clip = prefevo::AudioClip::silence(fs, 1, samples.size());
    for (std::size_t n = 0; n < samples.size(); ++n) clip.channels[0][n] = static_cast<float>(samples[n]);
    return clip;
}

/// Program-like clip: a few harmonic voices plus filtered noise with a slow
/// level envelope. Varies with `seed`.
inline prefevo::AudioClip program_clip(int fs, double seconds, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto frames = static_cast<std::size_t>(seconds * fs);
    auto clip = prefevo::AudioClip::silence(fs, 2, frames);
    const double level = std::pow(10.0, -(6.0 + 24.0 * u(gen)) / 20.0);
    std::vector<double> f0(3);
    for (auto& f : f0) f = 55.0 * std::pow(2.0, 5.0 * u(gen));
    const double env_rate = 0.2 + 2.0 * u(gen);
    double lp = 0.0;
    for (std::size_t n = 0; n < frames; ++n) {
        const double t = static_cast<double>(n) / fs;
        double v = 0.0;
        for (double f : f0) {
            for (int h = 1; h <= 6; ++h) v += std::sin(2.0 * std::numbers::pi * f * h * t) / h;
        }
        lp += 0.05 * ((2.0 * u(gen) - 1.0) - lp);
        v = 0.15 * v + 0.8 * lp;
        const double env = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * env_rate * t);
        clip.channels[0][n] = static_cast<float>(level * env * v);
        clip.channels[1][n] = static_cast<float>(level * env * (0.8 * v + 0.2 * lp));
    }
    return clip;
}

/// |H(f)| in dB by direct evaluation of the DTFT sum.
inline double dtft_db(std::span<const double> taps, double f, int fs) {
    std::complex<long double> acc = 0;
    const long double w = -2.0L * std::numbers::pi_v<long double> * f / fs;
    for (std::size_t n = 0; n < taps.size(); ++n) {
        acc += static_cast<long double>(taps[n]) * std::polar(1.0L, w * static_cast<long double>(n));
    }
    return 20.0 * std::log10(static_cast<double>(std::abs(acc)));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("prefevo-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Default config whose eight tracks are short synthetic WAVs written to `dir`.
inline prefevo::ExperimentConfig config_with_tracks(const std::filesystem::path& dir, double seconds = 1.5,
                                                    std::size_t taps = 4095) {
    prefevo::ExperimentConfig config = prefevo::ExperimentConfig::defaults();
    config.base_dir = dir;
    config.tap_count = taps;
    std::filesystem::create_directories(dir / "audio");
    for (std::size_t i = 0; i < config.tracks.size(); ++i) {
        config.tracks[i].path = "audio/" + config.tracks[i].id + ".wav";
        config.tracks[i].start_s = 0.0;
        config.tracks[i].length_s = 0.0;
        prefevo::write_wav(dir / config.tracks[i].path, program_clip(48000, seconds, 100 + i));
    }
    return config;
}

} // namespace testing

#include <fstream>
#include <sstream>

namespace testing {

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace testing
