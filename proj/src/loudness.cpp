#include "prefevo/loudness.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "prefevo/errors.hpp"

namespace prefevo {

namespace {

// Analog prototype parameters matching the 48 kHz coefficients.
constexpr double kShelfF0 = 1681.974450955533;
constexpr double kShelfGainDb = 3.999843853973347;
constexpr double kShelfQ = 0.7071752369554196;
constexpr double kHighPassF0 = 38.13547087602444;
constexpr double kHighPassQ = 0.5003270373238773;

constexpr double kAbsoluteGate = -70.0;
constexpr double kRelativeGate = -10.0;

Biquad bilinear_shelf(int sample_rate) {
    const double k = std::tan(std::numbers::pi * kShelfF0 / sample_rate);
    const double vh = std::pow(10.0, kShelfGainDb / 20.0);
    const double vb = std::pow(vh, 0.4996667741545416);
    const double a0 = 1.0 + k / kShelfQ + k * k;
    return Biquad{{(vh + vb * k / kShelfQ + k * k) / a0, 2.0 * (k * k - vh) / a0, (vh - vb * k / kShelfQ + k * k) / a0},
                  {2.0 * (k * k - 1.0) / a0, (1.0 - k / kShelfQ + k * k) / a0}};
}

Biquad bilinear_high_pass(int sample_rate) {
    const double k = std::tan(std::numbers::pi * kHighPassF0 / sample_rate);
    const double a0 = 1.0 + k / kHighPassQ + k * k;
    return Biquad{{1.0, -2.0, 1.0}, {2.0 * (k * k - 1.0) / a0, (1.0 - k / kHighPassQ + k * k) / a0}};
}

void run_biquad(const Biquad& q, std::vector<double>& x) {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (double& v : x) {
        const double y = q.b[0] * v + q.b[1] * x1 + q.b[2] * x2 - q.a[0] * y1 - q.a[1] * y2;
        x2 = x1;
        x1 = v;
        y2 = y1;
        y1 = y;
        v = y;
    }
}

double to_lufs(double weighted_mean_square) { return -0.691 + 10.0 * std::log10(weighted_mean_square); }

} // namespace

std::array<Biquad, 2> k_weighting(int sample_rate) {
    if (sample_rate == 48000) {
        return {Biquad{{1.53512485958697, -2.69169618940638, 1.19839281085285}, {-1.69065929318241, 0.73248077421585}},
                Biquad{{1.0, -2.0, 1.0}, {-1.99004745483398, 0.99007225036621}}};
    }
    return {bilinear_shelf(sample_rate), bilinear_high_pass(sample_rate)};
}

std::optional<double> measure_loudness(const AudioClip& clip) {
    clip.validate();
    // 100 ms hop; a gating block is four consecutive hops.
    const auto hop = static_cast<std::size_t>(std::lround(0.1 * clip.sample_rate));
    const std::size_t block = 4 * hop;
    if (clip.frames() < block) {
        throw ValidationError("clip is " + std::to_string(clip.duration_seconds()) +
                              " s; loudness needs at least one 400 ms block");
    }
    const std::size_t hops = clip.frames() / hop;
    const std::size_t blocks = (clip.frames() - block) / hop + 1;
    const auto filters = k_weighting(clip.sample_rate);

    // Per channel, per hop: sum of squared K-weighted samples. Channel
    // weights are 1 for mono and for left/right.
    std::vector<std::vector<double>> hop_energy(clip.channel_count(), std::vector<double>(hops, 0.0));
    for (std::size_t c = 0; c < clip.channel_count(); ++c) {
        std::vector<double> x(clip.channels[c].begin(), clip.channels[c].end());
        for (const auto& stage : filters) run_biquad(stage, x);
        for (std::size_t h = 0; h < hops; ++h) {
            double sum = 0.0;
            for (std::size_t n = h * hop; n < (h + 1) * hop; ++n) sum += x[n] * x[n];
            hop_energy[c][h] = sum;
        }
    }

    std::vector<double> block_power(blocks, 0.0); // channel-summed mean square per block
    for (std::size_t j = 0; j < blocks; ++j) {
        for (std::size_t c = 0; c < clip.channel_count(); ++c) {
            const double energy = hop_energy[c][j] + hop_energy[c][j + 1] + hop_energy[c][j + 2] + hop_energy[c][j + 3];
            block_power[j] += energy / static_cast<double>(block);
        }
    }

    auto gated_mean = [&](double threshold) {
        double sum = 0.0;
        std::size_t count = 0;
        for (double p : block_power) {
            if (p > 0.0 && to_lufs(p) > threshold) {
                sum += p;
                ++count;
            }
        }
        return count == 0 ? 0.0 : sum / static_cast<double>(count);
    };

    const double absolute = gated_mean(kAbsoluteGate);
    if (absolute <= 0.0) return std::nullopt;
    const double relative_threshold = to_lufs(absolute) + kRelativeGate;
    const double gated = gated_mean(std::max(relative_threshold, kAbsoluteGate));
    return to_lufs(gated);
}

AlignedClip align_loudness(const AudioClip& clip, double target_lufs) {
    const auto measured = measure_loudness(clip);
    if (!measured) throw ValidationError("clip is below the absolute gate; cannot align loudness");
    AlignedClip out;
    out.gain_db = target_lufs - *measured;
    const double gain = std::pow(10.0, out.gain_db / 20.0);
    out.clip.sample_rate = clip.sample_rate;
    for (const auto& channel : clip.channels) {
        std::vector<float> scaled(channel.size());
        for (std::size_t n = 0; n < channel.size(); ++n) {
            scaled[n] = static_cast<float>(channel[n] * gain);
            out.exceeds_full_scale = out.exceeds_full_scale || std::abs(scaled[n]) > 1.0f;
        }
        out.clip.channels.push_back(std::move(scaled));
    }
    return out;
}

} // namespace prefevo
