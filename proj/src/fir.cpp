#include "prefevo/fir.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "prefevo/errors.hpp"
#include "prefevo/kernels.hpp"

namespace prefevo {

namespace {

constexpr int kKnotCorrectionPasses = 4;

int sign(double v) { return (v > 0.0) - (v < 0.0); }

double zero_phase_amplitude(std::span<const double> taps, double frequency_hz, int sample_rate) {
    const double center = static_cast<double>(taps.size() - 1) / 2.0;
    const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate;
    double sum = 0.0;
    for (std::size_t n = 0; n < taps.size(); ++n) sum += taps[n] * std::cos(w * (static_cast<double>(n) - center));
    return sum;
}

std::vector<double> design_taps(const std::vector<double>& knots_db, const BandPlan& plan, int sample_rate,
                                std::size_t tap_count) {
    std::vector<double> log_centers(plan.bands());
    for (std::size_t i = 0; i < plan.bands(); ++i) log_centers[i] = std::log2(plan.centers_hz[i]);
    const MonotoneCubic shape(log_centers, knots_db);

    const std::size_t grid = std::bit_ceil(8 * tap_count);
    std::vector<double> magnitude(grid / 2 + 1);
    for (std::size_t k = 0; k < magnitude.size(); ++k) {
        const double f = static_cast<double>(k) * sample_rate / static_cast<double>(grid);
        const double db = f > 0.0 ? shape(std::log2(f)) : shape(log_centers.front());
        magnitude[k] = std::pow(10.0, db / 20.0);
    }
    const std::vector<double> impulse = kernels::inverse_real_dft(magnitude, grid);

    // Centered, windowed and mirrored so the taps are exactly symmetric.
    const std::size_t half = (tap_count - 1) / 2;
    std::vector<double> taps(tap_count);
    for (std::size_t n = 0; n <= half; ++n) {
        const std::size_t lag = half - n;
        const double window =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n + 1) / static_cast<double>(tap_count + 1));
        const double lagged = lag == 0 ? impulse[0] : 0.5 * (impulse[lag] + impulse[grid - lag]);
        taps[n] = lagged * window;
        taps[tap_count - 1 - n] = taps[n];
    }
    return taps;
}

} // namespace

BandPlan BandPlan::octaves() {
    BandPlan plan;
    for (int i = 0; i < 10; ++i) plan.centers_hz.push_back(31.25 * std::ldexp(1.0, i));
    return plan;
}

void BandPlan::validate() const {
    if (centers_hz.empty()) throw ValidationError("band plan: no bands");
    for (std::size_t i = 0; i < centers_hz.size(); ++i) {
        if (!(centers_hz[i] > 0.0) || !std::isfinite(centers_hz[i])) {
            throw ValidationError("band plan: center " + std::to_string(i) + " must be a positive frequency");
        }
        if (i > 0 && !(centers_hz[i] > centers_hz[i - 1])) {
            throw ValidationError("band plan: centers must be strictly increasing");
        }
    }
}

void FirFilter::validate() const {
    if (taps.empty()) throw ValidationError("filter has no taps");
    for (double t : taps) {
        if (!std::isfinite(t)) throw ValidationError("filter has non-finite taps");
    }
    if (latency >= taps.size()) throw ValidationError("filter latency exceeds its length");
}

std::size_t minimum_tap_count(const BandPlan& plan, int sample_rate) {
    plan.validate();
    const auto n = static_cast<std::size_t>(std::ceil(2.5 * sample_rate / plan.centers_hz.front()));
    return n | 1U;
}

FirFilter design_eq_filter(const Curve& curve, const BandPlan& plan, int sample_rate, std::size_t tap_count) {
    plan.validate();
    if (curve.bands() != plan.bands()) {
        throw ValidationError("curve has " + std::to_string(curve.bands()) + " bands, band plan has " +
                              std::to_string(plan.bands()));
    }
    if (tap_count % 2 == 0) throw ValidationError("tap count must be odd, got " + std::to_string(tap_count));
    if (plan.centers_hz.back() >= sample_rate / 2.0) {
        throw ValidationError("highest band center is at or above Nyquist");
    }
    const std::size_t minimum = minimum_tap_count(plan, sample_rate);
    if (tap_count < minimum) {
        throw ValidationError("tap count " + std::to_string(tap_count) + " cannot resolve the " +
                              std::to_string(plan.centers_hz.front()) + " Hz band at " + std::to_string(sample_rate) +
                              " Hz; use at least " + std::to_string(minimum) + " taps");
    }

    std::vector<double> knots(curve.values());
    std::vector<double> taps = design_taps(knots, plan, sample_rate, tap_count);
    for (int pass = 0; pass < kKnotCorrectionPasses; ++pass) {
        bool moved = false;
        for (std::size_t i = 0; i < plan.bands(); ++i) {
            const double realized = 20.0 * std::log10(std::abs(zero_phase_amplitude(taps, plan.centers_hz[i], sample_rate)));
            const double error = curve[i] - realized;
            knots[i] += error;
            moved = moved || std::abs(error) > 1e-9;
        }
        if (!moved) break;
        taps = design_taps(knots, plan, sample_rate, tap_count);
    }
    return FirFilter{std::move(taps), sample_rate, (tap_count - 1) / 2};
}

double magnitude_db(const FirFilter& filter, double frequency_hz) {
    return 20.0 * std::log10(std::abs(zero_phase_amplitude(filter.taps, frequency_hz, filter.sample_rate)));
}

AudioClip apply_fir(const AudioClip& clip, const FirFilter& filter) {
    if (clip.sample_rate != filter.sample_rate) {
        throw ValidationError("filter is designed for " + std::to_string(filter.sample_rate) + " Hz, clip is " +
                              std::to_string(clip.sample_rate) + " Hz");
    }
    filter.validate();
    AudioClip out;
    out.sample_rate = clip.sample_rate;
    for (const auto& channel : clip.channels) {
        std::vector<float> filtered(channel.size());
        if (!channel.empty()) {
            const std::vector<double> full = kernels::convolve_fft(channel, filter.taps);
            for (std::size_t n = 0; n < channel.size(); ++n) filtered[n] = static_cast<float>(full[n + filter.latency]);
        }
        out.channels.push_back(std::move(filtered));
    }
    return out;
}

FirFilter load_fir(const std::filesystem::path& path, int sample_rate) {
    FirFilter filter;
    filter.sample_rate = sample_rate;
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") {
        const AudioClip ir = read_wav(path);
        filter.sample_rate = ir.sample_rate;
        if (ir.channels.empty()) throw FormatError(path.string() + ": impulse response has no channels");
        filter.taps.assign(ir.channels.front().begin(), ir.channels.front().end());
    } else {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream fields(line);
            double value;
            if (fields >> value) {
                filter.taps.push_back(value);
            } else if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) + ": not a number");
            }
        }
    }
    if (filter.taps.empty()) throw FormatError(path.string() + ": no filter coefficients");
    std::size_t peak = 0;
    for (std::size_t i = 1; i < filter.taps.size(); ++i) {
        if (std::abs(filter.taps[i]) > std::abs(filter.taps[peak])) peak = i;
    }
    filter.latency = peak;
    filter.validate();
    return filter;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), slope_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n != y_.size() || n == 0) throw ValidationError("interpolant needs matching, non-empty knots");
    if (n == 1) return;
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x_[k + 1] - x_[k];
        delta[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    if (n == 2) {
        slope_[0] = slope_[1] = delta[0];
        return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (sign(delta[k - 1]) * sign(delta[k]) <= 0) continue;
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        slope_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    // One-sided three-point end slopes, limited to preserve monotonicity.
    auto edge = [](double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (sign(d) != sign(d0)) return 0.0;
        if (sign(d0) != sign(d1) && std::abs(d) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return d;
    };
    slope_[0] = edge(h[0], h[1], delta[0], delta[1]);
    slope_[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double MonotoneCubic::operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * slope_[k] + (-2 * t3 + 3 * t2) * y_[k + 1] +
           (t3 - t2) * h * slope_[k + 1];
}

} // namespace prefevo
