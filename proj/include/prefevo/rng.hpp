#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace prefevo {

/// SplitMix64 finalizer; derives independent stream seeds from (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// FNV-1a 64-bit hash, used for stable seeds and opaque identifiers.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

/// Seeded random source with a serializable state.
///
/// All variates are derived from raw 64-bit engine output with explicit
/// formulas rather than <random> distributions, whose algorithms are
/// implementation-defined. A given seed therefore yields the same stream on
/// every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi); returns lo exactly when lo == hi.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), unbiased (rejection sampling). n must be > 0.
    std::size_t below(std::size_t n);

    /// Standard normal variate (Box-Muller, one output per call).
    double normal();

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

    /// Textual engine state; `from_state` restores an identical continuation.
    std::string state() const;
    static Rng from_state(const std::string& state);

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace prefevo
