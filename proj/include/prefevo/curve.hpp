#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace prefevo {

inline constexpr std::size_t kDefaultBandCount = 10;

/// A target response curve: one gain in dB per frequency band.
/// Always finite; constructing from NaN/Inf throws ValidationError.
class Curve {
public:
    Curve() = default;
    explicit Curve(std::vector<double> gains_db);

    static Curve flat(std::size_t bands = kDefaultBandCount);

    std::size_t bands() const noexcept { return gains_.size(); }
    std::span<const double> gains() const noexcept { return gains_; }
    const std::vector<double>& values() const noexcept { return gains_; }
    double operator[](std::size_t band) const { return gains_[band]; }

    Curve negated() const;

    /// Bitwise equality of every gain.
    friend bool operator==(const Curve&, const Curve&) = default;

private:
    std::vector<double> gains_;
};

/// Per-band gain limits of the search space.
struct Bounds {
    Curve lower;
    Curve upper;

    /// Symmetric box [center - half_width, center + half_width] in every band.
    static Bounds around(const Curve& center, double half_width_db);

    std::size_t bands() const noexcept { return lower.bands(); }

    /// Throws ValidationError if band counts differ or lower > upper anywhere.
    void validate() const;

    /// Index of the first band outside [lower, upper], if any.
    std::optional<std::size_t> first_violation(const Curve& curve) const;
    bool contains(const Curve& curve) const { return !first_violation(curve).has_value(); }

    friend bool operator==(const Bounds&, const Bounds&) = default;
};

} // namespace prefevo
