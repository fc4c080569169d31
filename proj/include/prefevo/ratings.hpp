#pragma once

#include "prefevo/de.hpp"

namespace prefevo {

/// Paired-comparison rating: -1 "A is better", 0 "Same", +1 "B is better".
class BipolarRating {
public:
    /// Throws ValidationError outside [-1, 1] or for NaN.
    explicit BipolarRating(double value);
    double value() const noexcept { return value_; }
    static BipolarRating same() { return BipolarRating(0.0); }

private:
    double value_;
};

/// Absolute overall-quality rating on the continuous 1 (Bad) .. 5 (Excellent) scale.
class EvaluationRating {
public:
    static constexpr double kMin = 1.0;
    static constexpr double kMax = 5.0;

    explicit EvaluationRating(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// Binarizes a paired rating given which stimulus carried the reference.
/// A rating exactly at the midpoint is a Tie.
Verdict resolve_verdict(BipolarRating rating, bool reference_is_a);

} // namespace prefevo
