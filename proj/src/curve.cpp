#include "prefevo/curve.hpp"

#include <cmath>
#include <string>

#include "prefevo/errors.hpp"

namespace prefevo {

Curve::Curve(std::vector<double> gains_db) : gains_(std::move(gains_db)) {
    for (std::size_t i = 0; i < gains_.size(); ++i) {
        if (!std::isfinite(gains_[i])) {
            throw ValidationError("curve band " + std::to_string(i) + " is not finite");
        }
    }
}

Curve Curve::flat(std::size_t bands) { return Curve(std::vector<double>(bands, 0.0)); }

Curve Curve::negated() const {
    std::vector<double> out(gains_.size());
    for (std::size_t i = 0; i < gains_.size(); ++i) out[i] = -gains_[i];
    return Curve(std::move(out));
}

Bounds Bounds::around(const Curve& center, double half_width_db) {
    std::vector<double> lo(center.bands()), hi(center.bands());
    for (std::size_t i = 0; i < center.bands(); ++i) {
        lo[i] = center[i] - half_width_db;
        hi[i] = center[i] + half_width_db;
    }
    return Bounds{Curve(std::move(lo)), Curve(std::move(hi))};
}

void Bounds::validate() const {
    std::vector<std::string> issues;
    if (lower.bands() != upper.bands()) {
        issues.push_back("bounds: lower has " + std::to_string(lower.bands()) +
                         " bands but upper has " + std::to_string(upper.bands()));
    } else {
        if (lower.bands() == 0) issues.emplace_back("bounds: no bands");
        for (std::size_t i = 0; i < lower.bands(); ++i) {
            if (lower[i] > upper[i]) {
                issues.push_back("bounds: band " + std::to_string(i) + " has lower " +
                                 std::to_string(lower[i]) + " > upper " + std::to_string(upper[i]));
            }
        }
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::optional<std::size_t> Bounds::first_violation(const Curve& curve) const {
    if (curve.bands() != bands()) {
        throw ValidationError("curve has " + std::to_string(curve.bands()) + " bands, bounds have " +
                              std::to_string(bands()));
    }
    for (std::size_t i = 0; i < curve.bands(); ++i) {
        if (curve[i] < lower[i] || curve[i] > upper[i]) return i;
    }
    return std::nullopt;
}

} // namespace prefevo
