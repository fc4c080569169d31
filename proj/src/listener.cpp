#include "prefevo/listener.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prefevo/errors.hpp"

namespace prefevo {

BipolarRating::BipolarRating(double value) : value_(value) {
    if (!(value >= -1.0 && value <= 1.0)) {
        throw ValidationError("bipolar rating must be in [-1, 1], got " + std::to_string(value));
    }
}

EvaluationRating::EvaluationRating(double value) : value_(value) {
    if (!(value >= kMin && value <= kMax)) {
        throw ValidationError("evaluation rating must be in [1, 5], got " + std::to_string(value));
    }
}

Verdict resolve_verdict(BipolarRating rating, bool reference_is_a) {
    const double v = rating.value();
    if (v == 0.0) return Verdict::Tie;
    const bool a_preferred = v < 0.0;
    return a_preferred == reference_is_a ? Verdict::Reference : Verdict::Trial;
}

std::string_view to_string(ListenerKind kind) {
    return kind == ListenerKind::Oracle ? "oracle" : "random";
}

ListenerKind listener_kind_from_string(std::string_view name) {
    if (name == "oracle") return ListenerKind::Oracle;
    if (name == "random") return ListenerKind::Random;
    throw ValidationError("unknown listener kind '" + std::string(name) + "'");
}

void ListenerModel::validate() const {
    std::vector<std::string> issues;
    if (hidden_target.bands() == 0) issues.emplace_back("listener: hidden target is empty");
    if (!band_weights.empty()) {
        if (band_weights.size() != hidden_target.bands()) {
            issues.emplace_back("listener: band_weights length differs from hidden target");
        }
        bool any_positive = false;
        for (double w : band_weights) {
            if (!std::isfinite(w) || w < 0.0) issues.emplace_back("listener: band weights must be finite and >= 0");
            any_positive = any_positive || w > 0.0;
        }
        if (!any_positive) issues.emplace_back("listener: band weights are all zero");
    }
    if (!(noise_sd >= 0.0) || std::isinf(noise_sd)) issues.emplace_back("listener: noise_sd must be finite and >= 0");
    if (!(indifference_width >= 0.0)) issues.emplace_back("listener: indifference_width must be >= 0");
    if (!(rating_scale > 0.0)) issues.emplace_back("listener: rating_scale must be > 0");
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

double perceptual_distance(const Curve& curve, const ListenerModel& model) {
    const Curve& target = model.hidden_target;
    if (curve.bands() != target.bands()) throw ValidationError("perceptual_distance: band count mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < curve.bands(); ++i) {
        const double w = model.band_weights.empty() ? 1.0 : model.band_weights[i];
        const double d = curve[i] - target[i];
        num += w * d * d;
        den += w;
    }
    return std::sqrt(num / den);
}

BipolarRating judge_with_noise(const Curve& a, const Curve& b, const ListenerModel& model, double noise_db) {
    const double advantage_a = perceptual_distance(b, model) - perceptual_distance(a, model) + noise_db;
    if (std::abs(advantage_a) < model.indifference_width || advantage_a == 0.0) return BipolarRating::same();
    // Logistic map onto (-1, 1), negative when A is preferred.
    const double magnitude = std::tanh(std::abs(advantage_a) / (2.0 * model.rating_scale));
    return BipolarRating(advantage_a > 0.0 ? -magnitude : magnitude);
}

BipolarRating judge(const Curve& a, const Curve& b, const ListenerModel& model, Rng& rng) {
    if (model.kind == ListenerKind::Random) {
        return BipolarRating(rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
    const double noise = model.noise_sd > 0.0 ? model.noise_sd * rng.normal() : 0.0;
    return judge_with_noise(a, b, model, noise);
}

EvaluationRating rate_absolute(const Curve& curve, const ListenerModel& model, Rng& rng) {
    if (model.kind == ListenerKind::Random) return EvaluationRating(rng.uniform(1.0, 5.0));
    double distance = perceptual_distance(curve, model);
    if (model.noise_sd > 0.0) distance = std::max(0.0, distance + model.noise_sd * rng.normal());
    return EvaluationRating(5.0 - 4.0 * std::tanh(distance / 2.0));
}

} // namespace prefevo
