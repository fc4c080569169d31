#pragma once

/// Simulated listener used in place of a human for automated runs.
///
/// The oracle prefers curves closer (weighted RMS in dB) to a hidden target
/// curve; perceptual noise and an indifference region make it imperfect.
/// The random kind ignores the stimuli and picks a side by coin flip.

#include <optional>
#include <string_view>
#include <vector>

#include "prefevo/curve.hpp"
#include "prefevo/ratings.hpp"
#include "prefevo/rng.hpp"

namespace prefevo {

enum class ListenerKind { Oracle, Random };

std::string_view to_string(ListenerKind kind);
ListenerKind listener_kind_from_string(std::string_view name);

struct ListenerModel {
    ListenerKind kind = ListenerKind::Oracle;
    Curve hidden_target;
    std::vector<double> band_weights; ///< empty means uniform
    double noise_sd = 0.5;            ///< dB, added to the distance difference
    double indifference_width = 0.25; ///< dB, half-width of the "Same" region
    double rating_scale = 0.5;        ///< dB, logistic slope of the rating magnitude

    void validate() const;
};

/// sqrt(sum w_i (g_i - t_i)^2 / sum w_i)
double perceptual_distance(const Curve& curve, const ListenerModel& model);

/// Rating for a given noise realization (dB). Positive advantage for A means
/// A is closer to the target and yields a rating on the "A is better" side.
BipolarRating judge_with_noise(const Curve& a, const Curve& b, const ListenerModel& model, double noise_db);

/// Draws one noise sample (oracle) or one coin flip (random).
BipolarRating judge(const Curve& a, const Curve& b, const ListenerModel& model, Rng& rng);

/// Absolute rating in [1, 5]: 5 at the target, falling with (noisy) distance.
EvaluationRating rate_absolute(const Curve& curve, const ListenerModel& model, Rng& rng);

} // namespace prefevo
