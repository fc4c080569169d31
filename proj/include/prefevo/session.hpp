#pragma once

/// Experiment state machine for one listener.
///
/// A session runs a comparison stage (one paired trial per member per
/// generation, driving the evolution) followed by an evaluation stage (one
/// multi-stimulus screen per track with the final members plus a flat
/// anchor). States are values: every command takes the latest snapshot and
/// returns a new one, leaving the input untouched when it throws.
///
/// Random draws come from a single stream in a fixed order. At the start of
/// each generation: member visiting order, then the track rotation. Per
/// comparison trial: donor triple, crossover draws, A/B assignment. On entering
/// evaluation: track order, then one stimulus order per screen.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prefevo/config.hpp"
#include "prefevo/de.hpp"
#include "prefevo/ratings.hpp"
#include "prefevo/rng.hpp"

namespace prefevo {

enum class Stage { Comparison, Evaluation, Done };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);

inline constexpr std::string_view kAnchorId = "anchor";

/// One paired comparison: a member (reference) against its trial vector.
struct ComparisonTrial {
    std::string trial_id;
    int generation = 0;
    std::string member_id;
    Curve reference;
    Curve challenger;
    Donors donors;
    bool reference_is_a = true;
    std::string track_id;
    bool degenerate = false; ///< challenger equals the reference

    const Curve& curve_a() const { return reference_is_a ? reference : challenger; }
    const Curve& curve_b() const { return reference_is_a ? challenger : reference; }

    friend bool operator==(const ComparisonTrial&, const ComparisonTrial&) = default;
};

/// One multi-stimulus screen. `stimuli` lists member ids and the anchor in
/// presentation order; ratings are submitted in the same order.
struct EvaluationScreen {
    std::string trial_id;
    std::string track_id;
    std::vector<std::string> stimuli;

    friend bool operator==(const EvaluationScreen&, const EvaluationScreen&) = default;
};

using PendingTrial = std::variant<ComparisonTrial, EvaluationScreen>;

struct ComparisonRecord {
    ComparisonTrial trial;
    double rating = 0.0;
    Verdict verdict = Verdict::Tie;
    std::string timestamp;

    friend bool operator==(const ComparisonRecord&, const ComparisonRecord&) = default;
};

struct EvaluationRecord {
    EvaluationScreen screen;
    std::vector<Curve> curves; ///< parallel to screen.stimuli
    std::vector<double> ratings;
    std::string timestamp;

    friend bool operator==(const EvaluationRecord&, const EvaluationRecord&) = default;
};

struct Progress {
    std::size_t completed = 0;
    std::size_t total = 0;
    Stage stage = Stage::Comparison;
};

struct SessionState {
    ExperimentConfig config;
    std::string config_hash;
    Stage stage = Stage::Comparison;
    Population population;
    std::vector<Population> history; ///< history[g] is the pool at the start of generation g
    Rng rng;

    // Comparison schedule for the current generation.
    std::vector<std::size_t> member_order;
    std::vector<std::string> track_rotation;
    std::size_t position = 0;
    std::optional<ComparisonTrial> pending;

    // Evaluation schedule.
    std::vector<EvaluationScreen> screens;
    std::size_t screen_position = 0;

    std::vector<ComparisonRecord> comparisons;
    std::vector<EvaluationRecord> evaluations;
    std::optional<std::string> best_ranked;

    std::string created_at;
    std::string updated_at;

    Progress progress() const;
    /// Curve behind a stimulus id: a member of the current population or the flat anchor.
    Curve curve_of(std::string_view stimulus_id) const;

    friend bool operator==(const SessionState& a, const SessionState& b);
};

/// Generation 0 initialized and the first trial scheduled.
/// Throws ValidationError listing every config problem.
SessionState create_session(const ExperimentConfig& config, std::string created_at = {});

/// The pending trial. Stable until a rating is submitted. Throws StateError once Done.
PendingTrial next_trial(const SessionState& state);

/// Throws StateError for a trial id that is not the pending comparison.
SessionState submit_comparison(const SessionState& state, std::string_view trial_id, BipolarRating rating,
                               std::string timestamp = {});

/// One rating per stimulus, in presentation order.
SessionState submit_evaluation(const SessionState& state, std::string_view trial_id,
                               std::span<const EvaluationRating> ratings, std::string timestamp = {});

/// Mean evaluation rating per member id over all recorded screens.
std::vector<std::pair<std::string, double>> mean_member_ratings(const SessionState& state);

/// Versioned JSON snapshot; load(save(s)) == s.
std::string save(const SessionState& state);
/// Throws FormatError naming the field that failed.
SessionState load(std::string_view snapshot);

} // namespace prefevo
