#pragma once

/// Differential-evolution operators over bounded gain vectors.
///
/// Fitness is external: the caller supplies a verdict for each
/// (reference, trial) pair, typically from a listener. Every random draw goes
/// through the injected Rng in a fixed order so a run can be replayed exactly:
/// member order shuffle, then per member the donor triple, then one crossover
/// draw per band.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "prefevo/curve.hpp"
#include "prefevo/rng.hpp"

namespace prefevo {

struct DEParams {
    double scale_factor = 0.2;   ///< F, in [0, 2]
    double crossover_rate = 0.7; ///< C, in [0, 1]
    int population_size = 5;     ///< at least 4 (three donors plus the target)
    int generations = 8;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const DEParams&, const DEParams&) = default;
};

enum class Verdict { Reference, Trial, Tie };

std::string_view to_string(Verdict verdict);
Verdict verdict_from_string(std::string_view name);

struct Member {
    std::string id;
    Curve curve;
    friend bool operator==(const Member&, const Member&) = default;
};

struct Population {
    int generation = 0;
    std::vector<Member> members;

    std::size_t size() const noexcept { return members.size(); }
    /// Throws ValidationError for an unknown id.
    std::size_t index_of(std::string_view id) const;

    friend bool operator==(const Population&, const Population&) = default;
};

/// Stable member id for population slot `index`.
std::string member_id(std::size_t index);

/// Generation 0: every gene drawn uniformly from [lower, upper].
/// `initial` is not inserted; it is only checked against the bounds.
Population init_population(const Curve& initial, const Bounds& bounds, const DEParams& params, Rng& rng);

/// Population positions used to build one mutant: base + F * (plus - minus).
struct Donors {
    std::size_t base = 0;
    std::size_t plus = 0;
    std::size_t minus = 0;
    friend bool operator==(const Donors&, const Donors&) = default;
};

/// Three mutually distinct positions, all different from `target_index`.
Donors draw_donors(std::size_t population_size, std::size_t target_index, Rng& rng);

/// base + F * (plus - minus), without clipping.
Curve mutate(const Population& population, const Donors& donors, double scale_factor);
Curve mutate(const Population& population, std::size_t target_index, double scale_factor, Rng& rng);

/// Per gene: mutant if uniform() < C, reference otherwise.
Curve crossover(const Curve& reference, const Curve& mutant, double crossover_rate, Rng& rng);

Curve clip(const Curve& trial, const Bounds& bounds);

/// Replaces the reference member's curve with `trial` only on Verdict::Trial.
Population select(const Population& population, std::string_view reference_id, const Curve& trial,
                  Verdict verdict);

/// A clipped trial vector together with how it was built.
struct TrialVector {
    Curve curve;
    Donors donors;
};

/// mutate -> crossover -> clip for the member at `target_index`.
TrialVector make_trial(const Population& population, std::size_t target_index, const DEParams& params,
                       const Bounds& bounds, Rng& rng);

/// Random visiting order for one generation.
std::vector<std::size_t> member_order(std::size_t population_size, Rng& rng);

using Fitness = std::function<Verdict(const Curve& reference, const Curve& challenger)>;

/// Called after each selection inside step_generation.
struct TrialEvent {
    std::size_t member_index;
    Curve reference;
    TrialVector trial;
    Verdict verdict;
};
using TrialObserver = std::function<void(const TrialEvent&)>;

/// One generation: every member challenged once, in random order, with the
/// population updated after each verdict. Issues exactly population_size
/// fitness calls, then increments the generation.
///
/// Works in place. If `fitness` throws, the exception propagates and
/// `population` holds the result of every trial completed before it.
void step_generation(Population& population, const DEParams& params, const Bounds& bounds,
                     const Fitness& fitness, Rng& rng, const TrialObserver& observer = {});

} // namespace prefevo
