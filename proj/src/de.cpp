#include "prefevo/de.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prefevo/errors.hpp"

namespace prefevo {

void DEParams::validate() const {
    std::vector<std::string> issues;
    if (!(scale_factor >= 0.0 && scale_factor <= 2.0)) {
        issues.push_back("scale_factor must be in [0, 2], got " + std::to_string(scale_factor));
    }
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
        issues.push_back("crossover_rate must be in [0, 1], got " + std::to_string(crossover_rate));
    }
    if (population_size < 4) {
        issues.push_back("population_size must be at least 4, got " + std::to_string(population_size));
    }
    if (generations < 1) {
        issues.push_back("generations must be positive, got " + std::to_string(generations));
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::Reference: return "reference";
    case Verdict::Trial: return "trial";
    case Verdict::Tie: return "tie";
    }
    return "?";
}

Verdict verdict_from_string(std::string_view name) {
    if (name == "reference") return Verdict::Reference;
    if (name == "trial") return Verdict::Trial;
    if (name == "tie") return Verdict::Tie;
    throw FormatError("unknown verdict '" + std::string(name) + "'");
}

std::size_t Population::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i].id == id) return i;
    }
    throw ValidationError("no member with id '" + std::string(id) + "'");
}

std::string member_id(std::size_t index) { return "m" + std::to_string(index); }

Population init_population(const Curve& initial, const Bounds& bounds, const DEParams& params, Rng& rng) {
    params.validate();
    bounds.validate();
    if (auto band = bounds.first_violation(initial)) {
        throw ValidationError("initial curve band " + std::to_string(*band) + " (" +
                              std::to_string(initial[*band]) + " dB) is outside [" +
                              std::to_string(bounds.lower[*band]) + ", " +
                              std::to_string(bounds.upper[*band]) + "]");
    }
    Population population;
    population.members.reserve(static_cast<std::size_t>(params.population_size));
    for (std::size_t m = 0; m < static_cast<std::size_t>(params.population_size); ++m) {
        std::vector<double> gains(bounds.bands());
        for (std::size_t b = 0; b < gains.size(); ++b) gains[b] = rng.uniform(bounds.lower[b], bounds.upper[b]);
        population.members.push_back({member_id(m), Curve(std::move(gains))});
    }
    return population;
}

Donors draw_donors(std::size_t population_size, std::size_t target_index, Rng& rng) {
    if (population_size < 4) {
        throw ValidationError("mutation needs at least 4 members, population has " +
                              std::to_string(population_size));
    }
    if (target_index >= population_size) throw ValidationError("target index out of range");
    // Partial Fisher-Yates over the positions other than the target.
    std::vector<std::size_t> pool;
    pool.reserve(population_size - 1);
    for (std::size_t i = 0; i < population_size; ++i) {
        if (i != target_index) pool.push_back(i);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t pick = k + rng.below(pool.size() - k);
        std::swap(pool[k], pool[pick]);
    }
    return Donors{pool[0], pool[1], pool[2]};
}

Curve mutate(const Population& population, const Donors& donors, double scale_factor) {
    const Curve& a = population.members.at(donors.base).curve;
    const Curve& b = population.members.at(donors.plus).curve;
    const Curve& c = population.members.at(donors.minus).curve;
    std::vector<double> out(a.bands());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + scale_factor * (b[i] - c[i]);
    return Curve(std::move(out));
}

Curve mutate(const Population& population, std::size_t target_index, double scale_factor, Rng& rng) {
    if (!(scale_factor >= 0.0 && scale_factor <= 2.0)) {
        throw ValidationError("scale_factor must be in [0, 2]");
    }
    return mutate(population, draw_donors(population.size(), target_index, rng), scale_factor);
}

Curve crossover(const Curve& reference, const Curve& mutant, double crossover_rate, Rng& rng) {
    if (reference.bands() != mutant.bands()) {
        throw ValidationError("crossover: reference has " + std::to_string(reference.bands()) +
                              " bands, mutant has " + std::to_string(mutant.bands()));
    }
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
        throw ValidationError("crossover_rate must be in [0, 1]");
    }
    std::vector<double> out(reference.bands());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = rng.uniform() < crossover_rate ? mutant[i] : reference[i];
    }
    return Curve(std::move(out));
}

Curve clip(const Curve& trial, const Bounds& bounds) {
    if (trial.bands() != bounds.bands()) throw ValidationError("clip: band count mismatch");
    std::vector<double> out(trial.values());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::max(std::min(out[i], bounds.upper[i]), bounds.lower[i]);
    }
    return Curve(std::move(out));
}

Population select(const Population& population, std::string_view reference_id, const Curve& trial,
                  Verdict verdict) {
    const std::size_t index = population.index_of(reference_id);
    Population next = population;
    if (verdict == Verdict::Trial) next.members[index].curve = trial;
    return next;
}

TrialVector make_trial(const Population& population, std::size_t target_index, const DEParams& params,
                       const Bounds& bounds, Rng& rng) {
    const Donors donors = draw_donors(population.size(), target_index, rng);
    const Curve mutant = mutate(population, donors, params.scale_factor);
    const Curve mixed = crossover(population.members[target_index].curve, mutant, params.crossover_rate, rng);
    return TrialVector{clip(mixed, bounds), donors};
}

std::vector<std::size_t> member_order(std::size_t population_size, Rng& rng) {
    std::vector<std::size_t> order(population_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    return order;
}

void step_generation(Population& population, const DEParams& params, const Bounds& bounds,
                     const Fitness& fitness, Rng& rng, const TrialObserver& observer) {
    params.validate();
    if (population.size() != static_cast<std::size_t>(params.population_size)) {
        throw ValidationError("population has " + std::to_string(population.size()) + " members, expected " +
                              std::to_string(params.population_size));
    }
    for (const std::size_t index : member_order(population.size(), rng)) {
        TrialVector trial = make_trial(population, index, params, bounds, rng);
        const Curve reference = population.members[index].curve;
        const Verdict verdict = fitness(reference, trial.curve);
        if (verdict == Verdict::Trial) population.members[index].curve = trial.curve;
        if (observer) observer(TrialEvent{index, reference, std::move(trial), verdict});
    }
    ++population.generation;
}

} // namespace prefevo
