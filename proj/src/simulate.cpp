#include "prefevo/simulate.hpp"

#include <omp.h>

#include <cstdio>
#include <fstream>

#include "prefevo/event_log.hpp"

namespace prefevo {

namespace {

constexpr std::uint64_t kListenerStream = 0x4c495354454e4552ULL;
constexpr std::uint64_t kTargetStream = 0x544152474554ULL;

Rng trial_rng(const SimulatedListener& listener, std::string_view key) {
    return Rng(mix_seed(listener.seed, fnv1a(key)));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

} // namespace

SimulationSetup simulation_setup(const ExperimentConfig& base, std::uint64_t batch_seed, std::size_t index) {
    SimulationSetup setup;
    char id[32];
    std::snprintf(id, sizeof id, "session_%03zu", index);
    setup.session_id = id;
    setup.config = base;
    const std::uint64_t session_seed = mix_seed(batch_seed, index);
    setup.config.de.seed = session_seed;
    Rng target_rng(mix_seed(session_seed, kTargetStream));
    setup.listener.model = make_listener(setup.config, target_rng);
    setup.listener.seed = mix_seed(session_seed, kListenerStream);
    return setup;
}

SessionState respond(const SessionState& state, const SimulatedListener& listener) {
    const PendingTrial pending = next_trial(state);
    if (const auto* trial = std::get_if<ComparisonTrial>(&pending)) {
        Rng rng = trial_rng(listener, trial->trial_id);
        return submit_comparison(state, trial->trial_id, judge(trial->curve_a(), trial->curve_b(), listener.model, rng));
    }
    const auto& screen = std::get<EvaluationScreen>(pending);
    Rng rng = trial_rng(listener, screen.trial_id);
    std::vector<EvaluationRating> ratings;
    for (const auto& stimulus : screen.stimuli) ratings.push_back(rate_absolute(state.curve_of(stimulus), listener.model, rng));
    return submit_evaluation(state, screen.trial_id, ratings);
}

SessionState drive(SessionState state, const SimulatedListener& listener, std::size_t max_steps) {
    for (std::size_t step = 0; step < max_steps && state.stage != Stage::Done; ++step) state = respond(state, listener);
    return state;
}

std::vector<BenchmarkRecord> run_benchmark(const SessionState& done, const SimulatedListener& listener,
                                           const std::string& session_id) {
    std::vector<BenchmarkRecord> records;
    const Curve best = done.curve_of(done.best_ranked.value());
    for (const auto& track : done.config.tracks) {
        Rng rng = trial_rng(listener, "benchmark/" + track.id);
        records.push_back({session_id, track.id, System::Initial,
                           rate_absolute(done.config.initial_curve, listener.model, rng).value()});
        records.push_back({session_id, track.id, System::BestRanked, rate_absolute(best, listener.model, rng).value()});
    }
    return records;
}

SimulationResult simulate_session(const SimulationSetup& setup) {
    SimulationResult result;
    result.session_id = setup.session_id;
    result.listener = setup.listener.model;
    result.state = drive(create_session(setup.config), setup.listener);
    result.benchmark = run_benchmark(result.state, setup.listener, setup.session_id);
    return result;
}

std::vector<SimulationResult> simulate_batch(const ExperimentConfig& base, std::size_t sessions, std::uint64_t seed) {
    base.validate();
    std::vector<SimulationResult> results(sessions);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(sessions); ++i) {
        try {
            results[static_cast<std::size_t>(i)] =
                simulate_session(simulation_setup(base, seed, static_cast<std::size_t>(i)));
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

std::vector<SimulationResult> simulate_batch_serial(const ExperimentConfig& base, std::size_t sessions,
                                                    std::uint64_t seed) {
    base.validate();
    std::vector<SimulationResult> results;
    results.reserve(sessions);
    for (std::size_t i = 0; i < sessions; ++i) results.push_back(simulate_session(simulation_setup(base, seed, i)));
    return results;
}

void write_simulation_logs(const std::filesystem::path& dir, const std::vector<SimulationResult>& results) {
    std::filesystem::create_directories(dir);
    std::string bench;
    for (const auto& r : results) {
        const auto session_dir = dir / r.session_id;
        std::filesystem::create_directories(session_dir);
        write_text(session_dir / "events.jsonl", render_event_log(r.state));
        write_text(session_dir / "snapshot.json", save(r.state));
        for (const auto& b : r.benchmark) bench += benchmark_to_json(b).dump() + "\n";
    }
    write_text(dir / "benchmark.jsonl", bench);
}

} // namespace prefevo
