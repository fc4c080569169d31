#pragma once

/// Full sessions driven by a simulated listener.
///
/// The listener's noise for each trial is drawn from a stream derived from
/// (listener seed, trial id), never from the session's own generator, so a
/// session can be interrupted, saved and resumed at any point and still see
/// the same answers.

#include <cstdint>
#include <string>
#include <vector>

#include "prefevo/analysis.hpp"
#include "prefevo/config.hpp"
#include "prefevo/listener.hpp"
#include "prefevo/session.hpp"

namespace prefevo {

struct SimulatedListener {
    ListenerModel model;
    std::uint64_t seed = 0;
};

/// Session `index` of a batch: config with its own seed plus its listener.
struct SimulationSetup {
    std::string session_id;
    ExperimentConfig config;
    SimulatedListener listener;
};

SimulationSetup simulation_setup(const ExperimentConfig& base, std::uint64_t batch_seed, std::size_t index);

/// Answers the pending trial and returns the next state.
SessionState respond(const SessionState& state, const SimulatedListener& listener);

/// Responds until Done or `max_steps` submissions have been made.
SessionState drive(SessionState state, const SimulatedListener& listener,
                   std::size_t max_steps = static_cast<std::size_t>(-1));

struct SimulationResult {
    std::string session_id;
    SessionState state;
    ListenerModel listener;
    std::vector<BenchmarkRecord> benchmark;
};

/// Rates the initial and best-ranked curves on every track.
std::vector<BenchmarkRecord> run_benchmark(const SessionState& done, const SimulatedListener& listener,
                                           const std::string& session_id);

SimulationResult simulate_session(const SimulationSetup& setup);

/// `sessions` independent sessions, parallel over sessions (OpenMP).
std::vector<SimulationResult> simulate_batch(const ExperimentConfig& base, std::size_t sessions, std::uint64_t seed);

/// Serial reference for simulate_batch; identical results.
std::vector<SimulationResult> simulate_batch_serial(const ExperimentConfig& base, std::size_t sessions,
                                                    std::uint64_t seed);

/// Writes `<dir>/<session>/{events.jsonl,snapshot.json}` and `<dir>/benchmark.jsonl`.
void write_simulation_logs(const std::filesystem::path& dir, const std::vector<SimulationResult>& results);

} // namespace prefevo
