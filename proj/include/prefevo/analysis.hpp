#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "prefevo/de.hpp"

namespace prefevo {

struct SessionHistory {
    std::string session_id;
    std::vector<Population> history; ///< generation 0 .. final
};

/// Per-band sample (n - 1) standard deviation of the pool, [generation][band].
/// Throws ValidationError for an empty history or pools smaller than two.
std::vector<std::vector<double>> population_sd(std::span<const Population> history);

struct ConvergenceTable {
    std::vector<std::string> sessions;
    std::vector<std::vector<std::vector<double>>> per_session; ///< [session][generation][band]
    std::vector<std::vector<double>> per_session_average;      ///< [session][generation], mean over bands
    std::vector<std::vector<double>> mean;                     ///< [generation][band], mean over sessions
    std::vector<double> band_average;                          ///< [generation], mean over bands of `mean`

    std::size_t generations() const noexcept { return band_average.size(); }
    std::size_t bands() const noexcept { return mean.empty() ? 0 : mean.front().size(); }
};

/// One row per judged generation: pools 0 .. G-1 of each history (the final
/// pool goes to evaluation only). Sessions must share generation and band counts.
ConvergenceTable convergence_table(std::span<const SessionHistory> sessions);

/// session,generation,band,sd_db
std::string convergence_csv(const ConvergenceTable& table);
/// generation,band_0..band_{B-1},band_average  (averaged over sessions)
std::string convergence_summary_csv(const ConvergenceTable& table);
/// Whitespace-separated columns for plotting, '#' header.
std::string convergence_series(const ConvergenceTable& table);

enum class System { Initial, BestRanked };
std::string_view to_string(System system);
System system_from_string(std::string_view name);

/// One absolute rating of a system on one track in a benchmark run.
struct BenchmarkRecord {
    std::string session;
    std::string track;
    System system = System::Initial;
    double rating = 0.0;
};

struct PreferenceSummary {
    double initial_mean = 0.0;
    double initial_sd = 0.0;
    double best_mean = 0.0;
    double best_sd = 0.0;
    std::size_t initial_count = 0;
    std::size_t best_count = 0;
    std::size_t pairs = 0; ///< (session, track) pairs rating both systems
    std::size_t wins = 0;  ///< best ranked rated strictly higher
    std::size_t losses = 0;
    std::size_t ties = 0;
    double win_proportion = 0.5; ///< wins / (wins + losses); 0.5 when every pair ties
    double odds_ratio = 1.0;     ///< (wins + 0.5) / (losses + 0.5)
    double odds_low = 0.0;       ///< 95 % Clopper-Pearson interval, as odds
    double odds_high = 0.0;
};

/// Descriptive comparison of the best-ranked curve against the initial curve.
/// Throws ValidationError if either system has no records.
PreferenceSummary preference_summary(std::span<const BenchmarkRecord> records);

nlohmann::json to_json(const PreferenceSummary& summary);
nlohmann::json benchmark_to_json(const BenchmarkRecord& record);
BenchmarkRecord benchmark_from_json(const nlohmann::json& j);

/// Population history recorded in an event log (session + generation events).
std::vector<Population> history_from_events(std::span<const nlohmann::json> events);

struct LogDirectory {
    std::vector<SessionHistory> sessions;
    std::vector<BenchmarkRecord> benchmark;
};

/// Every `<dir>/<session>/events.jsonl`, plus `<dir>/benchmark.jsonl` if present.
/// Throws ValidationError when the directory holds no session logs.
LogDirectory read_log_directory(const std::filesystem::path& dir);

} // namespace prefevo
