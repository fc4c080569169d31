#include "prefevo/analysis.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "prefevo/errors.hpp"
#include "prefevo/event_log.hpp"

namespace prefevo {

using nlohmann::json;

namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace

std::vector<std::vector<double>> population_sd(std::span<const Population> history) {
    if (history.empty()) throw ValidationError("population history is empty");
    std::vector<std::vector<double>> out;
    for (const auto& pool : history) {
        if (pool.size() < 2) throw ValidationError("standard deviation needs at least two members");
        const std::size_t bands = pool.members.front().curve.bands();
        std::vector<double> sds(bands);
        std::vector<double> column(pool.size());
        for (std::size_t b = 0; b < bands; ++b) {
            for (std::size_t m = 0; m < pool.size(); ++m) column[m] = pool.members[m].curve[b];
            sds[b] = sample_sd(column);
        }
        out.push_back(std::move(sds));
    }
    return out;
}

ConvergenceTable convergence_table(std::span<const SessionHistory> sessions) {
    if (sessions.empty()) throw ValidationError("no sessions to analyze");
    ConvergenceTable table;
    for (const auto& s : sessions) {
        table.sessions.push_back(s.session_id);
        if (s.history.size() < 2) throw ValidationError("session '" + s.session_id + "' has no completed generation");
        // The last pool is only evaluated, never judged in a generation.
        table.per_session.push_back(population_sd(std::span(s.history).first(s.history.size() - 1)));
        const auto& sds = table.per_session.back();
        if (sds.size() != table.per_session.front().size() || sds.front().size() != table.per_session.front().front().size()) {
            throw ValidationError("session '" + s.session_id + "' differs in generation or band count");
        }
        std::vector<double> averages;
        for (const auto& row : sds) averages.push_back(mean_of(row));
        table.per_session_average.push_back(std::move(averages));
    }
    const std::size_t generations = table.per_session.front().size();
    const std::size_t bands = table.per_session.front().front().size();
    table.mean.assign(generations, std::vector<double>(bands, 0.0));
    for (std::size_t g = 0; g < generations; ++g) {
        for (std::size_t b = 0; b < bands; ++b) {
            double sum = 0.0;
            for (const auto& s : table.per_session) sum += s[g][b];
            table.mean[g][b] = sum / static_cast<double>(table.per_session.size());
        }
        table.band_average.push_back(mean_of(table.mean[g]));
    }
    return table;
}

std::string convergence_csv(const ConvergenceTable& t) {
    std::ostringstream out;
    out.precision(17);
    out << "session,generation,band,sd_db\n";
    for (std::size_t s = 0; s < t.per_session.size(); ++s) {
        for (std::size_t g = 0; g < t.per_session[s].size(); ++g) {
            for (std::size_t b = 0; b < t.per_session[s][g].size(); ++b) {
                out << t.sessions[s] << ',' << g << ',' << b << ',' << t.per_session[s][g][b] << '\n';
            }
        }
    }
    return out.str();
}

std::string convergence_summary_csv(const ConvergenceTable& t) {
    std::ostringstream out;
    out.precision(17);
    out << "generation";
    for (std::size_t b = 0; b < t.bands(); ++b) out << ",band_" << b;
    out << ",band_average\n";
    for (std::size_t g = 0; g < t.generations(); ++g) {
        out << g;
        for (double v : t.mean[g]) out << ',' << v;
        out << ',' << t.band_average[g] << '\n';
    }
    return out.str();
}

std::string convergence_series(const ConvergenceTable& t) {
    std::ostringstream out;
    out.precision(10);
    out << "# generation band_average";
    for (std::size_t b = 0; b < t.bands(); ++b) out << " band_" << b;
    out << '\n';
    for (std::size_t g = 0; g < t.generations(); ++g) {
        out << g << ' ' << t.band_average[g];
        for (double v : t.mean[g]) out << ' ' << v;
        out << '\n';
    }
    return out.str();
}

std::string_view to_string(System system) { return system == System::Initial ? "initial" : "best_ranked"; }

System system_from_string(std::string_view name) {
    if (name == "initial") return System::Initial;
    if (name == "best_ranked") return System::BestRanked;
    throw FormatError("unknown system '" + std::string(name) + "'");
}

PreferenceSummary preference_summary(std::span<const BenchmarkRecord> records) {
    std::vector<double> initial, best;
    std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> paired;
    for (const auto& r : records) {
        auto& slot = paired[{r.session, r.track}];
        if (r.system == System::Initial) {
            initial.push_back(r.rating);
            slot.first.push_back(r.rating);
        } else {
            best.push_back(r.rating);
            slot.second.push_back(r.rating);
        }
    }
    if (initial.empty()) throw ValidationError("benchmark has no ratings for the initial curve");
    if (best.empty()) throw ValidationError("benchmark has no ratings for the best-ranked curve");

    PreferenceSummary s;
    s.initial_mean = mean_of(initial);
    s.initial_sd = sample_sd(initial);
    s.best_mean = mean_of(best);
    s.best_sd = sample_sd(best);
    s.initial_count = initial.size();
    s.best_count = best.size();
    for (const auto& [key, ratings] : paired) {
        if (ratings.first.empty() || ratings.second.empty()) continue;
        const double a = mean_of(ratings.first);
        const double b = mean_of(ratings.second);
        ++s.pairs;
        if (b > a) {
            ++s.wins;
        } else if (b < a) {
            ++s.losses;
        } else {
            ++s.ties;
        }
    }
    const std::size_t decided = s.wins + s.losses;
    s.win_proportion = decided ? static_cast<double>(s.wins) / static_cast<double>(decided) : 0.5;
    s.odds_ratio = (static_cast<double>(s.wins) + 0.5) / (static_cast<double>(s.losses) + 0.5);
    if (decided == 0) {
        s.odds_low = 0.0;
        s.odds_high = std::numeric_limits<double>::infinity();
    } else {
        const double alpha = 0.05;
        const double x = static_cast<double>(s.wins);
        const double n = static_cast<double>(decided);
        const double p_low = s.wins == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1.0, alpha / 2.0);
        const double p_high = s.wins == decided ? 1.0 : boost::math::ibeta_inv(x + 1.0, n - x, 1.0 - alpha / 2.0);
        s.odds_low = p_low / (1.0 - p_low);
        s.odds_high = p_high >= 1.0 ? std::numeric_limits<double>::infinity() : p_high / (1.0 - p_high);
    }
    return s;
}

json to_json(const PreferenceSummary& s) {
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(); };
    return {{"initial", {{"mean", s.initial_mean}, {"sd", s.initial_sd}, {"n", s.initial_count}}},
            {"best_ranked", {{"mean", s.best_mean}, {"sd", s.best_sd}, {"n", s.best_count}}},
            {"pairs", s.pairs},
            {"wins", s.wins},
            {"losses", s.losses},
            {"ties", s.ties},
            {"win_proportion", s.win_proportion},
            {"odds_ratio", s.odds_ratio},
            {"odds_ci95", {finite_or_null(s.odds_low), finite_or_null(s.odds_high)}}};
}

json benchmark_to_json(const BenchmarkRecord& r) {
    return {{"session", r.session}, {"track", r.track}, {"system", std::string(to_string(r.system))}, {"rating", r.rating}};
}

BenchmarkRecord benchmark_from_json(const json& j) {
    try {
        return BenchmarkRecord{j.at("session").get<std::string>(), j.at("track").get<std::string>(),
                               system_from_string(j.at("system").get<std::string>()), j.at("rating").get<double>()};
    } catch (const json::exception& e) {
        throw FormatError(std::string("benchmark record: ") + e.what());
    }
}

std::vector<Population> history_from_events(std::span<const json> events) {
    std::vector<Population> history;
    for (const auto& e : events) {
        const std::string type = e.value("type", "");
        if (type != "session" && type != "generation") continue;
        Population p;
        try {
            p.generation = e.at("generation").get<int>();
            for (const auto& m : e.at("population")) {
                p.members.push_back({m.at("id").get<std::string>(), curve_from_json(m.at("gains"), "gains")});
            }
        } catch (const json::exception& ex) {
            throw FormatError(std::string("event log population: ") + ex.what());
        }
        if (p.generation != static_cast<int>(history.size())) throw FormatError("event log generations are not contiguous");
        history.push_back(std::move(p));
    }
    return history;
}

LogDirectory read_log_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ValidationError(dir.string() + " is not a directory");
    LogDirectory out;
    std::vector<std::filesystem::path> logs;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto log = entry.path() / "events.jsonl";
        if (entry.is_directory() && std::filesystem::exists(log)) logs.push_back(log);
    }
    std::sort(logs.begin(), logs.end());
    if (logs.empty()) throw ValidationError("no session logs (*/events.jsonl) in " + dir.string());
    for (const auto& log : logs) {
        const auto events = parse_event_log(read_file(log));
        out.sessions.push_back({log.parent_path().filename().string(), history_from_events(events)});
    }
    const auto bench = dir / "benchmark.jsonl";
    if (std::filesystem::exists(bench)) {
        for (const auto& j : parse_event_log(read_file(bench))) out.benchmark.push_back(benchmark_from_json(j));
    }
    return out;
}

} // namespace prefevo
