#include "prefevo/event_log.hpp"

#include <sstream>

#include "prefevo/errors.hpp"

namespace prefevo {

using nlohmann::json;

namespace {

json members_json(const Population& p) {
    json members = json::array();
    for (const auto& m : p.members) members.push_back({{"id", m.id}, {"gains", curve_to_json(m.curve)}});
    return members;
}

} // namespace

std::vector<json> session_events(const SessionState& s) {
    std::vector<json> events;
    events.push_back({{"type", "session"},
                      {"format", "prefevo-log"},
                      {"version", 1},
                      {"config_hash", s.config_hash},
                      {"seed", s.config.de.seed},
                      {"generation", 0},
                      {"population", members_json(s.history.front())}});
    if (!s.created_at.empty()) events.back()["time"] = s.created_at;

    std::size_t next_generation = 1;
    for (const auto& record : s.comparisons) {
        const ComparisonTrial& t = record.trial;
        json e = {{"type", "comparison"},
                  {"trial_id", t.trial_id},
                  {"generation", t.generation},
                  {"member", t.member_id},
                  {"track", t.track_id},
                  {"reference_is_a", t.reference_is_a},
                  {"reference", curve_to_json(t.reference)},
                  {"challenger", curve_to_json(t.challenger)},
                  {"donors", {t.donors.base, t.donors.plus, t.donors.minus}},
                  {"degenerate", t.degenerate},
                  {"rating", record.rating},
                  {"verdict", std::string(to_string(record.verdict))}};
        if (!record.timestamp.empty()) e["time"] = record.timestamp;
        events.push_back(std::move(e));
        // A generation closes after its last comparison.
        const bool last_of_generation =
            (&record - s.comparisons.data() + 1) % s.config.de.population_size == 0;
        if (last_of_generation && next_generation < s.history.size()) {
            events.push_back({{"type", "generation"},
                              {"generation", next_generation},
                              {"population", members_json(s.history[next_generation])}});
            ++next_generation;
        }
    }
    for (const auto& record : s.evaluations) {
        json curves = json::array();
        for (const auto& c : record.curves) curves.push_back(curve_to_json(c));
        json e = {{"type", "evaluation"},
                  {"trial_id", record.screen.trial_id},
                  {"track", record.screen.track_id},
                  {"stimuli", record.screen.stimuli},
                  {"curves", curves},
                  {"ratings", record.ratings}};
        if (!record.timestamp.empty()) e["time"] = record.timestamp;
        events.push_back(std::move(e));
    }
    if (s.stage == Stage::Done) {
        json means = json::object();
        for (const auto& [id, mean] : mean_member_ratings(s)) means[id] = mean;
        events.push_back({{"type", "done"},
                          {"best_ranked", *s.best_ranked},
                          {"best_curve", curve_to_json(s.curve_of(*s.best_ranked))},
                          {"initial_curve", curve_to_json(s.config.initial_curve)},
                          {"mean_ratings", means}});
    }
    return events;
}

std::string render_event_log(const SessionState& state) {
    std::string out;
    for (const auto& e : session_events(state)) {
        out += e.dump();
        out += '\n';
    }
    return out;
}

std::vector<json> parse_event_log(std::string_view text) {
    std::vector<json> events;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            events.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw FormatError("event log line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return events;
}

SessionState replay_events(const ExperimentConfig& config, std::span<const json> events) {
    SessionState s = create_session(config);
    if (events.empty() || events.front().value("type", "") != "session") {
        throw FormatError("event log does not start with a session event");
    }
    if (events.front().value("config_hash", "") != s.config_hash) {
        throw FormatError("event log was written for a different config");
    }
    if (!s.created_at.empty() || events.front().contains("time")) {
        s.created_at = s.updated_at = events.front().value("time", "");
    }
    for (std::size_t i = 1; i < events.size(); ++i) {
        const json& e = events[i];
        const std::string type = e.value("type", "");
        const std::string time = e.value("time", "");
        try {
            if (type == "comparison") {
                if (s.stage != Stage::Comparison) throw FormatError("comparison after the comparison stage");
                const ComparisonTrial& pending = *s.pending;
                if (e.at("trial_id") != pending.trial_id || curve_from_json(e.at("challenger"), "challenger") != pending.challenger ||
                    e.at("reference_is_a").get<bool>() != pending.reference_is_a) {
                    throw FormatError("trial " + pending.trial_id + " does not match the regenerated trial");
                }
                s = submit_comparison(s, pending.trial_id, BipolarRating(e.at("rating").get<double>()), time);
            } else if (type == "evaluation") {
                std::vector<EvaluationRating> ratings;
                for (const auto& v : e.at("ratings")) ratings.emplace_back(v.get<double>());
                s = submit_evaluation(s, e.at("trial_id").get<std::string>(), ratings, time);
            } else if (type == "generation" || type == "done") {
                continue;
            } else {
                throw FormatError("unknown event type '" + type + "'");
            }
        } catch (const json::exception& ex) {
            throw FormatError("event " + std::to_string(i) + ": " + ex.what());
        } catch (const StateError& ex) {
            throw FormatError("event " + std::to_string(i) + ": " + ex.what());
        }
    }
    return s;
}

} // namespace prefevo
