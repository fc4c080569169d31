#include "prefevo/session.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "prefevo/errors.hpp"

namespace prefevo {

using nlohmann::json;

namespace {

constexpr int kSnapshotVersion = 1;

std::string comparison_id(std::size_t index) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "c%04zu", index + 1);
    return buf;
}

std::string evaluation_id(std::size_t index) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "e%02zu", index + 1);
    return buf;
}

void schedule_generation(SessionState& s) {
    s.member_order = member_order(s.population.size(), s.rng);
    s.track_rotation.clear();
    for (const auto& t : s.config.tracks) s.track_rotation.push_back(t.id);
    s.rng.shuffle(std::span<std::string>(s.track_rotation));
    s.position = 0;
}

void build_comparison(SessionState& s) {
    const std::size_t index = s.member_order[s.position];
    TrialVector trial = make_trial(s.population, index, s.config.de, s.config.bounds, s.rng);
    ComparisonTrial spec;
    spec.trial_id = comparison_id(s.comparisons.size());
    spec.generation = s.population.generation;
    spec.member_id = s.population.members[index].id;
    spec.reference = s.population.members[index].curve;
    spec.challenger = std::move(trial.curve);
    spec.donors = trial.donors;
    spec.reference_is_a = s.rng.uniform() < 0.5;
    spec.track_id = s.track_rotation[s.position % s.track_rotation.size()];
    spec.degenerate = spec.challenger == spec.reference;
    s.pending = std::move(spec);
}

void schedule_evaluation(SessionState& s) {
    std::vector<std::string> tracks;
    for (const auto& t : s.config.tracks) tracks.push_back(t.id);
    s.rng.shuffle(std::span<std::string>(tracks));
    s.screens.clear();
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        EvaluationScreen screen{evaluation_id(i), tracks[i], {}};
        for (const auto& m : s.population.members) screen.stimuli.push_back(m.id);
        screen.stimuli.emplace_back(kAnchorId);
        s.rng.shuffle(std::span<std::string>(screen.stimuli));
        s.screens.push_back(std::move(screen));
    }
    s.screen_position = 0;
}

std::size_t slot_of(const std::string& member) { return static_cast<std::size_t>(std::stoul(member.substr(1))); }

// ---- JSON helpers -------------------------------------------------------

json population_to_json(const Population& p) {
    json members = json::array();
    for (const auto& m : p.members) members.push_back({{"id", m.id}, {"gains", curve_to_json(m.curve)}});
    return {{"generation", p.generation}, {"members", members}};
}

/// Field access that reports the dotted path of whatever failed to decode.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    Reader at(const std::string& key) const {
        if (!j_.is_object() || !j_.contains(key)) throw FormatError("snapshot field '" + join(key) + "' is missing");
        return Reader(j_.at(key), join(key));
    }
    Reader at(std::size_t i) const {
        if (!j_.is_array() || i >= j_.size()) {
            throw FormatError("snapshot field '" + path_ + "[" + std::to_string(i) + "]' is missing");
        }
        return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]");
    }
    bool has(const std::string& key) const { return j_.is_object() && j_.contains(key) && !j_.at(key).is_null(); }
    std::size_t size() const {
        if (!j_.is_array()) throw FormatError("snapshot field '" + path_ + "' must be an array");
        return j_.size();
    }

    template <typename T>
    T as() const {
        try {
            return j_.get<T>();
        } catch (const json::exception& e) {
            throw FormatError("snapshot field '" + path_ + "': " + e.what());
        }
    }

    Curve curve() const {
        try {
            return Curve(as<std::vector<double>>());
        } catch (const ValidationError& e) {
            throw FormatError("snapshot field '" + path_ + "': " + e.what());
        }
    }

    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

private:
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& j_;
    std::string path_;
};

Population population_from(const Reader& r) {
    Population p;
    p.generation = r.at("generation").as<int>();
    const Reader members = r.at("members");
    for (std::size_t i = 0; i < members.size(); ++i) {
        const Reader m = members.at(i);
        p.members.push_back({m.at("id").as<std::string>(), m.at("gains").curve()});
    }
    return p;
}

json comparison_to_json(const ComparisonTrial& t) {
    return {{"trial_id", t.trial_id},
            {"generation", t.generation},
            {"member", t.member_id},
            {"reference", curve_to_json(t.reference)},
            {"challenger", curve_to_json(t.challenger)},
            {"donors", {t.donors.base, t.donors.plus, t.donors.minus}},
            {"reference_is_a", t.reference_is_a},
            {"track", t.track_id},
            {"degenerate", t.degenerate}};
}

ComparisonTrial comparison_from(const Reader& r) {
    ComparisonTrial t;
    t.trial_id = r.at("trial_id").as<std::string>();
    t.generation = r.at("generation").as<int>();
    t.member_id = r.at("member").as<std::string>();
    t.reference = r.at("reference").curve();
    t.challenger = r.at("challenger").curve();
    const auto donors = r.at("donors").as<std::vector<std::size_t>>();
    if (donors.size() != 3) throw FormatError("snapshot field '" + r.path() + ".donors' must hold 3 indices");
    t.donors = Donors{donors[0], donors[1], donors[2]};
    t.reference_is_a = r.at("reference_is_a").as<bool>();
    t.track_id = r.at("track").as<std::string>();
    t.degenerate = r.at("degenerate").as<bool>();
    return t;
}

json screen_to_json(const EvaluationScreen& s) {
    return {{"trial_id", s.trial_id}, {"track", s.track_id}, {"stimuli", s.stimuli}};
}

EvaluationScreen screen_from(const Reader& r) {
    return EvaluationScreen{r.at("trial_id").as<std::string>(), r.at("track").as<std::string>(),
                            r.at("stimuli").as<std::vector<std::string>>()};
}

} // namespace

std::string_view to_string(Stage stage) {
    switch (stage) {
    case Stage::Comparison: return "comparison";
    case Stage::Evaluation: return "evaluation";
    case Stage::Done: return "done";
    }
    return "?";
}

Stage stage_from_string(std::string_view name) {
    if (name == "comparison") return Stage::Comparison;
    if (name == "evaluation") return Stage::Evaluation;
    if (name == "done") return Stage::Done;
    throw FormatError("unknown stage '" + std::string(name) + "'");
}

Progress SessionState::progress() const {
    return Progress{comparisons.size() + evaluations.size(), config.comparison_trials() + config.tracks.size(), stage};
}

Curve SessionState::curve_of(std::string_view stimulus_id) const {
    if (stimulus_id == kAnchorId) return Curve::flat(config.band_plan.bands());
    return population.members[population.index_of(stimulus_id)].curve;
}

bool operator==(const SessionState& a, const SessionState& b) { return save(a) == save(b); }

SessionState create_session(const ExperimentConfig& config, std::string created_at) {
    config.validate();
    SessionState s;
    s.config = config;
    s.config_hash = config.hash();
    s.rng = Rng(config.de.seed);
    s.population = init_population(config.initial_curve, config.bounds, config.de, s.rng);
    s.history.push_back(s.population);
    s.created_at = created_at;
    s.updated_at = std::move(created_at);
    schedule_generation(s);
    build_comparison(s);
    return s;
}

PendingTrial next_trial(const SessionState& state) {
    switch (state.stage) {
    case Stage::Comparison: return *state.pending;
    case Stage::Evaluation: return state.screens.at(state.screen_position);
    case Stage::Done: break;
    }
    throw StateError("session is complete; no further trials");
}

SessionState submit_comparison(const SessionState& state, std::string_view trial_id, BipolarRating rating,
                               std::string timestamp) {
    if (state.stage != Stage::Comparison || !state.pending) {
        throw StateError("session is in the " + std::string(to_string(state.stage)) + " stage; no comparison pending");
    }
    if (state.pending->trial_id != trial_id) {
        throw StateError("trial '" + std::string(trial_id) + "' is not pending (expected '" + state.pending->trial_id +
                         "')");
    }
    SessionState s = state;
    ComparisonTrial trial = std::move(*s.pending);
    s.pending.reset();
    const Verdict verdict = resolve_verdict(rating, trial.reference_is_a);
    s.population = select(s.population, trial.member_id, trial.challenger, verdict);
    s.comparisons.push_back(ComparisonRecord{std::move(trial), rating.value(), verdict, timestamp});
    s.updated_at = std::move(timestamp);

    if (++s.position == s.member_order.size()) {
        ++s.population.generation;
        s.history.push_back(s.population);
        if (s.population.generation >= s.config.de.generations) {
            s.stage = Stage::Evaluation;
            schedule_evaluation(s);
            return s;
        }
        schedule_generation(s);
    }
    build_comparison(s);
    return s;
}

SessionState submit_evaluation(const SessionState& state, std::string_view trial_id,
                               std::span<const EvaluationRating> ratings, std::string timestamp) {
    if (state.stage != Stage::Evaluation) {
        throw StateError("session is in the " + std::string(to_string(state.stage)) + " stage; no evaluation pending");
    }
    const EvaluationScreen& screen = state.screens.at(state.screen_position);
    if (screen.trial_id != trial_id) {
        throw StateError("trial '" + std::string(trial_id) + "' is not pending (expected '" + screen.trial_id + "')");
    }
    if (ratings.size() != screen.stimuli.size()) {
        throw ValidationError("expected " + std::to_string(screen.stimuli.size()) + " ratings, got " +
                              std::to_string(ratings.size()));
    }
    SessionState s = state;
    EvaluationRecord record{screen, {}, {}, timestamp};
    for (std::size_t i = 0; i < ratings.size(); ++i) {
        record.curves.push_back(s.curve_of(screen.stimuli[i]));
        record.ratings.push_back(ratings[i].value());
    }
    s.evaluations.push_back(std::move(record));
    s.updated_at = std::move(timestamp);
    if (++s.screen_position == s.screens.size()) {
        s.stage = Stage::Done;
        const auto means = mean_member_ratings(s);
        // Highest mean wins; `means` is ordered by slot, so the first maximum
        // is the lowest member id.
        auto best = means.begin();
        for (auto it = means.begin(); it != means.end(); ++it) {
            if (it->second > best->second) best = it;
        }
        s.best_ranked = best->first;
    }
    return s;
}

std::vector<std::pair<std::string, double>> mean_member_ratings(const SessionState& state) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& m : state.population.members) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& record : state.evaluations) {
            for (std::size_t i = 0; i < record.screen.stimuli.size(); ++i) {
                if (record.screen.stimuli[i] == m.id) {
                    sum += record.ratings[i];
                    ++count;
                }
            }
        }
        out.emplace_back(m.id, count ? sum / static_cast<double>(count) : 0.0);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return slot_of(a.first) < slot_of(b.first); });
    return out;
}

std::string save(const SessionState& s) {
    json history = json::array();
    for (const auto& p : s.history) history.push_back(population_to_json(p));
    json comparisons = json::array();
    for (const auto& c : s.comparisons) {
        json r = comparison_to_json(c.trial);
        r["rating"] = c.rating;
        r["verdict"] = std::string(to_string(c.verdict));
        r["time"] = c.timestamp;
        comparisons.push_back(std::move(r));
    }
    json screens = json::array();
    for (const auto& sc : s.screens) screens.push_back(screen_to_json(sc));
    json evaluations = json::array();
    for (const auto& e : s.evaluations) {
        json r = screen_to_json(e.screen);
        json curves = json::array();
        for (const auto& c : e.curves) curves.push_back(curve_to_json(c));
        r["curves"] = curves;
        r["ratings"] = e.ratings;
        r["time"] = e.timestamp;
        evaluations.push_back(std::move(r));
    }
    const json doc = {
        {"format", "prefevo-session"},
        {"version", kSnapshotVersion},
        {"config", s.config.to_json()},
        {"config_hash", s.config_hash},
        {"stage", std::string(to_string(s.stage))},
        {"population", population_to_json(s.population)},
        {"history", history},
        {"rng", s.rng.state()},
        {"member_order", s.member_order},
        {"track_rotation", s.track_rotation},
        {"position", s.position},
        {"pending", s.pending ? comparison_to_json(*s.pending) : json()},
        {"screens", screens},
        {"screen_position", s.screen_position},
        {"comparisons", comparisons},
        {"evaluations", evaluations},
        {"best_ranked", s.best_ranked ? json(*s.best_ranked) : json()},
        {"created_at", s.created_at},
        {"updated_at", s.updated_at},
    };
    return doc.dump(1) + "\n";
}

SessionState load(std::string_view snapshot) {
    json doc;
    try {
        doc = json::parse(snapshot);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("snapshot is not valid JSON: ") + e.what());
    }
    const Reader r(doc, "");
    if (r.at("format").as<std::string>() != "prefevo-session") throw FormatError("snapshot field 'format' is wrong");
    if (r.at("version").as<int>() != kSnapshotVersion) throw FormatError("snapshot field 'version' is unsupported");

    SessionState s;
    try {
        s.config = ExperimentConfig::from_json(r.at("config").raw());
        s.config.validate();
    } catch (const ValidationError& e) {
        throw FormatError(std::string("snapshot field 'config': ") + e.what());
    }
    s.config_hash = r.at("config_hash").as<std::string>();
    if (s.config_hash != s.config.hash()) throw FormatError("snapshot field 'config_hash' does not match the config");
    s.stage = stage_from_string(r.at("stage").as<std::string>());
    s.population = population_from(r.at("population"));
    const Reader history = r.at("history");
    for (std::size_t i = 0; i < history.size(); ++i) s.history.push_back(population_from(history.at(i)));
    if (s.history.size() != static_cast<std::size_t>(s.population.generation) + 1) {
        throw FormatError("snapshot field 'history' length does not match the generation");
    }
    try {
        s.rng = Rng::from_state(r.at("rng").as<std::string>());
    } catch (const FormatError& e) {
        throw FormatError(std::string("snapshot field 'rng': ") + e.what());
    }
    s.member_order = r.at("member_order").as<std::vector<std::size_t>>();
    s.track_rotation = r.at("track_rotation").as<std::vector<std::string>>();
    s.position = r.at("position").as<std::size_t>();
    if (r.has("pending")) s.pending = comparison_from(r.at("pending"));
    const Reader screens = r.at("screens");
    for (std::size_t i = 0; i < screens.size(); ++i) s.screens.push_back(screen_from(screens.at(i)));
    s.screen_position = r.at("screen_position").as<std::size_t>();
    const Reader comparisons = r.at("comparisons");
    for (std::size_t i = 0; i < comparisons.size(); ++i) {
        const Reader c = comparisons.at(i);
        s.comparisons.push_back(ComparisonRecord{comparison_from(c), c.at("rating").as<double>(),
                                                 verdict_from_string(c.at("verdict").as<std::string>()),
                                                 c.at("time").as<std::string>()});
    }
    const Reader evaluations = r.at("evaluations");
    for (std::size_t i = 0; i < evaluations.size(); ++i) {
        const Reader e = evaluations.at(i);
        EvaluationRecord record{screen_from(e), {}, e.at("ratings").as<std::vector<double>>(), e.at("time").as<std::string>()};
        const Reader curves = e.at("curves");
        for (std::size_t k = 0; k < curves.size(); ++k) record.curves.push_back(curves.at(k).curve());
        s.evaluations.push_back(std::move(record));
    }
    if (r.has("best_ranked")) s.best_ranked = r.at("best_ranked").as<std::string>();
    s.created_at = r.at("created_at").as<std::string>();
    s.updated_at = r.at("updated_at").as<std::string>();

    if (s.stage == Stage::Comparison && !s.pending) throw FormatError("snapshot field 'pending' is missing");
    if (s.stage == Stage::Comparison && s.position >= s.member_order.size()) {
        throw FormatError("snapshot field 'position' is out of range");
    }
    if (s.stage == Stage::Evaluation && s.screen_position >= s.screens.size()) {
        throw FormatError("snapshot field 'screen_position' is out of range");
    }
    return s;
}

} // namespace prefevo
