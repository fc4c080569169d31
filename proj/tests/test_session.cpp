#include "doctest.h"

#include <algorithm>
#include <set>

#include "prefevo/errors.hpp"
#include "prefevo/event_log.hpp"
#include "prefevo/session.hpp"
#include "prefevo/simulate.hpp"

using namespace prefevo;

namespace {

ExperimentConfig config_with_seed(std::uint64_t seed) {
    ExperimentConfig c = ExperimentConfig::defaults();
    c.de.seed = seed;
    return c;
}

const ComparisonTrial& comparison(const SessionState& s) { return *s.pending; }

SessionState rate_comparison(const SessionState& s, double rating) {
    return submit_comparison(s, comparison(s).trial_id, BipolarRating(rating));
}

SessionState finish_comparisons(SessionState s, Rng& rng) {
    while (s.stage == Stage::Comparison) s = rate_comparison(s, rng.uniform(-1.0, 1.0));
    return s;
}

std::vector<EvaluationRating> uniform_ratings(std::size_t n, double v) {
    return std::vector<EvaluationRating>(n, EvaluationRating(v));
}

} // namespace

TEST_CASE("create_session with the default config") {
    const SessionState s = create_session(config_with_seed(1));
    CHECK(s.stage == Stage::Comparison);
    CHECK(s.population.size() == 5);
    CHECK(s.config.de.generations == 8);
    CHECK(s.config.comparison_trials() == 40);
    CHECK(s.progress().total == 48);
    CHECK(s.history.size() == 1);
    CHECK(comparison(s).generation == 0);
}

TEST_CASE("same seed gives the same first trial") {
    CHECK(create_session(config_with_seed(5)).pending == create_session(config_with_seed(5)).pending);
    CHECK_FALSE(create_session(config_with_seed(5)).pending == create_session(config_with_seed(6)).pending);
}

TEST_CASE("invalid configs are rejected with every issue listed") {
    ExperimentConfig c = ExperimentConfig::defaults();
    std::vector<double> g(10, 0.0);
    g[2] = 4.0;
    c.initial_curve = Curve(g);
    c.tracks.clear();
    try {
        create_session(c);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.issues().size() >= 2);
    }
}

TEST_CASE("schedule arithmetic") {
    SessionState s = create_session(config_with_seed(2));
    Rng rng(1);
    for (int g = 0; g < 8; ++g) {
        std::set<std::string> members;
        std::set<std::string> tracks;
        for (int i = 0; i < 5; ++i) {
            REQUIRE(s.stage == Stage::Comparison);
            CHECK(comparison(s).generation == g);
            members.insert(comparison(s).member_id);
            tracks.insert(comparison(s).track_id);
            s = rate_comparison(s, rng.uniform(-1, 1));
        }
        CHECK(members.size() == 5); // every member challenged once
        CHECK(tracks.size() == 5);
        CHECK(s.history.size() == static_cast<std::size_t>(g) + 2);
    }
    REQUIRE(s.stage == Stage::Evaluation);
    CHECK(s.screens.size() == 8);
    std::set<std::string> tracks;
    for (const auto& screen : s.screens) {
        CHECK(screen.stimuli.size() == 6);
        CHECK(std::count(screen.stimuli.begin(), screen.stimuli.end(), std::string(kAnchorId)) == 1);
        tracks.insert(screen.track_id);
    }
    CHECK(tracks.size() == 8);
}

TEST_CASE("A/B assignment is balanced") {
    std::size_t reference_a = 0, total = 0;
    for (std::uint64_t seed = 0; total < 1000; ++seed) {
        SessionState s = create_session(config_with_seed(seed));
        while (s.stage == Stage::Comparison && total < 1000) {
            reference_a += comparison(s).reference_is_a;
            ++total;
            s = rate_comparison(s, 0.5);
        }
    }
    CHECK(reference_a / 1000.0 >= 0.45);
    CHECK(reference_a / 1000.0 <= 0.55);
}

TEST_CASE("ratings resolve against the A/B assignment") {
    SessionState s = create_session(config_with_seed(3));
    // Walk to a trial with the reference on A and a non-degenerate challenger.
    while (!comparison(s).reference_is_a || comparison(s).degenerate) s = rate_comparison(s, 0.0);
    const ComparisonTrial t = comparison(s);
    const std::size_t slot = s.population.index_of(t.member_id);

    const SessionState ref = rate_comparison(s, -1.0);
    CHECK(ref.comparisons.back().verdict == Verdict::Reference);
    CHECK(ref.comparisons.back().trial == t);
    CHECK(ref.population.members[slot].curve == t.reference);

    const SessionState trial = rate_comparison(s, 1.0);
    CHECK(trial.comparisons.back().verdict == Verdict::Trial);
    CHECK(trial.comparisons.back().trial.challenger == t.challenger);

    const SessionState tie = rate_comparison(s, 0.0);
    CHECK(tie.comparisons.back().verdict == Verdict::Tie);
    CHECK(tie.population.members[slot].curve == t.reference);
}

TEST_CASE("stale trial ids leave the state unchanged") {
    const SessionState s = create_session(config_with_seed(4));
    const SessionState after = rate_comparison(s, 0.3);
    const std::string before_text = save(after);
    CHECK_THROWS_AS(submit_comparison(after, comparison(s).trial_id, BipolarRating(1.0)), StateError);
    CHECK_THROWS_AS(submit_comparison(after, "c9999", BipolarRating(1.0)), StateError);
    CHECK(save(after) == before_text);
}

TEST_CASE("evaluation stage") {
    Rng rng(9);
    SessionState s = finish_comparisons(create_session(config_with_seed(5)), rng);
    REQUIRE(s.stage == Stage::Evaluation);

    SUBCASE("count mismatch and range") {
        const auto screen = std::get<EvaluationScreen>(next_trial(s));
        CHECK_THROWS_AS(submit_evaluation(s, screen.trial_id, uniform_ratings(5, 3.0)), ValidationError);
        CHECK_THROWS_AS(EvaluationRating(6.0), ValidationError);
        CHECK_THROWS_AS(submit_evaluation(s, "e99", uniform_ratings(6, 3.0)), StateError);
        CHECK_THROWS_AS(submit_comparison(s, "c0001", BipolarRating(0.0)), StateError);
    }
    SUBCASE("all ties go to the lowest member id") {
        while (s.stage == Stage::Evaluation) {
            const auto screen = std::get<EvaluationScreen>(next_trial(s));
            s = submit_evaluation(s, screen.trial_id, uniform_ratings(6, 3.0));
        }
        CHECK(s.stage == Stage::Done);
        CHECK(s.best_ranked == "m0");
        CHECK_THROWS_AS(next_trial(s), StateError);
    }
    SUBCASE("a curve rated 5 everywhere wins") {
        while (s.stage == Stage::Evaluation) {
            const auto screen = std::get<EvaluationScreen>(next_trial(s));
            std::vector<EvaluationRating> r;
            for (const auto& id : screen.stimuli) r.emplace_back(id == "m3" ? 5.0 : 2.0);
            s = submit_evaluation(s, screen.trial_id, r);
        }
        CHECK(s.best_ranked == "m3");
    }
    SUBCASE("anchor never wins") {
        while (s.stage == Stage::Evaluation) {
            const auto screen = std::get<EvaluationScreen>(next_trial(s));
            std::vector<EvaluationRating> r;
            for (const auto& id : screen.stimuli) r.emplace_back(id == kAnchorId ? 5.0 : id == "m2" ? 4.0 : 1.0);
            s = submit_evaluation(s, screen.trial_id, r);
        }
        CHECK(s.best_ranked == "m2");
    }
}

TEST_CASE("a finished session has a complete record") {
    const SimulationSetup setup = simulation_setup(ExperimentConfig::defaults(), 77, 0);
    const SessionState s = drive(create_session(setup.config), setup.listener);
    CHECK(s.stage == Stage::Done);
    CHECK(s.comparisons.size() == 40);
    CHECK(s.evaluations.size() == 8);
    CHECK(s.history.size() == 9);
    CHECK(s.progress().completed == s.progress().total);
}

TEST_CASE("save and load") {
    const SimulationSetup setup = simulation_setup(ExperimentConfig::defaults(), 3, 1);
    const SessionState start = create_session(setup.config, "2026-01-01T00:00:00Z");
    SUBCASE("mid-generation") {
        const SessionState mid = drive(start, setup.listener, 7);
        const SessionState back = load(save(mid));
        CHECK(back == mid);
        CHECK(back.pending == mid.pending);
        CHECK(back.rng == mid.rng);
        CHECK(drive(back, setup.listener) == drive(mid, setup.listener));
    }
    SUBCASE("stage boundary") {
        const SessionState boundary = drive(start, setup.listener, 40);
        REQUIRE(boundary.stage == Stage::Evaluation);
        const SessionState back = load(save(boundary));
        CHECK(back.screens == boundary.screens);
        CHECK(drive(back, setup.listener) == drive(boundary, setup.listener));
    }
    SUBCASE("truncated payloads fail cleanly") {
        const std::string text = save(drive(start, setup.listener, 12));
        for (std::size_t cut : {std::size_t{0}, std::size_t{1}, text.size() / 3, text.size() / 2, text.size() - 3}) {
            CHECK_THROWS_AS(load(std::string_view(text).substr(0, cut)), FormatError);
        }
    }
    SUBCASE("corrupt fields are named") {
        nlohmann::json doc = nlohmann::json::parse(save(drive(start, setup.listener, 3)));
        doc["population"]["members"][1]["gains"][4] = "loud";
        try {
            load(doc.dump());
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find("population.members[1].gains") != std::string::npos);
        }
        doc = nlohmann::json::parse(save(start));
        doc.erase("rng");
        CHECK_THROWS_WITH_AS(load(doc.dump()), doctest::Contains("rng"), FormatError);
    }
}

TEST_CASE("event log replay reconstructs the history") {
    for (std::size_t i = 0; i < 10; ++i) {
        const SimulationSetup setup = simulation_setup(ExperimentConfig::defaults(), 1234, i);
        const std::size_t steps = i == 0 ? 1000 : 5 * i + 3;
        const SessionState s = drive(create_session(setup.config), setup.listener, steps);
        const auto events = parse_event_log(render_event_log(s));
        const SessionState replayed = replay_events(setup.config, events);
        CHECK(replayed.history == s.history);
        CHECK(replayed.population == s.population);
        CHECK(save(replayed) == save(s));
    }
}

TEST_CASE("replay detects tampered logs") {
    const SimulationSetup setup = simulation_setup(ExperimentConfig::defaults(), 5, 0);
    const SessionState s = drive(create_session(setup.config), setup.listener, 12);
    auto events = parse_event_log(render_event_log(s));
    for (auto& e : events) {
        if (e["type"] == "comparison") {
            e["reference_is_a"] = !e["reference_is_a"].get<bool>();
            break;
        }
    }
    CHECK_THROWS(replay_events(setup.config, events));
}
