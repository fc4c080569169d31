#include "doctest.h"

#include <cmath>

#include "prefevo/errors.hpp"
#include "prefevo/listener.hpp"

using namespace prefevo;

namespace {

ListenerModel oracle(Curve target, double noise = 0.0, double indifference = 0.25) {
    ListenerModel m;
    m.hidden_target = std::move(target);
    m.noise_sd = noise;
    m.indifference_width = indifference;
    return m;
}

Curve random_curve(Rng& rng) {
    std::vector<double> g(10);
    for (auto& x : g) x = rng.uniform(-3.0, 3.0);
    return Curve(g);
}

} // namespace

TEST_CASE("perceptual distance") {
    const Curve t({1, -1, 2, 0, 0, 0.5, 0, 0, 0, -2});
    CHECK(perceptual_distance(t, oracle(t)) == 0.0);

    std::vector<double> off(10, 0.0);
    off[3] = 2.0;
    CHECK(perceptual_distance(Curve(off), oracle(Curve::flat())) == doctest::Approx(2.0 / std::sqrt(10.0)));

    ListenerModel w = oracle(Curve::flat());
    w.band_weights = {1, 2, 3, 4, 5, 1, 2, 3, 4, 5};
    ListenerModel w2 = w;
    for (auto& x : w2.band_weights) x *= 2.0;
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const Curve c = random_curve(rng);
        CHECK(perceptual_distance(c, w) == doctest::Approx(perceptual_distance(c, w2)).epsilon(1e-14));
    }
}

TEST_CASE("listener model validation") {
    ListenerModel m = oracle(Curve::flat());
    m.band_weights = std::vector<double>(10, 0.0);
    CHECK_THROWS_AS(m.validate(), ValidationError);
    m.band_weights = {};
    m.noise_sd = -1.0;
    CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("judge examples") {
    const Curve t({1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    const ListenerModel m = oracle(t);
    Rng rng(1);
    CHECK(judge(t, Curve::flat(), m, rng).value() < 0.0);
    CHECK(judge(Curve::flat(), t, m, rng).value() > 0.0);
    CHECK(judge(t, t, m, rng).value() == 0.0);
    const Curve near({1.1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    CHECK(judge(t, near, m, rng).value() == 0.0); // inside the indifference region
}

TEST_CASE("very noisy listener is a fair coin") {
    Rng rng(8);
    const ListenerModel m = oracle(Curve::flat(), 1e6);
    const Curve a = Curve::flat(), b({1, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    int a_wins = 0;
    for (int i = 0; i < 10000; ++i) a_wins += judge(a, b, m, rng).value() < 0.0;
    CHECK(a_wins / 1e4 >= 0.48);
    CHECK(a_wins / 1e4 <= 0.52);
}

TEST_CASE("zero-noise, zero-indifference judgments are transitive") {
    Rng rng(21);
    const ListenerModel m = oracle(random_curve(rng), 0.0, 0.0);
    auto prefers = [&](const Curve& x, const Curve& y) { return judge_with_noise(x, y, m, 0.0).value() < 0.0; };
    for (int i = 0; i < 2000; ++i) {
        const Curve a = random_curve(rng), b = random_curve(rng), c = random_curve(rng);
        if (prefers(a, b) && prefers(b, c)) CHECK(prefers(a, c));
        const bool by_distance = perceptual_distance(a, m) < perceptual_distance(b, m);
        CHECK(prefers(a, b) == by_distance);
    }
}

TEST_CASE("swapping A and B mirrors the rating") {
    Rng rng(22);
    const ListenerModel m = oracle(random_curve(rng), 0.5);
    for (int i = 0; i < 500; ++i) {
        const Curve a = random_curve(rng), b = random_curve(rng);
        const double noise = rng.normal() * 0.5;
        CHECK(judge_with_noise(a, b, m, noise).value() == -judge_with_noise(b, a, m, -noise).value());
    }
}

TEST_CASE("rating magnitude is bounded and monotone") {
    const ListenerModel m = oracle(Curve::flat(), 0.0, 0.0);
    double last = 0.0;
    for (double d = 0.1; d < 6.0; d += 0.1) {
        std::vector<double> g(10, d);
        const double v = -judge_with_noise(Curve::flat(), Curve(g), m, 0.0).value();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        CHECK(v >= last);
        last = v;
    }
}

TEST_CASE("random listener") {
    ListenerModel m = oracle(Curve::flat());
    m.kind = ListenerKind::Random;
    Rng rng(9);
    int a_wins = 0, same = 0;
    for (int i = 0; i < 10000; ++i) {
        const double v = judge(Curve::flat(), Curve::flat(), m, rng).value();
        a_wins += v < 0.0;
        same += v == 0.0;
        const double r = rate_absolute(Curve::flat(), m, rng).value();
        CHECK(r >= 1.0);
        CHECK(r <= 5.0);
    }
    CHECK(same == 0);
    CHECK(a_wins / 1e4 == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("absolute ratings fall with distance") {
    const ListenerModel m = oracle(Curve::flat(), 0.0);
    Rng rng(1);
    CHECK(rate_absolute(Curve::flat(), m, rng).value() == 5.0);
    const double near = rate_absolute(Curve(std::vector<double>(10, 0.5)), m, rng).value();
    const double far = rate_absolute(Curve(std::vector<double>(10, 2.5)), m, rng).value();
    CHECK(near > far);
    CHECK(far >= 1.0);
}

TEST_CASE("rating types validate their range") {
    CHECK_THROWS_AS(BipolarRating(1.01), ValidationError);
    CHECK_THROWS_AS(BipolarRating(std::nan("")), ValidationError);
    CHECK_THROWS_AS(EvaluationRating(0.99), ValidationError);
    CHECK_THROWS_AS(EvaluationRating(5.5), ValidationError);
    CHECK(resolve_verdict(BipolarRating(-1), true) == Verdict::Reference);
    CHECK(resolve_verdict(BipolarRating(1), true) == Verdict::Trial);
    CHECK(resolve_verdict(BipolarRating(-0.3), false) == Verdict::Trial);
    CHECK(resolve_verdict(BipolarRating(0.3), false) == Verdict::Reference);
    CHECK(resolve_verdict(BipolarRating(0), false) == Verdict::Tie);
}
