#include "dprisk/game.hpp"
#include "dprisk/scenario.hpp"

#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace dprisk;
using namespace dprisk::game;

namespace {

Functionality table(const std::string& id, int n)
{
    LookupTable t;
    for (int i = 0; i < n; ++i) {
        t.outputs[std::to_string(i)] = "out" + std::to_string(i);
    }
    return {id, t};
}

SubvertedImplementation divergent(int n, int diverging)
{
    SubvertedImplementation impl;
    impl.base.functionalities.push_back(table("f", n));
    for (int i = 0; i < diverging; ++i) {
        impl.overrides.push_back(OutputOverride{"f", std::to_string(i), "tampered"});
    }
    return impl;
}

// Fraction of all n^q query tuples that miss every divergent input.
double exhaustive_pass_fraction(int n, int q, int diverging)
{
    long long total = 0, passing = 0;
    std::vector<int> tuple(q, 0);
    while (true) {
        ++total;
        bool pass = true;
        for (int v : tuple) pass = pass && v >= diverging;
        passing += pass;
        int k = 0;
        while (k < q && ++tuple[k] == n) tuple[k++] = 0;
        if (k == q) break;
    }
    return static_cast<double>(passing) / static_cast<double>(total);
}

InteractionMachine self_loop()
{
    return {"s", {{"s", "forever", false, {{"again", "s", std::nullopt}}}}};
}

} // namespace

TEST_CASE("exhaustive enumeration agrees with the closed form for one divergent input")
{
    const double oracle = 1.0 - exhaustive_pass_fraction(8, 4, 1);
    CHECK(oracle == doctest::Approx(1.0 - std::pow(7.0 / 8.0, 4)).epsilon(1e-15));
    CHECK(oracle == doctest::Approx(0.41382).epsilon(1e-5));
}

TEST_CASE("DET estimate for one divergent input lies within three standard errors")
{
    const Scenario s = load_scenario("builtin:one-divergent-input");
    REQUIRE(s.watchdog.queries_per_functionality == 4);
    const Estimate e = estimate_det(s.watchdog, s.implementation, 10'000, 42);
    const double truth = 1.0 - exhaustive_pass_fraction(8, 4, 1);
    CHECK(std::abs(e.value - truth) <= 3.0 * e.std_error);
    CHECK(e.trials == 10'000);
}

TEST_CASE("DET is non-decreasing in the number of queries")
{
    const auto impl = divergent(8, 1);
    double previous = -1.0;
    for (int q = 1; q <= 8; ++q) {
        WatchdogStrategy w;
        w.queries_per_functionality = q;
        const double det = estimate_det(w, impl, 4000, 5).value;
        CHECK(det >= previous);
        previous = det;
    }
}

TEST_CASE("seeded consistency across many independent seeds")
{
    const auto impl = divergent(8, 1);
    WatchdogStrategy w;
    w.queries_per_functionality = 4;
    const double truth = 1.0 - exhaustive_pass_fraction(8, 4, 1);
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Estimate e = estimate_det(w, impl, 2000, seed);
        within += std::abs(e.value - truth) <= 3.0 * e.std_error;
    }
    CHECK(within >= 99);
}

TEST_CASE("honest implementation is never distinguished")
{
    std::mt19937_64 rng(99);
    for (int k = 0; k < 10; ++k) {
        SubvertedImplementation honest;
        honest.base.functionalities.push_back(table("f", 2 + static_cast<int>(rng() % 10)));
        honest.base.functionalities.push_back(table("g", 2 + static_cast<int>(rng() % 10)));
        WatchdogStrategy w;
        w.queries_per_functionality = 1 + static_cast<int>(rng() % 6);
        if (k % 2 == 1) {
            w.query_weights["f"] = {{"0", 0.5}, {"1", 0.5}};
        }
        const Estimate e = estimate_det(w, honest, 1000, rng());
        CHECK(e.value == 0.0);
    }
}

TEST_CASE("constant-pass watchdog never detects")
{
    WatchdogStrategy w;
    w.decision_rule = DecisionRule::ConstantPass;
    CHECK(estimate_det(w, divergent(4, 4), 500, 1).value == 0.0);
    w.decision_rule = DecisionRule::AllMatch;
    CHECK(estimate_det(w, divergent(4, 4), 500, 1).value == 1.0);
}

TEST_CASE("weighted queries concentrate on the chosen inputs")
{
    WatchdogStrategy w;
    w.query_weights["f"] = {{"0", 1.0}};
    CHECK(estimate_det(w, divergent(8, 1), 300, 3).value == 1.0);
    w.query_weights["f"] = {{"7", 1.0}};
    CHECK(estimate_det(w, divergent(8, 1), 300, 3).value == 0.0);
}

TEST_CASE("serial and parallel execution give bit-identical estimates")
{
    const Scenario trap = load_scenario("builtin:trap-chain");
    for (unsigned threads : {2u, 3u, 8u}) {
        CHECK(estimate_det(trap.watchdog, trap.implementation, 10'007, 77, {1}) ==
              estimate_det(trap.watchdog, trap.implementation, 10'007, 77, {threads}));
        CHECK(estimate_adv(trap.challenger, trap.implementation, 10'007, 77, {1}) ==
              estimate_adv(trap.challenger, trap.implementation, 10'007, 77, {threads}));
    }
}

TEST_CASE("trap chain ADV matches the 81-path enumeration")
{
    // Each step offers continue-a, continue-b, misstep; a path is trapped on any misstep.
    int trapped = 0;
    for (int path = 0; path < 81; ++path) {
        bool hit = false;
        for (int step = 0, p = path; step < 4; ++step, p /= 3) hit = hit || p % 3 == 2;
        trapped += hit;
    }
    const double oracle = trapped / 81.0;
    CHECK(oracle == doctest::Approx(65.0 / 81.0));
    const Scenario s = load_scenario("builtin:trap-chain");
    const Estimate e = estimate_adv(s.challenger, s.implementation, 20'000, 13);
    CHECK(std::abs(e.value - oracle) <= 3.0 * e.std_error);
}

TEST_CASE("random clicking on a binary choice reaches the goal about half the time")
{
    const Scenario s = load_scenario("builtin:binary-choice");
    const Estimate e = estimate_adv(s.challenger, s.implementation, 10'000, 2024);
    CHECK(std::abs(e.value - 0.5) <= 3.0 * e.std_error);
}

TEST_CASE("heuristic challenger avoids lures according to its sensitivity")
{
    const Scenario s = load_scenario("builtin:binary-choice");
    ChallengerPolicy wary{ChallengerKind::Heuristic, {{"uf", 1.0}}};
    CHECK(estimate_adv(wary, s.implementation, 2000, 1).value == 0.0);
    ChallengerPolicy blind{ChallengerKind::Heuristic, {{"uf", 0.0}}};
    const Estimate e = estimate_adv(blind, s.implementation, 10'000, 1);
    CHECK(std::abs(e.value - 0.5) <= 3.0 * e.std_error);
    ChallengerPolicy partial{ChallengerKind::Heuristic, {{"uf", 0.5}}};
    const Estimate p = estimate_adv(partial, s.implementation, 10'000, 1);
    // avoided half the time, otherwise a fair pick: 0.5 * 0.5
    CHECK(std::abs(p.value - 0.25) <= 3.0 * p.std_error);
}

TEST_CASE("interaction without a terminal state hits the step cap")
{
    TrialRng rng(1, 0);
    CHECK_ERROR_CODE(run_interaction({}, self_loop(), rng, 50), ErrorCode::InteractionDidNotTerminate);
}

TEST_CASE("goal predicate accepts terminal states or goal actions")
{
    GoalPredicate g{"flow", {"trapped"}, {"misstep"}};
    CHECK(goal_holds(g, Trace{{"a", "trapped"}, {"x"}}));
    CHECK(goal_holds(g, Trace{{"a", "b"}, {"misstep"}}));
    CHECK_FALSE(goal_holds(g, Trace{{"a", "escaped"}, {"continue-a"}}));
}

TEST_CASE("scheme validation rejects malformed machines")
{
    Scheme dangling{{{"m", InteractionMachine{"a", {{"a", "", false, {{"go", "nowhere", std::nullopt}}}}}}}};
    CHECK_ERROR_CODE(validate_scheme(dangling), ErrorCode::InvalidScenario);
    Scheme stuck{{{"m", InteractionMachine{"a", {{"a", "", false, {}}}}}}};
    CHECK_ERROR_CODE(validate_scheme(stuck), ErrorCode::InvalidScenario);
    Scheme looping{{{"m", self_loop()}}};
    CHECK_ERROR_CODE(validate_scheme(looping), ErrorCode::InvalidScenario);
    Scheme twice{{table("f", 2), table("f", 3)}};
    CHECK_ERROR_CODE(validate_scheme(twice), ErrorCode::InvalidScenario);
}

TEST_CASE("overrides that do not fit the specification are rejected")
{
    SubvertedImplementation impl;
    impl.base.functionalities.push_back(table("f", 2));
    impl.overrides.push_back(OutputOverride{"f", "9", "x"});
    CHECK_ERROR_CODE(impl.realize(), ErrorCode::InvalidScenario);
    impl.overrides = {OutputOverride{"g", "0", "x"}};
    CHECK_ERROR_CODE(impl.realize(), ErrorCode::InvalidScenario);
}

TEST_CASE("precision guard on resistance verdicts")
{
    const ResistanceThresholds t{0.1, 0.05};
    CHECK(minimum_trials(t) == 400);
    const Estimate det{0.5, 399, 0.0, 1};
    const Estimate adv{0.01, 399, 0.0, 1};
    CHECK_ERROR_CODE(check_resistance(det, adv, t), ErrorCode::InsufficientTrials);

    const ResistanceVerdict both = check_resistance({0.5, 400, 0, 1}, {0.01, 400, 0, 1}, t);
    CHECK(both.resistant);
    CHECK(both.branch == ResistanceBranch::Both);
    const ResistanceVerdict none = check_resistance({0.05, 400, 0, 1}, {0.5, 400, 0, 1}, t);
    CHECK_FALSE(none.resistant);
    CHECK(to_token(none.branch) == "none");
    CHECK(det_to_factor({0.3, 10, 0, 1}).source == DetectionSource::Simulated);
}

TEST_CASE("trial streams are reproducible and distinct per index")
{
    TrialRng a(5, 0), b(5, 0), c(5, 1);
    std::vector<std::size_t> xs, ys, zs;
    for (int i = 0; i < 32; ++i) {
        xs.push_back(a.index(1000));
        ys.push_back(b.index(1000));
        zs.push_back(c.index(1000));
    }
    CHECK(xs == ys);
    CHECK(xs != zs);
}
