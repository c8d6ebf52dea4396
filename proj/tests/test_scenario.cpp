#include "dprisk/scenario.hpp"

#include "test_support.hpp"

using namespace dprisk;

TEST_CASE("every built-in scenario loads and survives a JSON round trip")
{
    const auto names = builtin_scenario_names();
    CHECK(names.size() >= 7);
    for (const auto& name : names) {
        CAPTURE(name);
        const Scenario s = load_scenario("builtin:" + name);
        CHECK(s.name == name);
        const Json once = to_json(s);
        const Json twice = to_json(scenario_from_json(once));
        CHECK(once == twice);
        CHECK_NOTHROW(s.implementation.realize());
    }
}

TEST_CASE("scenario files on disk load by path")
{
    const Scenario s = load_scenario(source_path("data/scenarios/binary-choice.json"));
    CHECK(s.implementation.goal.has_value());
    CHECK(s.challenger.kind == game::ChallengerKind::RandomClick);
}

TEST_CASE("malformed scenarios are rejected")
{
    Json good = to_json(load_scenario("builtin:binary-choice"));

    Json extra = good;
    extra["surprise"] = 1;
    CHECK_ERROR_CODE(scenario_from_json(extra), ErrorCode::UnknownKey);

    Json bad_rule = good;
    bad_rule["watchdog"]["decision_rule"] = "majority";
    CHECK_THROWS_AS(scenario_from_json(bad_rule), Error);

    Json zero_q = good;
    zero_q["watchdog"]["queries_per_functionality"] = 0;
    CHECK_THROWS_AS(scenario_from_json(zero_q), Error);

    Json bad_goal = good;
    bad_goal["goal"]["terminal_states"] = {"nowhere"};
    CHECK_ERROR_CODE(scenario_from_json(bad_goal), ErrorCode::InvalidScenario);

    Json bad_kind = good;
    bad_kind["challenger"]["kind"] = "oracle";
    CHECK_THROWS_AS(scenario_from_json(bad_kind), Error);

    CHECK_ERROR_CODE(load_scenario("builtin:no-such-scenario"), ErrorCode::FileNotFound);
}

TEST_CASE("challenger kind tokens")
{
    CHECK(challenger_kind_from_token("random") == game::ChallengerKind::RandomClick);
    CHECK(challenger_kind_from_token("heuristic") == game::ChallengerKind::Heuristic);
    CHECK(to_token(game::ChallengerKind::Heuristic) == "heuristic");
    CHECK_THROWS_AS(challenger_kind_from_token("clever"), Error);
}

TEST_CASE("scenario files are stored in canonical form")
{
    for (const auto& name : builtin_scenario_names()) {
        CAPTURE(name);
        const std::string path = source_path("data/scenarios/" + name + ".json");
        CHECK(json_io::dump(to_json(load_scenario(path))) == json_io::read_text(path));
    }
}
