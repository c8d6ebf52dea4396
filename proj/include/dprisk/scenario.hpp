#pragma once

// Scenario files: a specification scheme, the adversary's overrides, the
// goal predicate, and default watchdog / challenger settings.

#include "dprisk/game.hpp"
#include "dprisk/json_io.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace dprisk {

struct Scenario {
    std::string name;
    std::string description;
    game::SubvertedImplementation implementation; // base is the specification
    game::WatchdogStrategy watchdog;
    game::ChallengerPolicy challenger;

    const game::Scheme& specification() const { return implementation.base; }
};

/// Structural decoding plus full validation (scheme, overrides, goal, strategy).
/// Throws Error(InvalidScenario) or a JSON decoding error.
Scenario scenario_from_json(const Json& value);
Json to_json(const Scenario& scenario);

/// Accepts a path or "builtin:<name>".
Scenario load_scenario(std::string_view reference);

std::vector<std::string> builtin_scenario_names();

std::string_view to_token(game::ChallengerKind kind); // "random", "heuristic"
game::ChallengerKind challenger_kind_from_token(std::string_view token);

} // namespace dprisk
