#pragma once

// Executable form of the adversary / watchdog / challenger game.
//
// A scheme is a list of functionalities. Each functionality is either a
// lookup table over a finite input domain or an interaction machine (states
// with observations and actions). An adversary subverts the specification
// through overrides; a watchdog interrogates the implementation and emits a
// bit; a challenger steps through the implemented machine and the adversary
// wins when the goal predicate holds on the resulting trace.

#include "dprisk/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace dprisk::game {

struct Action {
    std::string id;
    std::string next;
    /// Cue class that lets an attentive challenger recognise this action as a lure.
    std::optional<std::string> lure;

    friend bool operator==(const Action&, const Action&) = default;
};

struct MachineState {
    std::string id;
    std::string observation;
    bool terminal = false;
    std::vector<Action> actions;

    friend bool operator==(const MachineState&, const MachineState&) = default;
};

struct InteractionMachine {
    std::string start;
    std::vector<MachineState> states;

    const MachineState* find(const std::string& id) const;
    MachineState* find(const std::string& id);

    friend bool operator==(const InteractionMachine&, const InteractionMachine&) = default;
};

struct LookupTable {
    std::map<std::string, std::string> outputs; // input -> output

    friend bool operator==(const LookupTable&, const LookupTable&) = default;
};

struct Functionality {
    std::string id;
    std::variant<LookupTable, InteractionMachine> behavior;

    bool is_machine() const { return std::holds_alternative<InteractionMachine>(behavior); }
    const InteractionMachine& machine() const { return std::get<InteractionMachine>(behavior); }

    /// Query keys: table inputs, or machine state ids.
    std::vector<std::string> domain() const;
    /// Canonical response text for a query key; nullopt when the key is absent.
    std::optional<std::string> respond(const std::string& key) const;

    friend bool operator==(const Functionality&, const Functionality&) = default;
};

struct Scheme {
    std::vector<Functionality> functionalities;

    const Functionality* find(const std::string& id) const;
    Functionality* find(const std::string& id);

    friend bool operator==(const Scheme&, const Scheme&) = default;
};

/// Throws InvalidScenario: duplicate ids, dangling transitions, non-terminal
/// states without actions, machines with no reachable terminal state.
void validate_scheme(const Scheme& scheme);

struct OutputOverride {
    std::string functionality;
    std::string input;
    std::string output;
};

struct ObservationOverride {
    std::string functionality;
    std::string state;
    std::string observation;
};

struct TransitionOverride {
    std::string functionality;
    std::string state;
    std::string action;
    std::string next;
};

/// Replaces a state's whole action list (adds or removes choices).
struct ActionsOverride {
    std::string functionality;
    std::string state;
    std::vector<Action> actions;
};

/// Adds a state that the specification does not have.
struct StateOverride {
    std::string functionality;
    MachineState state;
};

using Override = std::variant<OutputOverride, ObservationOverride, TransitionOverride,
                              ActionsOverride, StateOverride>;

struct GoalPredicate {
    std::string functionality;
    std::set<std::string> terminal_states;
    std::set<std::string> actions;
};

struct Trace {
    std::vector<std::string> states;
    std::vector<std::string> actions;
};

/// Goal holds when the trace ends in a goal terminal or took a goal action.
bool goal_holds(const GoalPredicate& goal, const Trace& trace);

struct SubvertedImplementation {
    Scheme base;
    std::vector<Override> overrides;
    std::optional<GoalPredicate> goal;

    /// The implemented scheme; equals `base` when there are no overrides.
    Scheme realize() const;
};

enum class DecisionRule { AllMatch, ConstantPass };

struct WatchdogStrategy {
    int queries_per_functionality = 1;
    /// Optional per-functionality weights over query keys; uniform otherwise.
    std::map<std::string, std::map<std::string, double>> query_weights;
    DecisionRule decision_rule = DecisionRule::AllMatch;
};

/// Throws InvalidScenario when q < 1 or weights do not form a distribution
/// over the specification's domains.
void validate_strategy(const WatchdogStrategy& strategy, const Scheme& specification);

enum class ChallengerKind { RandomClick, Heuristic };

struct ChallengerPolicy {
    ChallengerKind kind = ChallengerKind::RandomClick;
    /// Heuristic only: probability of recognising a lure of each cue class.
    std::map<std::string, double> sensitivity;
};

/// Per-trial random stream. Draws use only the raw 64-bit engine output so
/// results do not depend on the standard library's distribution code.
class TrialRng {
public:
    TrialRng(std::uint64_t master_seed, std::uint64_t trial_index);

    std::size_t index(std::size_t bound); // uniform in [0, bound)
    double unit();                         // uniform in [0, 1)
    bool bernoulli(double p);

private:
    std::mt19937_64 engine_;
};

struct Estimate {
    double value = 0.0;
    std::uint64_t trials = 0;
    double std_error = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const Estimate&, const Estimate&) = default;
};

struct Execution {
    unsigned threads = 1;
};

inline constexpr std::size_t kDefaultStepCap = 10'000;

/// One interrogation: q draws per functionality, 1 iff every response matches.
bool run_watchdog_trial(const WatchdogStrategy& strategy, const Scheme& specification,
                        const Scheme& target, TrialRng& rng);

/// |Pr[W(impl)=1] - Pr[W(spec)=1]| with both runs of trial i sharing stream i.
Estimate estimate_det(const WatchdogStrategy& strategy, const Scheme& implementation,
                      const Scheme& specification, std::uint64_t trials, std::uint64_t seed,
                      Execution execution = {});

Estimate estimate_det(const WatchdogStrategy& strategy, const SubvertedImplementation& impl,
                      std::uint64_t trials, std::uint64_t seed, Execution execution = {});

/// Steps the goal functionality from its start state to a terminal state.
/// Throws InteractionDidNotTerminate past `step_cap` steps.
Trace run_interaction(const ChallengerPolicy& policy, const InteractionMachine& machine,
                      TrialRng& rng, std::size_t step_cap = kDefaultStepCap);

bool run_challenge_trial(const ChallengerPolicy& policy, const Scheme& implemented,
                         const GoalPredicate& goal, TrialRng& rng,
                         std::size_t step_cap = kDefaultStepCap);

Estimate estimate_adv(const ChallengerPolicy& policy, const SubvertedImplementation& impl,
                      std::uint64_t trials, std::uint64_t seed, Execution execution = {},
                      std::size_t step_cap = kDefaultStepCap);

struct ResistanceThresholds {
    double epsilon_det = 0.1;
    double delta_adv = 0.05;
};

enum class ResistanceBranch { None, Detection, Advantage, Both };

struct ResistanceVerdict {
    bool resistant = false;
    ResistanceBranch branch = ResistanceBranch::None;
    double det_margin = 0.0; // det - epsilon_det
    double adv_margin = 0.0; // delta_adv - adv
    std::string scope = "for the supplied watchdog and challenger only";
};

std::uint64_t minimum_trials(const ResistanceThresholds& thresholds);

/// Resistant iff det >= epsilon_det or adv <= delta_adv.
/// Throws InsufficientTrials when either estimate used fewer than
/// 1 / min(epsilon_det, delta_adv)^2 trials.
ResistanceVerdict check_resistance(const Estimate& det, const Estimate& adv,
                                   const ResistanceThresholds& thresholds);

std::string to_token(ResistanceBranch branch);

/// Feeds a simulated DET into the scoring pipeline unchanged.
DetectionFactor det_to_factor(const Estimate& estimate);
} // namespace dprisk::game
