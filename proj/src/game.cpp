#include "dprisk/game.hpp"

#include "dprisk/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace dprisk::game {

namespace {

[[noreturn]] void invalid(const std::string& detail)
{
    throw Error(ErrorCode::InvalidScenario, detail);
}

std::string describe_actions(const std::vector<Action>& actions)
{
    std::ostringstream out;
    for (const auto& a : actions) {
        out << a.id << "->" << a.next;
        if (a.lure) {
            out << "[" << *a.lure << "]";
        }
        out << ";";
    }
    return out.str();
}

/// Runs `trial(i)` for every i in [0, trials) and sums the returned counters.
/// Each trial owns its random stream, so the split across threads cannot
/// change the totals.
template <std::size_t N>
std::array<std::uint64_t, N> tally(std::uint64_t trials, Execution execution,
                                   const std::function<std::array<bool, N>(std::uint64_t)>& trial)
{
    const unsigned threads =
        std::max(1u, static_cast<unsigned>(std::min<std::uint64_t>(execution.threads, trials)));
    std::vector<std::array<std::uint64_t, N>> partial(threads);
    std::vector<std::exception_ptr> failures(threads);

    auto work = [&](unsigned worker) {
        const std::uint64_t begin = trials * worker / threads;
        const std::uint64_t end = trials * (worker + 1) / threads;
        try {
            auto& counts = partial[worker];
            counts.fill(0);
            for (std::uint64_t i = begin; i < end; ++i) {
                const auto bits = trial(i);
                for (std::size_t k = 0; k < N; ++k) {
                    counts[k] += bits[k] ? 1 : 0;
                }
            }
        } catch (...) {
            failures[worker] = std::current_exception();
        }
    };

    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back(work, w);
        }
    }
    for (const auto& failure : failures) {
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    std::array<std::uint64_t, N> total{};
    for (const auto& counts : partial) {
        for (std::size_t k = 0; k < N; ++k) {
            total[k] += counts[k];
        }
    }
    return total;
}

const Functionality& functionality_of(const Scheme& scheme, const std::string& id)
{
    const Functionality* f = scheme.find(id);
    if (f == nullptr) {
        invalid("unknown functionality '" + id + "'");
    }
    return *f;
}

InteractionMachine& machine_of(Scheme& scheme, const std::string& id)
{
    Functionality* f = scheme.find(id);
    if (f == nullptr || !f->is_machine()) {
        invalid("'" + id + "' is not an interaction machine");
    }
    return std::get<InteractionMachine>(f->behavior);
}

MachineState& state_of(InteractionMachine& machine, const std::string& fid, const std::string& id)
{
    MachineState* s = machine.find(id);
    if (s == nullptr) {
        invalid("unknown state '" + id + "' in '" + fid + "'");
    }
    return *s;
}

} // namespace

const MachineState* InteractionMachine::find(const std::string& id) const
{
    auto it = std::find_if(states.begin(), states.end(),
                           [&](const MachineState& s) { return s.id == id; });
    return it == states.end() ? nullptr : &*it;
}

MachineState* InteractionMachine::find(const std::string& id)
{
    return const_cast<MachineState*>(std::as_const(*this).find(id));
}

std::vector<std::string> Functionality::domain() const
{
    std::vector<std::string> keys;
    if (const auto* table = std::get_if<LookupTable>(&behavior)) {
        for (const auto& [input, output] : table->outputs) {
            keys.push_back(input);
        }
    } else {
        for (const auto& s : machine().states) {
            keys.push_back(s.id);
        }
    }
    return keys;
}

std::optional<std::string> Functionality::respond(const std::string& key) const
{
    if (const auto* table = std::get_if<LookupTable>(&behavior)) {
        auto it = table->outputs.find(key);
        if (it == table->outputs.end()) {
            return std::nullopt;
        }
        return it->second;
    }
    const MachineState* s = machine().find(key);
    if (s == nullptr) {
        return std::nullopt;
    }
    return s->observation + "|" + (s->terminal ? "T" : "N") + "|" + describe_actions(s->actions);
}

const Functionality* Scheme::find(const std::string& id) const
{
    auto it = std::find_if(functionalities.begin(), functionalities.end(),
                           [&](const Functionality& f) { return f.id == id; });
    return it == functionalities.end() ? nullptr : &*it;
}

Functionality* Scheme::find(const std::string& id)
{
    return const_cast<Functionality*>(std::as_const(*this).find(id));
}

void validate_scheme(const Scheme& scheme)
{
    std::unordered_set<std::string> ids;
    for (const auto& f : scheme.functionalities) {
        if (f.id.empty()) {
            invalid("functionality id must be nonempty");
        }
        if (!ids.insert(f.id).second) {
            invalid("duplicate functionality id '" + f.id + "'");
        }
        if (!f.is_machine()) {
            if (std::get<LookupTable>(f.behavior).outputs.empty()) {
                invalid("lookup table '" + f.id + "' has an empty domain");
            }
            continue;
        }
        const auto& m = f.machine();
        std::unordered_set<std::string> state_ids;
        for (const auto& s : m.states) {
            if (!state_ids.insert(s.id).second) {
                invalid("duplicate state '" + s.id + "' in '" + f.id + "'");
            }
        }
        if (!state_ids.contains(m.start)) {
            invalid("start state '" + m.start + "' of '" + f.id + "' does not exist");
        }
        for (const auto& s : m.states) {
            if (!s.terminal && s.actions.empty()) {
                invalid("non-terminal state '" + s.id + "' in '" + f.id + "' has no actions");
            }
            std::unordered_set<std::string> action_ids;
            for (const auto& a : s.actions) {
                if (!action_ids.insert(a.id).second) {
                    invalid("duplicate action '" + a.id + "' in state '" + s.id + "'");
                }
                if (!state_ids.contains(a.next)) {
                    invalid("action '" + a.id + "' in state '" + s.id + "' leads to unknown state '" +
                            a.next + "'");
                }
            }
        }
        // Some terminal state must be reachable from the start.
        std::unordered_set<std::string> seen{m.start};
        std::deque<std::string> frontier{m.start};
        bool terminal_reachable = false;
        while (!frontier.empty() && !terminal_reachable) {
            const MachineState* s = m.find(frontier.front());
            frontier.pop_front();
            if (s->terminal) {
                terminal_reachable = true;
                break;
            }
            for (const auto& a : s->actions) {
                if (seen.insert(a.next).second) {
                    frontier.push_back(a.next);
                }
            }
        }
        if (!terminal_reachable) {
            invalid("no terminal state reachable from the start of '" + f.id + "'");
        }
    }
}

bool goal_holds(const GoalPredicate& goal, const Trace& trace)
{
    if (!trace.states.empty() && goal.terminal_states.contains(trace.states.back())) {
        return true;
    }
    return std::any_of(trace.actions.begin(), trace.actions.end(),
                       [&](const std::string& a) { return goal.actions.contains(a); });
}

Scheme SubvertedImplementation::realize() const
{
    Scheme out = base;
    for (const auto& entry : overrides) {
        std::visit(
            [&](const auto& o) {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, OutputOverride>) {
                    Functionality* f = out.find(o.functionality);
                    if (f == nullptr || f->is_machine()) {
                        invalid("'" + o.functionality + "' is not a lookup table");
                    }
                    auto& table = std::get<LookupTable>(f->behavior).outputs;
                    if (!table.contains(o.input)) {
                        invalid("input '" + o.input + "' not in the domain of '" + o.functionality + "'");
                    }
                    table[o.input] = o.output;
                } else if constexpr (std::is_same_v<T, ObservationOverride>) {
                    state_of(machine_of(out, o.functionality), o.functionality, o.state).observation =
                        o.observation;
                } else if constexpr (std::is_same_v<T, TransitionOverride>) {
                    auto& s = state_of(machine_of(out, o.functionality), o.functionality, o.state);
                    auto it = std::find_if(s.actions.begin(), s.actions.end(),
                                           [&](const Action& a) { return a.id == o.action; });
                    if (it == s.actions.end()) {
                        invalid("unknown action '" + o.action + "' in state '" + o.state + "'");
                    }
                    it->next = o.next;
                } else if constexpr (std::is_same_v<T, ActionsOverride>) {
                    state_of(machine_of(out, o.functionality), o.functionality, o.state).actions =
                        o.actions;
                } else {
                    auto& m = machine_of(out, o.functionality);
                    if (m.find(o.state.id) != nullptr) {
                        invalid("state '" + o.state.id + "' already exists in '" + o.functionality + "'");
                    }
                    m.states.push_back(o.state);
                }
            },
            entry);
    }
    validate_scheme(out);
    return out;
}

void validate_strategy(const WatchdogStrategy& strategy, const Scheme& specification)
{
    if (strategy.queries_per_functionality < 1) {
        invalid("queries_per_functionality must be at least 1");
    }
    for (const auto& [fid, weights] : strategy.query_weights) {
        const Functionality& f = functionality_of(specification, fid);
        const auto domain = f.domain();
        double total = 0.0;
        for (const auto& [key, w] : weights) {
            if (std::find(domain.begin(), domain.end(), key) == domain.end()) {
                invalid("query weight for '" + key + "' outside the domain of '" + fid + "'");
            }
            if (!(w >= 0.0)) {
                invalid("negative query weight in '" + fid + "'");
            }
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            invalid("query weights of '" + fid + "' do not sum to 1");
        }
    }
}

TrialRng::TrialRng(std::uint64_t master_seed, std::uint64_t trial_index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trial_index),
                      static_cast<std::uint32_t>(trial_index >> 32)};
    engine_.seed(seq);
}

std::size_t TrialRng::index(std::size_t bound)
{
    // Rejection keeps the draw unbiased: discard the short top slice.
    const std::uint64_t n = bound;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = engine_();
        if (x >= threshold) {
            return static_cast<std::size_t>(x % n);
        }
    }
}

double TrialRng::unit()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

bool TrialRng::bernoulli(double p)
{
    return unit() < p;
}

bool run_watchdog_trial(const WatchdogStrategy& strategy, const Scheme& specification,
                        const Scheme& target, TrialRng& rng)
{
    if (strategy.decision_rule == DecisionRule::ConstantPass) {
        return true;
    }
    for (const auto& f : specification.functionalities) {
        const auto domain = f.domain();
        const Functionality* implemented = target.find(f.id);
        const auto weights_it = strategy.query_weights.find(f.id);
        for (int q = 0; q < strategy.queries_per_functionality; ++q) {
            std::size_t pick = 0;
            if (weights_it == strategy.query_weights.end()) {
                pick = rng.index(domain.size());
            } else {
                const double u = rng.unit();
                double cumulative = 0.0;
                pick = domain.size() - 1;
                for (std::size_t k = 0; k < domain.size(); ++k) {
                    auto w = weights_it->second.find(domain[k]);
                    cumulative += w == weights_it->second.end() ? 0.0 : w->second;
                    if (u < cumulative) {
                        pick = k;
                        break;
                    }
                }
            }
            const std::string& key = domain[pick];
            if (implemented == nullptr || implemented->respond(key) != f.respond(key)) {
                return false;
            }
        }
    }
    return true;
}

Estimate estimate_det(const WatchdogStrategy& strategy, const Scheme& implementation,
                      const Scheme& specification, std::uint64_t trials, std::uint64_t seed,
                      Execution execution)
{
    if (trials == 0) {
        throw Error(ErrorCode::InvalidValue, "trials must be at least 1");
    }
    validate_strategy(strategy, specification);
    const auto counts = tally<2>(trials, execution, [&](std::uint64_t i) {
        TrialRng impl_rng(seed, i);
        TrialRng spec_rng(seed, i);
        return std::array<bool, 2>{
            run_watchdog_trial(strategy, specification, implementation, impl_rng),
            run_watchdog_trial(strategy, specification, specification, spec_rng)};
    });
    const double n = static_cast<double>(trials);
    const double p_impl = static_cast<double>(counts[0]) / n;
    const double p_spec = static_cast<double>(counts[1]) / n;
    Estimate out;
    out.value = std::abs(p_impl - p_spec);
    out.trials = trials;
    out.std_error = std::sqrt(p_impl * (1.0 - p_impl) / n + p_spec * (1.0 - p_spec) / n);
    out.seed = seed;
    return out;
}

Estimate estimate_det(const WatchdogStrategy& strategy, const SubvertedImplementation& impl,
                      std::uint64_t trials, std::uint64_t seed, Execution execution)
{
    return estimate_det(strategy, impl.realize(), impl.base, trials, seed, execution);
}

Trace run_interaction(const ChallengerPolicy& policy, const InteractionMachine& machine,
                      TrialRng& rng, std::size_t step_cap)
{
    Trace trace;
    const MachineState* state = machine.find(machine.start);
    if (state == nullptr) {
        invalid("start state '" + machine.start + "' does not exist");
    }
    trace.states.push_back(state->id);
    std::vector<const Action*> candidates;
    for (std::size_t step = 0; !state->terminal; ++step) {
        if (step >= step_cap) {
            throw Error(ErrorCode::InteractionDidNotTerminate,
                        "no terminal state after " + std::to_string(step_cap) + " steps");
        }
        candidates.clear();
        for (const auto& action : state->actions) {
            bool avoided = false;
            if (policy.kind == ChallengerKind::Heuristic && action.lure) {
                auto it = policy.sensitivity.find(*action.lure);
                avoided = rng.bernoulli(it == policy.sensitivity.end() ? 0.0 : it->second);
            }
            if (!avoided) {
                candidates.push_back(&action);
            }
        }
        if (candidates.empty()) {
            for (const auto& action : state->actions) {
                candidates.push_back(&action);
            }
        }
        const Action* chosen = candidates[rng.index(candidates.size())];
        trace.actions.push_back(chosen->id);
        state = machine.find(chosen->next);
        if (state == nullptr) {
            invalid("action '" + chosen->id + "' leads to unknown state '" + chosen->next + "'");
        }
        trace.states.push_back(state->id);
    }
    return trace;
}

bool run_challenge_trial(const ChallengerPolicy& policy, const Scheme& implemented,
                         const GoalPredicate& goal, TrialRng& rng, std::size_t step_cap)
{
    const Functionality& f = functionality_of(implemented, goal.functionality);
    if (!f.is_machine()) {
        invalid("goal functionality '" + goal.functionality + "' is not an interaction machine");
    }
    return goal_holds(goal, run_interaction(policy, f.machine(), rng, step_cap));
}

Estimate estimate_adv(const ChallengerPolicy& policy, const SubvertedImplementation& impl,
                      std::uint64_t trials, std::uint64_t seed, Execution execution,
                      std::size_t step_cap)
{
    if (trials == 0) {
        throw Error(ErrorCode::InvalidValue, "trials must be at least 1");
    }
    if (!impl.goal) {
        invalid("implementation has no goal predicate");
    }
    for (const auto& [cue, s] : policy.sensitivity) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw Error(ErrorCode::InvalidValue, "sensitivity for '" + cue + "' must lie in [0,1]");
        }
    }
    const Scheme implemented = impl.realize();
    const GoalPredicate& goal = *impl.goal;
    const auto counts = tally<1>(trials, execution, [&](std::uint64_t i) {
        TrialRng rng(seed, i);
        return std::array<bool, 1>{run_challenge_trial(policy, implemented, goal, rng, step_cap)};
    });
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(counts[0]) / n;
    return Estimate{p, trials, std::sqrt(p * (1.0 - p) / n), seed};
}

std::uint64_t minimum_trials(const ResistanceThresholds& thresholds)
{
    const double floor = std::min(thresholds.epsilon_det, thresholds.delta_adv);
    return static_cast<std::uint64_t>(std::ceil(1.0 / (floor * floor) - 1e-9));
}

ResistanceVerdict check_resistance(const Estimate& det, const Estimate& adv,
                                   const ResistanceThresholds& thresholds)
{
    auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!open_unit(thresholds.epsilon_det) || !open_unit(thresholds.delta_adv)) {
        throw Error(ErrorCode::InvalidValue, "resistance thresholds must lie in (0,1)");
    }
    const std::uint64_t needed = minimum_trials(thresholds);
    if (det.trials < needed || adv.trials < needed) {
        throw Error(ErrorCode::InsufficientTrials,
                    "need at least " + std::to_string(needed) + " trials per estimate");
    }
    ResistanceVerdict v;
    v.det_margin = det.value - thresholds.epsilon_det;
    v.adv_margin = thresholds.delta_adv - adv.value;
    const bool via_det = det.value >= thresholds.epsilon_det;
    const bool via_adv = adv.value <= thresholds.delta_adv;
    v.resistant = via_det || via_adv;
    v.branch = via_det && via_adv ? ResistanceBranch::Both
               : via_det          ? ResistanceBranch::Detection
               : via_adv          ? ResistanceBranch::Advantage
                                  : ResistanceBranch::None;
    return v;
}

std::string to_token(ResistanceBranch branch)
{
    switch (branch) {
    case ResistanceBranch::None: return "none";
    case ResistanceBranch::Detection: return "detection";
    case ResistanceBranch::Advantage: return "advantage";
    case ResistanceBranch::Both: return "both";
    }
    return "none";
}

DetectionFactor det_to_factor(const Estimate& estimate)
{
    return DetectionFactor{estimate.value, DetectionSource::Simulated};
}

} // namespace dprisk::game
