#include "dprisk/scenario.hpp"

#include "dprisk/builtin.hpp"
#include "dprisk/error.hpp"

namespace dprisk {

using json_io::ObjectReader;
using namespace dprisk::game;

namespace {

[[noreturn]] void invalid(const std::string& detail)
{
    throw Error(ErrorCode::InvalidScenario, detail);
}

const Json& array_field(const ObjectReader& obj, std::string_view key)
{
    const Json& v = obj.required(key);
    if (!v.is_array()) {
        invalid("'" + std::string(key) + "' in " + obj.context() + " must be an array");
    }
    return v;
}

std::set<std::string> string_set(const Json& value, const std::string& context)
{
    if (!value.is_array()) {
        invalid(context + " must be an array of strings");
    }
    std::set<std::string> out;
    for (const auto& item : value) {
        if (!item.is_string()) {
            invalid(context + " must be an array of strings");
        }
        out.insert(item.get<std::string>());
    }
    return out;
}

Action action_from_json(const Json& value, const std::string& context)
{
    ObjectReader obj(value, context);
    obj.allow_only({"id", "next", "lure"});
    return Action{obj.string("id"), obj.string("next"), obj.optional_string("lure")};
}

Json to_json(const Action& a)
{
    Json out{{"id", a.id}, {"next", a.next}};
    if (a.lure) {
        out["lure"] = *a.lure;
    }
    return out;
}

std::vector<Action> actions_from_json(const Json& value, const std::string& context)
{
    if (!value.is_array()) {
        invalid(context + " must be an array");
    }
    std::vector<Action> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        out.push_back(action_from_json(value[i], context + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Json to_json(const std::vector<Action>& actions)
{
    Json out = Json::array();
    for (const auto& a : actions) {
        out.push_back(to_json(a));
    }
    return out;
}

MachineState state_from_json(const Json& value, const std::string& context)
{
    ObjectReader obj(value, context);
    obj.allow_only({"id", "observation", "terminal", "actions"});
    MachineState s;
    s.id = obj.string("id");
    s.observation = obj.optional_string("observation").value_or("");
    s.terminal = obj.boolean("terminal", false);
    if (obj.has("actions")) {
        s.actions = actions_from_json(obj.required("actions"), context + ".actions");
    }
    return s;
}

Json to_json(const MachineState& s)
{
    Json out{{"id", s.id}, {"observation", s.observation}};
    if (s.terminal) {
        out["terminal"] = true;
    }
    if (!s.actions.empty()) {
        out["actions"] = to_json(s.actions);
    }
    return out;
}

Functionality functionality_from_json(const Json& value, const std::string& context)
{
    ObjectReader obj(value, context);
    const std::string kind = obj.string("kind");
    Functionality f;
    f.id = obj.string("id");
    if (kind == "table") {
        obj.allow_only({"id", "kind", "outputs"});
        LookupTable table;
        const Json& outputs = obj.required("outputs");
        if (!outputs.is_object()) {
            invalid(context + ".outputs must be an object");
        }
        for (const auto& item : outputs.items()) {
            if (!item.value().is_string()) {
                invalid(context + ".outputs['" + item.key() + "'] must be a string");
            }
            table.outputs.emplace(item.key(), item.value().get<std::string>());
        }
        f.behavior = std::move(table);
    } else if (kind == "machine") {
        obj.allow_only({"id", "kind", "start", "states"});
        InteractionMachine m;
        m.start = obj.string("start");
        const Json& states = array_field(obj, "states");
        for (std::size_t i = 0; i < states.size(); ++i) {
            m.states.push_back(
                state_from_json(states[i], context + ".states[" + std::to_string(i) + "]"));
        }
        f.behavior = std::move(m);
    } else {
        invalid(context + ".kind must be \"table\" or \"machine\"");
    }
    return f;
}

Json to_json(const Functionality& f)
{
    if (const auto* table = std::get_if<LookupTable>(&f.behavior)) {
        Json outputs = Json::object();
        for (const auto& [in, out] : table->outputs) {
            outputs[in] = out;
        }
        return Json{{"id", f.id}, {"kind", "table"}, {"outputs", std::move(outputs)}};
    }
    Json states = Json::array();
    for (const auto& s : f.machine().states) {
        states.push_back(to_json(s));
    }
    return Json{{"id", f.id}, {"kind", "machine"}, {"start", f.machine().start},
                {"states", std::move(states)}};
}

Override override_from_json(const Json& value, const std::string& context)
{
    ObjectReader obj(value, context);
    const std::string kind = obj.string("kind");
    const std::string fid = obj.string("functionality");
    if (kind == "output") {
        obj.allow_only({"kind", "functionality", "input", "output"});
        return OutputOverride{fid, obj.string("input"), obj.string("output")};
    }
    if (kind == "observation") {
        obj.allow_only({"kind", "functionality", "state", "observation"});
        return ObservationOverride{fid, obj.string("state"), obj.string("observation")};
    }
    if (kind == "transition") {
        obj.allow_only({"kind", "functionality", "state", "action", "next"});
        return TransitionOverride{fid, obj.string("state"), obj.string("action"), obj.string("next")};
    }
    if (kind == "actions") {
        obj.allow_only({"kind", "functionality", "state", "actions"});
        return ActionsOverride{fid, obj.string("state"),
                               actions_from_json(obj.required("actions"), context + ".actions")};
    }
    if (kind == "add_state") {
        obj.allow_only({"kind", "functionality", "state"});
        return StateOverride{fid, state_from_json(obj.required("state"), context + ".state")};
    }
    invalid(context + ".kind must be one of output, observation, transition, actions, add_state");
}

Json to_json(const Override& entry)
{
    return std::visit(
        [](const auto& o) -> Json {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, OutputOverride>) {
                return {{"kind", "output"}, {"functionality", o.functionality},
                        {"input", o.input}, {"output", o.output}};
            } else if constexpr (std::is_same_v<T, ObservationOverride>) {
                return {{"kind", "observation"}, {"functionality", o.functionality},
                        {"state", o.state}, {"observation", o.observation}};
            } else if constexpr (std::is_same_v<T, TransitionOverride>) {
                return {{"kind", "transition"}, {"functionality", o.functionality},
                        {"state", o.state}, {"action", o.action}, {"next", o.next}};
            } else if constexpr (std::is_same_v<T, ActionsOverride>) {
                return {{"kind", "actions"}, {"functionality", o.functionality},
                        {"state", o.state}, {"actions", to_json(o.actions)}};
            } else {
                return {{"kind", "add_state"}, {"functionality", o.functionality},
                        {"state", to_json(o.state)}};
            }
        },
        entry);
}

void validate_goal(const GoalPredicate& goal, const Scheme& implemented)
{
    const Functionality* f = implemented.find(goal.functionality);
    if (f == nullptr || !f->is_machine()) {
        invalid("goal functionality '" + goal.functionality + "' is not an interaction machine");
    }
    for (const auto& id : goal.terminal_states) {
        const MachineState* s = f->machine().find(id);
        if (s == nullptr || !s->terminal) {
            invalid("goal state '" + id + "' is not a terminal state of '" + goal.functionality + "'");
        }
    }
    if (goal.terminal_states.empty() && goal.actions.empty()) {
        invalid("goal predicate names no terminal state and no action");
    }
}

} // namespace

std::string_view to_token(ChallengerKind kind)
{
    return kind == ChallengerKind::RandomClick ? "random" : "heuristic";
}

ChallengerKind challenger_kind_from_token(std::string_view token)
{
    if (token == "random") {
        return ChallengerKind::RandomClick;
    }
    if (token == "heuristic") {
        return ChallengerKind::Heuristic;
    }
    throw Error(ErrorCode::InvalidValue,
                "challenger kind must be \"random\" or \"heuristic\", got '" + std::string(token) + "'");
}

Scenario scenario_from_json(const Json& value)
{
    ObjectReader root(value, "scenario");
    root.allow_only({"name", "description", "specification", "overrides", "goal", "watchdog",
                     "challenger"});
    Scenario s;
    s.name = root.string("name");
    s.description = root.optional_string("description").value_or("");

    ObjectReader spec(root.required("specification"), "scenario.specification");
    spec.allow_only({"functionalities"});
    const Json& functionalities = array_field(spec, "functionalities");
    for (std::size_t i = 0; i < functionalities.size(); ++i) {
        s.implementation.base.functionalities.push_back(functionality_from_json(
            functionalities[i], "specification.functionalities[" + std::to_string(i) + "]"));
    }
    if (s.implementation.base.functionalities.empty()) {
        invalid("specification has no functionalities");
    }
    validate_scheme(s.implementation.base);

    if (root.has("overrides")) {
        const Json& overrides = array_field(root, "overrides");
        for (std::size_t i = 0; i < overrides.size(); ++i) {
            s.implementation.overrides.push_back(
                override_from_json(overrides[i], "overrides[" + std::to_string(i) + "]"));
        }
    }
    const Scheme implemented = s.implementation.realize();

    if (root.has("goal")) {
        ObjectReader goal(root.required("goal"), "scenario.goal");
        goal.allow_only({"functionality", "terminal_states", "actions"});
        GoalPredicate g;
        g.functionality = goal.string("functionality");
        if (goal.has("terminal_states")) {
            g.terminal_states = string_set(goal.required("terminal_states"), "goal.terminal_states");
        }
        if (goal.has("actions")) {
            g.actions = string_set(goal.required("actions"), "goal.actions");
        }
        validate_goal(g, implemented);
        s.implementation.goal = std::move(g);
    }

    if (root.has("watchdog")) {
        ObjectReader w(root.required("watchdog"), "scenario.watchdog");
        w.allow_only({"queries_per_functionality", "decision_rule", "query_weights"});
        if (w.has("queries_per_functionality")) {
            s.watchdog.queries_per_functionality =
                static_cast<int>(w.integer("queries_per_functionality"));
        }
        if (auto rule = w.optional_string("decision_rule")) {
            if (*rule == "all_match") {
                s.watchdog.decision_rule = DecisionRule::AllMatch;
            } else if (*rule == "constant_pass") {
                s.watchdog.decision_rule = DecisionRule::ConstantPass;
            } else {
                invalid("watchdog.decision_rule must be \"all_match\" or \"constant_pass\"");
            }
        }
        if (w.has("query_weights")) {
            const Json& weights = w.required("query_weights");
            if (!weights.is_object()) {
                invalid("watchdog.query_weights must be an object");
            }
            for (const auto& per_f : weights.items()) {
                if (!per_f.value().is_object()) {
                    invalid("watchdog.query_weights['" + per_f.key() + "'] must be an object");
                }
                for (const auto& item : per_f.value().items()) {
                    if (!item.value().is_number()) {
                        invalid("query weight must be a number");
                    }
                    s.watchdog.query_weights[per_f.key()][item.key()] = item.value().get<double>();
                }
            }
        }
    }
    validate_strategy(s.watchdog, s.implementation.base);

    if (root.has("challenger")) {
        ObjectReader c(root.required("challenger"), "scenario.challenger");
        c.allow_only({"kind", "sensitivity"});
        s.challenger.kind = challenger_kind_from_token(c.string("kind"));
        if (c.has("sensitivity")) {
            const Json& sens = c.required("sensitivity");
            if (!sens.is_object()) {
                invalid("challenger.sensitivity must be an object");
            }
            for (const auto& item : sens.items()) {
                if (!item.value().is_number() || item.value().get<double>() < 0.0 ||
                    item.value().get<double>() > 1.0) {
                    invalid("challenger.sensitivity['" + item.key() + "'] must lie in [0,1]");
                }
                s.challenger.sensitivity[item.key()] = item.value().get<double>();
            }
        }
    }
    return s;
}

Json to_json(const Scenario& s)
{
    Json functionalities = Json::array();
    for (const auto& f : s.implementation.base.functionalities) {
        functionalities.push_back(to_json(f));
    }
    Json overrides = Json::array();
    for (const auto& o : s.implementation.overrides) {
        overrides.push_back(to_json(o));
    }
    Json out{{"name", s.name},
             {"description", s.description},
             {"specification", {{"functionalities", std::move(functionalities)}}},
             {"overrides", std::move(overrides)}};
    if (s.implementation.goal) {
        const auto& g = *s.implementation.goal;
        out["goal"] = {{"functionality", g.functionality},
                       {"terminal_states", g.terminal_states},
                       {"actions", g.actions}};
    }
    Json watchdog{{"queries_per_functionality", s.watchdog.queries_per_functionality},
                  {"decision_rule", s.watchdog.decision_rule == DecisionRule::AllMatch
                                        ? "all_match"
                                        : "constant_pass"}};
    if (!s.watchdog.query_weights.empty()) {
        watchdog["query_weights"] = s.watchdog.query_weights;
    }
    out["watchdog"] = std::move(watchdog);
    Json challenger{{"kind", std::string(to_token(s.challenger.kind))}};
    if (!s.challenger.sensitivity.empty()) {
        challenger["sensitivity"] = s.challenger.sensitivity;
    }
    out["challenger"] = std::move(challenger);
    return out;
}

Scenario load_scenario(std::string_view reference)
{
    const std::string text = builtin::read_reference(reference, "scenarios");
    return scenario_from_json(json_io::parse(text, reference));
}

std::vector<std::string> builtin_scenario_names()
{
    return builtin::keys_with_prefix("scenarios/");
}

} // namespace dprisk
