#include "dprisk/cli.hpp"

#include "dprisk/builtin.hpp"
#include "dprisk/calibration.hpp"
#include "dprisk/corpus.hpp"
#include "dprisk/error.hpp"
#include "dprisk/game.hpp"
#include "dprisk/scenario.hpp"
#include "dprisk/service.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <ostream>

namespace dprisk::cli {

namespace {

std::string fixed(double value, int digits)
{
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
    return buffer;
}

ReportFormat report_format(const std::string& token)
{
    return token == "machine" ? ReportFormat::Machine : ReportFormat::Human;
}

// ---- score ----------------------------------------------------------------

struct ScoreOptions {
    std::string corpus;
    std::string profile = "builtin:default";
    std::string detector = "builtin:default";
    std::string case_id;
    std::string mode = "both";
    std::string format = "human";
};

int cmd_score(const ScoreOptions& opt, std::ostream& out)
{
    const Corpus full = load_corpus(opt.corpus);
    const WeightProfile profile = load_profile(opt.profile);
    if (auto v = validate_profile(profile); !v.ok()) {
        throw Error(ErrorCode::InvalidProfile, v.violations.front().message);
    }
    const DetectorProfile detector = load_detector(opt.detector);

    Corpus selected = full;
    if (!opt.case_id.empty()) {
        const CaseRecord* record = full.find(opt.case_id);
        if (record == nullptr) {
            throw Error(ErrorCode::InvalidValue, "no case '" + opt.case_id + "' in the corpus");
        }
        selected.cases = {*record};
    }

    std::vector<AssessmentMode> modes;
    if (opt.mode == "both") {
        modes.assign(kBothModes.begin(), kBothModes.end());
    } else {
        modes.push_back(mode_from_token(opt.mode));
    }
    const auto assessments = batch_score(selected, profile, detector, modes);
    out << emit_report(assessments, report_format(opt.format));
    return kSuccess;
}

// ---- simulate -------------------------------------------------------------

struct SimulateOptions {
    std::string scenario;
    std::uint64_t trials = 10'000;
    std::optional<std::uint64_t> seed;
    std::string policy;
    std::vector<std::string> sensitivity;
    int queries = 0;
    double epsilon_det = 0.1;
    double delta_adv = 0.05;
    unsigned threads = 1;
    std::size_t step_cap = game::kDefaultStepCap;
    std::string format = "human";
};

Json estimate_json(const game::Estimate& e)
{
    return Json{{"value", e.value}, {"std_error", e.std_error}, {"trials", e.trials}, {"seed", e.seed}};
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out)
{
    if (!opt.seed) {
        throw Error(ErrorCode::InvalidValue, "--seed is required (no implicit random seed)");
    }
    if (opt.trials == 0) {
        throw Error(ErrorCode::InvalidValue, "--trials must be at least 1");
    }
    Scenario scenario = load_scenario(opt.scenario);
    if (opt.queries > 0) {
        scenario.watchdog.queries_per_functionality = opt.queries;
    }
    if (!opt.policy.empty()) {
        scenario.challenger.kind = challenger_kind_from_token(opt.policy);
    }
    for (const auto& entry : opt.sensitivity) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidValue, "--sensitivity expects cue=value, got '" + entry + "'");
        }
        double value = 0.0;
        try {
            value = std::stod(entry.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidValue, "--sensitivity value in '" + entry + "'");
        }
        scenario.challenger.sensitivity[entry.substr(0, eq)] = value;
    }

    const game::Execution exec{opt.threads};
    const std::uint64_t seed = *opt.seed;
    const game::Estimate det =
        game::estimate_det(scenario.watchdog, scenario.implementation, opt.trials, seed, exec);
    std::optional<game::Estimate> adv;
    std::optional<game::ResistanceVerdict> verdict;
    const game::ResistanceThresholds thresholds{opt.epsilon_det, opt.delta_adv};
    if (scenario.implementation.goal) {
        adv = game::estimate_adv(scenario.challenger, scenario.implementation, opt.trials, seed, exec,
                                 opt.step_cap);
        verdict = game::check_resistance(det, *adv, thresholds);
    }

    if (opt.format == "machine") {
        Json doc{{"scenario", scenario.name},
                 {"watchdog", {{"queries_per_functionality", scenario.watchdog.queries_per_functionality}}},
                 {"challenger", {{"kind", std::string(to_token(scenario.challenger.kind))},
                                 {"sensitivity", scenario.challenger.sensitivity}}},
                 {"det", estimate_json(det)},
                 {"adv", adv ? estimate_json(*adv) : Json(nullptr)}};
        if (verdict) {
            doc["verdict"] = {{"resistant", verdict->resistant},
                              {"branch", game::to_token(verdict->branch)},
                              {"det_margin", verdict->det_margin},
                              {"adv_margin", verdict->adv_margin},
                              {"epsilon_det", thresholds.epsilon_det},
                              {"delta_adv", thresholds.delta_adv},
                              {"scope", verdict->scope}};
        } else {
            doc["verdict"] = nullptr;
        }
        out << json_io::dump(doc);
        return kSuccess;
    }

    out << "scenario: " << scenario.name << "\n";
    out << "trials: " << opt.trials << "  seed: " << seed << "\n";
    out << "watchdog: " << scenario.watchdog.queries_per_functionality
        << " queries per functionality\n";
    out << "challenger: " << to_token(scenario.challenger.kind) << "\n";
    out << "DET = " << fixed(det.value, 5) << " +/- " << fixed(det.std_error, 5) << " (1 s.e.)\n";
    if (adv) {
        out << "ADV = " << fixed(adv->value, 5) << " +/- " << fixed(adv->std_error, 5) << " (1 s.e.)\n";
        out << "verdict: " << (verdict->resistant ? "resistant" : "not resistant") << " via "
            << game::to_token(verdict->branch) << " (epsilon_det " << fixed(thresholds.epsilon_det, 3)
            << ", delta_adv " << fixed(thresholds.delta_adv, 3) << "; " << verdict->scope << ")\n";
    } else {
        out << "ADV = n/a (scenario has no goal predicate)\n";
    }
    return kSuccess;
}

// ---- calibrate ------------------------------------------------------------

struct CalibrateOptions {
    std::string constraints;
    std::string corpus = "builtin:paper-cases";
    std::string base_profile = "builtin:default";
    std::string base_detector = "builtin:default";
    double grid_step = 0.05;
    std::string out_profile;
    std::string out_detector;
};

int cmd_calibrate(const CalibrateOptions& opt, std::ostream& out)
{
    const auto constraints = load_constraints(opt.constraints);
    const Corpus corpus = load_corpus(opt.corpus);
    const WeightProfile base_profile = load_profile(opt.base_profile);
    const DetectorProfile base_detector = load_detector(opt.base_detector);
    if (!(opt.grid_step > 0.0 && opt.grid_step <= 1.0)) {
        throw Error(ErrorCode::InvalidValue, "--grid-step must lie in (0,1]");
    }
    const CalibrationResult result = calibrate(corpus, constraints,
                                               default_search_space(base_detector, opt.grid_step),
                                               base_profile, base_detector);
    if (result.found) {
        if (!opt.out_profile.empty()) {
            json_io::write_text(opt.out_profile, json_io::dump(to_json(result.profile)));
        }
        if (!opt.out_detector.empty()) {
            json_io::write_text(opt.out_detector, json_io::dump(to_json(result.detector)));
        }
    }
    out << json_io::dump(to_json(result));
    return result.found ? kSuccess : kCalibrationExhausted;
}

// ---- serve ----------------------------------------------------------------

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string taxonomy = "builtin:default";
    std::vector<std::string> profiles{"builtin:default"};
    std::vector<std::string> detectors{"builtin:default"};
};

std::atomic<HttpServer*> g_active_server{nullptr};

extern "C" void stop_active_server(int)
{
    if (HttpServer* server = g_active_server.load()) {
        server->stop();
    }
}

int cmd_serve(const ServeOptions& opt, std::ostream& out, std::ostream& err)
{
    ServiceConfig config;
    config.taxonomy = load_taxonomy(opt.taxonomy);
    for (const auto& p : opt.profiles) {
        config.profiles.push_back(load_profile(p));
    }
    for (const auto& d : opt.detectors) {
        config.detectors.push_back(load_detector(d));
    }
    const ScoringService service(std::move(config));
    HttpServer server(service);
    if (!server.bind(opt.host, opt.port)) {
        err << "error: address_in_use: cannot listen on " << opt.host << ":" << opt.port << "\n";
        return kInputError;
    }
    out << "listening on http://" << opt.host << ":" << server.port() << "\n" << std::flush;
    g_active_server = &server;
    auto previous_int = std::signal(SIGINT, stop_active_server);
    auto previous_term = std::signal(SIGTERM, stop_active_server);
    server.listen();
    std::signal(SIGINT, previous_int);
    std::signal(SIGTERM, previous_term);
    g_active_server = nullptr;
    return kSuccess;
}

// ---- validate / canon / list ---------------------------------------------

struct FileOptions {
    std::string kind;
    std::string input;
    std::string output;
};

int cmd_validate(const FileOptions& opt, std::ostream& out)
{
    if (opt.kind == "profile") {
        const auto validation = validate_profile(load_profile(opt.input));
        if (!validation.ok()) {
            for (const auto& v : validation.violations) {
                out << "violation: " << v.code << ": " << v.message << "\n";
            }
            return kInputError;
        }
    } else if (opt.kind == "detector") {
        load_detector(opt.input);
    } else if (opt.kind == "taxonomy") {
        load_taxonomy(opt.input);
    } else if (opt.kind == "corpus") {
        load_corpus(opt.input);
    } else if (opt.kind == "constraints") {
        load_constraints(opt.input);
    } else if (opt.kind == "scenario") {
        load_scenario(opt.input);
    }
    out << "ok\n";
    return kSuccess;
}

int cmd_canon(const FileOptions& opt, std::ostream& out)
{
    Json doc;
    if (opt.kind == "profile") {
        doc = to_json(load_profile(opt.input));
    } else if (opt.kind == "detector") {
        doc = to_json(load_detector(opt.input));
    } else if (opt.kind == "taxonomy") {
        doc = to_json(load_taxonomy(opt.input));
    } else if (opt.kind == "corpus") {
        doc = to_json(load_corpus(opt.input));
    } else if (opt.kind == "constraints") {
        doc = to_json(load_constraints(opt.input));
    } else {
        doc = to_json(load_scenario(opt.input));
    }
    const std::string text = json_io::dump(doc);
    if (opt.output.empty()) {
        out << text;
    } else {
        json_io::write_text(opt.output, text);
    }
    return kSuccess;
}

int cmd_list(std::ostream& out)
{
    for (const std::string group : {"profiles", "detectors", "taxonomy", "fixtures", "scenarios"}) {
        out << group << ":\n";
        for (const auto& name : builtin::keys_with_prefix(group + "/")) {
            out << "  builtin:" << name << "\n";
        }
    }
    return kSuccess;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Deceptive-pattern risk scoring, game simulation and calibration", "dprisk"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    const std::vector<std::string> formats{"human", "machine"};

    ScoreOptions score;
    auto* score_cmd = app.add_subcommand("score", "Score cases of a corpus");
    score_cmd->add_option("--corpus", score.corpus, "Corpus file or builtin:<name>")->required();
    score_cmd->add_option("--profile", score.profile, "Weight profile")->capture_default_str();
    score_cmd->add_option("--detector", score.detector, "Detector profile")->capture_default_str();
    score_cmd->add_option("--case", score.case_id, "Score only this case id");
    score_cmd->add_option("--mode", score.mode, "with | baseline | both")
        ->check(CLI::IsMember({"with", "baseline", "both"}))
        ->capture_default_str();
    score_cmd->add_option("--format", score.format, "human | machine")
        ->check(CLI::IsMember(formats))
        ->capture_default_str();

    SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Estimate DET and ADV for a game scenario");
    sim_cmd->add_option("--scenario", sim.scenario, "Scenario file or builtin:<name>")->required();
    sim_cmd->add_option("--trials", sim.trials, "Monte Carlo trials")->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "Master seed (required)");
    sim_cmd->add_option("--policy", sim.policy, "Challenger policy: random | heuristic")
        ->check(CLI::IsMember({"random", "heuristic"}));
    sim_cmd->add_option("--sensitivity", sim.sensitivity, "Heuristic cue sensitivity, cue=value");
    sim_cmd->add_option("--queries", sim.queries, "Watchdog queries per functionality")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--epsilon-det", sim.epsilon_det, "Non-negligible DET floor")->capture_default_str();
    sim_cmd->add_option("--delta-adv", sim.delta_adv, "Negligible ADV ceiling")->capture_default_str();
    sim_cmd->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--step-cap", sim.step_cap, "Interaction step cap")->capture_default_str();
    sim_cmd->add_option("--format", sim.format, "human | machine")
        ->check(CLI::IsMember(formats))
        ->capture_default_str();

    CalibrateOptions cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "Search weights satisfying band constraints");
    cal_cmd->add_option("--constraints", cal.constraints, "Constraint file or builtin:<name>")->required();
    cal_cmd->add_option("--corpus", cal.corpus, "Corpus the constraints refer to")->capture_default_str();
    cal_cmd->add_option("--base-profile", cal.base_profile, "Fixed weights, alpha, beta, bands")
        ->capture_default_str();
    cal_cmd->add_option("--base-detector", cal.base_detector, "Detector whose f_scores are searched")
        ->capture_default_str();
    cal_cmd->add_option("--grid-step", cal.grid_step, "Grid resolution")->capture_default_str();
    cal_cmd->add_option("--out-profile", cal.out_profile, "Write the found profile here");
    cal_cmd->add_option("--out-detector", cal.out_detector, "Write the found detector here");

    ServeOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the local HTTP scoring service");
    serve_cmd->add_option("--host", serve.host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)")->capture_default_str();
    serve_cmd->add_option("--taxonomy", serve.taxonomy, "Taxonomy")->capture_default_str();
    serve_cmd->add_option("--profile", serve.profiles, "Weight profile (repeatable)")->capture_default_str();
    serve_cmd->add_option("--detector", serve.detectors, "Detector profile (repeatable)")->capture_default_str();

    const std::vector<std::string> kinds{"profile", "detector", "taxonomy", "corpus", "constraints", "scenario"};
    FileOptions validate;
    auto* validate_cmd = app.add_subcommand("validate", "Validate a configuration or data file");
    validate_cmd->add_option("kind", validate.kind, "File kind")->required()->check(CLI::IsMember(kinds));
    validate_cmd->add_option("input", validate.input, "File or builtin:<name>")->required();

    FileOptions canon;
    auto* canon_cmd = app.add_subcommand("canon", "Print a file in canonical form");
    canon_cmd->add_option("kind", canon.kind, "File kind")->required()->check(CLI::IsMember(kinds));
    canon_cmd->add_option("input", canon.input, "File or builtin:<name>")->required();
    canon_cmd->add_option("-o,--output", canon.output, "Write to this path instead of stdout");

    auto* list_cmd = app.add_subcommand("list", "List built-in data");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInputError;
    }

    try {
        if (score_cmd->parsed()) return cmd_score(score, out);
        if (sim_cmd->parsed()) return cmd_simulate(sim, out);
        if (cal_cmd->parsed()) return cmd_calibrate(cal, out);
        if (serve_cmd->parsed()) return cmd_serve(serve, out, err);
        if (validate_cmd->parsed()) return cmd_validate(validate, out);
        if (canon_cmd->parsed()) return cmd_canon(canon, out);
        if (list_cmd->parsed()) return cmd_list(out);
    } catch (const Error& e) {
        err << "error: " << error_token(e.code()) << ": " << e.what() << "\n";
        return is_input_error(e.code()) ? kInputError : kInternalError;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return kInternalError;
    }
    return kInternalError;
}

} // namespace dprisk::cli
