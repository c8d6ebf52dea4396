#include "dprisk/corpus.hpp"
#include "dprisk/service.hpp"

#include "test_support.hpp"

#include <httplib.h>

#include <thread>

using namespace dprisk;

namespace {

ScoringService make_service()
{
    ServiceConfig cfg;
    cfg.taxonomy = load_taxonomy("builtin:default");
    cfg.profiles = {load_profile("builtin:default")};
    cfg.detectors = {load_detector("builtin:default")};
    return ScoringService(std::move(cfg));
}

const char* kRoachMotel = R"({"case": {"category": "roach-motel",
    "ratings": {"uf": "high", "pk": "high", "se": "high"},
    "consequences": ["time_wasting", "financial_loss"]}})";

Json body_of(const HttpResponse& r)
{
    return json_io::parse(r.body);
}

} // namespace

TEST_CASE("read-only endpoints")
{
    const ScoringService s = make_service();
    CHECK(body_of(s.handle("GET", "/api/health", ""))["status"] == "ok");
    const Json tax = body_of(s.handle("GET", "/api/taxonomy", ""));
    CHECK(tax["categories"].size() >= 6);
    CHECK(body_of(s.handle("GET", "/api/profiles", ""))["profiles"][0]["name"] == "default");
    CHECK(body_of(s.handle("GET", "/api/detectors", ""))["detectors"][0]["fallback"] ==
          "lowest_across_categories");
    CHECK(s.handle("GET", "/api/nothing", "").status == 404);
    CHECK(s.handle("POST", "/api/health", "").status == 405);
    CHECK(s.handle("GET", "/api/score", "").status == 405);
}

TEST_CASE("score and compare")
{
    const ScoringService s = make_service();
    const HttpResponse r = s.handle("POST", "/api/score", kRoachMotel);
    REQUIRE(r.status == 200);
    const Json a = body_of(r);
    CHECK(a["score"] == 8.75);
    CHECK(a["band"] == "high");
    CHECK(a["det_source"] == "fallback");
    CHECK(a["breakdown"]["beta"] == 2.5);

    Json baseline = json_io::parse(kRoachMotel);
    baseline["mode"] = "baseline";
    const Json b = body_of(s.handle("POST", "/api/score", baseline.dump()));
    CHECK(b["band"] == "medium");
    CHECK(b["adv"] == 0.5);

    const Json cmp = body_of(s.handle("POST", "/api/compare", kRoachMotel));
    CHECK(cmp["with"]["band"] == "high");
    CHECK(cmp["baseline"]["band"] == "medium");
    CHECK(cmp["delta"] == 2.0);
}

TEST_CASE("score_exact rounds to the displayed score")
{
    const ScoringService s = make_service();
    Json req = json_io::parse(kRoachMotel);
    req["case"]["category"] = "pop-up-ads";
    req["case"]["ratings"] = {{"uf", "high"}, {"pk", "high"}, {"se", "low"}};
    req["case"]["consequences"] = {"time_wasting"};
    const Json a = body_of(s.handle("POST", "/api/score", req.dump()));
    CHECK(a["score"].get<double>() == round2(a["score_exact"].get<double>()));
    CHECK(a["score"] == 3.36);
}

TEST_CASE("inline profile and detector")
{
    const ScoringService s = make_service();
    Json req = json_io::parse(kRoachMotel);
    req["detector"] = {{"name", "strict"}, {"f_scores", {{"roach-motel", 0.9}}}};
    const Json a = body_of(s.handle("POST", "/api/score", req.dump()));
    CHECK(a["det"] == 0.9);
    CHECK(a["detector"] == "strict");

    Json bad = json_io::parse(kRoachMotel);
    Json profile = to_json(WeightProfile{});
    profile["level_values"]["low"] = 0.95;
    bad["profile"] = profile;
    const HttpResponse r = s.handle("POST", "/api/score", bad.dump());
    CHECK(r.status == 422);
    const Json err = body_of(r);
    CHECK(err["code"] == "invalid_profile");
    CHECK(err["violations"][0]["code"] == "level_values_not_increasing");

    Json unknown = json_io::parse(kRoachMotel);
    unknown["profile"] = "nonexistent";
    CHECK(s.handle("POST", "/api/score", unknown.dump()).status == 422);
}

TEST_CASE("input errors map to 400 and 422 with their codes")
{
    const ScoringService s = make_service();
    const HttpResponse malformed = s.handle("POST", "/api/score", "{not json");
    CHECK(malformed.status == 400);
    CHECK(body_of(malformed)["code"] == "parse_error");

    Json req = json_io::parse(kRoachMotel);
    req["case"]["ratings"]["uf"] = "extreme";
    HttpResponse r = s.handle("POST", "/api/score", req.dump());
    CHECK(r.status == 422);
    CHECK(body_of(r)["code"] == "invalid_rating_token");
    CHECK(body_of(r)["error"] == "invalid rating token");

    req = json_io::parse(kRoachMotel);
    req["case"]["category"] = "confirmshaming";
    CHECK(body_of(s.handle("POST", "/api/score", req.dump()))["code"] == "unknown_category");

    req = json_io::parse(kRoachMotel);
    req["case"]["consequences"] = {"embarrassment"};
    CHECK(body_of(s.handle("POST", "/api/score", req.dump()))["code"] == "unknown_consequence");

    req = json_io::parse(kRoachMotel);
    req["extra"] = true;
    CHECK(body_of(s.handle("POST", "/api/score", req.dump()))["code"] == "unknown_key");
}

TEST_CASE("service scores equal the library result for every case and mode")
{
    const ScoringService s = make_service();
    const Corpus corpus = load_corpus("builtin:paper-cases");
    const auto library = batch_score(corpus, load_profile("builtin:default"),
                                     load_detector("builtin:default"), kBothModes);
    for (const auto& expected : library) {
        Json req{{"case", to_json(*corpus.find(expected.case_id))},
                 {"mode", std::string(to_token(expected.mode))}};
        const HttpResponse r = s.handle("POST", "/api/score", req.dump());
        REQUIRE(r.status == 200);
        const Json a = body_of(r);
        CHECK(std::abs(a["score_exact"].get<double>() - expected.score) <= 1e-9);
        CHECK(a["band"] == std::string(to_token(expected.band)));
    }
    Json pz{{"case", to_json(*corpus.find("pz-01"))}, {"mode", "with"}};
    const Json a = body_of(s.handle("POST", "/api/score", pz.dump()));
    CHECK(a["score"] == 1.73);
    CHECK(a["band"] == "low");
}

TEST_CASE("served over loopback, and a taken port is refused")
{
    const ScoringService s = make_service();
    HttpServer server(s);
    REQUIRE(server.bind("127.0.0.1", 0));
    const int port = server.port();
    std::thread worker([&] { server.listen(); });

    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);
    auto health = client.Get("/api/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");

    auto scored = client.Post("/api/score", kRoachMotel, "application/json");
    REQUIRE(scored);
    CHECK(json_io::parse(scored->body)["band"] == "high");

    auto options = client.Options("/api/score");
    REQUIRE(options);
    CHECK(options->status == 204);

    HttpServer second(s);
    CHECK_FALSE(second.bind("127.0.0.1", port));

    server.stop();
    worker.join();
}
