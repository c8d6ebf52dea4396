#include "dprisk/corpus.hpp"

#include "test_support.hpp"

#include <filesystem>

using namespace dprisk;

namespace {

Json reference_corpus_json()
{
    return json_io::parse(json_io::read_text(source_path("fixtures/paper-cases.json")));
}

} // namespace

TEST_CASE("fixture corpus is canonical and round-trips exactly")
{
    const std::string text = json_io::read_text(source_path("fixtures/paper-cases.json"));
    const Corpus c = parse_corpus(text);
    CHECK(c.cases.size() == 4);
    CHECK(encode_corpus(c) == text);
    CHECK(parse_corpus(encode_corpus(c)) == c);
    CHECK(load_corpus("builtin:paper-cases") == c);
}

TEST_CASE("save then load is the identity")
{
    const Corpus c = load_corpus("builtin:paper-cases");
    const auto path = std::filesystem::temp_directory_path() / "dprisk-corpus-roundtrip.json";
    save_corpus(c, path);
    CHECK(load_corpus(path.string()) == c);
    std::filesystem::remove(path);
}

TEST_CASE("invalid corpora are rejected with distinct codes")
{
    Json dup = reference_corpus_json();
    dup["cases"][1]["id"] = dup["cases"][0]["id"];
    CHECK_ERROR_CODE(corpus_from_json(dup), ErrorCode::DuplicateCaseId);

    Json unknown_cat = reference_corpus_json();
    unknown_cat["cases"][0]["category"] = "confirmshaming";
    CHECK_ERROR_CODE(corpus_from_json(unknown_cat), ErrorCode::UnknownCategory);

    Json unknown_cons = reference_corpus_json();
    unknown_cons["cases"][0]["consequences"] = {"reputation_damage"};
    CHECK_ERROR_CODE(corpus_from_json(unknown_cons), ErrorCode::UnknownConsequence);

    Json bad_rating = reference_corpus_json();
    bad_rating["cases"][0]["ratings"]["se"] = "LOW";
    CHECK_ERROR_CODE(corpus_from_json(bad_rating), ErrorCode::InvalidRatingToken);

    CHECK_ERROR_CODE(parse_corpus("{\"cases\": ["), ErrorCode::ParseError);
    CHECK_ERROR_CODE(load_corpus("/nonexistent/corpus.json"), ErrorCode::FileNotFound);
}

TEST_CASE("batch scoring with the shipped defaults reproduces the reference bands")
{
    const Corpus c = load_corpus("builtin:paper-cases");
    const auto a = batch_score(c, load_profile("builtin:default"), load_detector("builtin:default"),
                               kBothModes);
    REQUIRE(a.size() == 8);
    auto find = [&](const std::string& id, AssessmentMode m) {
        for (const auto& x : a)
            if (x.case_id == id && x.mode == m) return x;
        FAIL("missing assessment");
        return a.front();
    };
    using enum AssessmentMode;
    CHECK(find("pz-01", WithChallenger).band == RiskBand::Low);
    CHECK(find("pz-01", BaselineChallenger).score == doctest::Approx(2.8));
    CHECK(find("pr-01", WithChallenger).band == RiskBand::Medium);
    CHECK(find("pa-01", BaselineChallenger).band == RiskBand::Low);
    CHECK(find("rm-01", WithChallenger).band == RiskBand::High);
    CHECK(find("rm-01", WithChallenger).det_source == DetectionSource::Fallback);
    CHECK(find("rm-01", BaselineChallenger).band == RiskBand::Medium);
}

TEST_CASE("machine report round-trips and human report is a table")
{
    const Corpus c = load_corpus("builtin:paper-cases");
    const auto a = batch_score(c, load_profile("builtin:default"), load_detector("builtin:default"),
                               kBothModes);
    const std::string machine = emit_report(a, ReportFormat::Machine);
    const auto back = parse_machine_report(machine);
    REQUIRE(back.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(back[i].case_id == a[i].case_id);
        CHECK(back[i].band == a[i].band);
        CHECK(back[i].score == doctest::Approx(a[i].score).epsilon(1e-6));
    }
    const Json doc = json_io::parse(machine);
    CHECK(doc["band_counts"]["low"] == 3);
    CHECK(doc["mode_deltas"].size() == 4);

    const std::string human = emit_report(a, ReportFormat::Human);
    CHECK(human.find("| rm-01 | with |") != std::string::npos);
    CHECK(human.find("8.75") != std::string::npos);
    CHECK(emit_report(a, ReportFormat::Human) == human);
}

TEST_CASE("batch errors name the offending case")
{
    Corpus c = load_corpus("builtin:paper-cases");
    try {
        batch_score(c, load_profile("builtin:default"), DetectorProfile{"empty", {}}, kBothModes);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyDetectorProfile);
        CHECK(std::string(e.what()).find("pz-01") != std::string::npos);
    }
}
