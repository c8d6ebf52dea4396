#include "dprisk/corpus.hpp"
#include "dprisk/error.hpp"

#include <array>
#include <cstdio>
#include <map>
#include <sstream>

namespace dprisk {

namespace {

std::string fixed(double value, int digits)
{
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
    return buffer;
}

std::string signed_fixed(double value, int digits)
{
    return (value >= 0.0 ? "+" : "") + fixed(value, digits);
}

struct ModePair {
    const Assessment* with = nullptr;
    const Assessment* baseline = nullptr;
};

/// Pairs of with/baseline assessments per case, in first-seen case order.
std::vector<std::pair<std::string, ModePair>> mode_pairs(std::span<const Assessment> assessments)
{
    std::vector<std::pair<std::string, ModePair>> out;
    for (const auto& a : assessments) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const auto& entry) { return entry.first == a.case_id; });
        if (it == out.end()) {
            out.emplace_back(a.case_id, ModePair{});
            it = std::prev(out.end());
        }
        (a.mode == AssessmentMode::WithChallenger ? it->second.with : it->second.baseline) = &a;
    }
    std::erase_if(out, [](const auto& entry) {
        return entry.second.with == nullptr || entry.second.baseline == nullptr;
    });
    return out;
}

std::array<std::size_t, 3> band_counts(std::span<const Assessment> assessments)
{
    std::array<std::size_t, 3> counts{};
    for (const auto& a : assessments) {
        ++counts[static_cast<int>(a.band)];
    }
    return counts;
}

std::string machine_report(std::span<const Assessment> assessments)
{
    Json list = Json::array();
    for (const auto& a : assessments) {
        Json item = to_json(a);
        item["breakdown"] = to_json(a.breakdown);
        list.push_back(std::move(item));
    }
    const auto counts = band_counts(assessments);
    Json deltas = Json::array();
    for (const auto& [id, pair] : mode_pairs(assessments)) {
        const double delta = pair.with->score - pair.baseline->score;
        deltas.push_back({{"case_id", id}, {"delta", round2(delta)}, {"delta_exact", delta}});
    }
    Json doc{{"assessments", std::move(list)},
             {"band_counts", {{"low", counts[0]}, {"medium", counts[1]}, {"high", counts[2]}}},
             {"mode_deltas", std::move(deltas)}};
    return json_io::dump(doc);
}

std::string human_report(std::span<const Assessment> assessments)
{
    std::ostringstream out;
    out << "# Deceptive pattern risk report\n\n";
    out << "| Case | Mode | ADV | DET | IMP | R | Band |\n";
    out << "|---|---|---|---|---|---|---|\n";
    for (const auto& a : assessments) {
        out << "| " << a.case_id << " | " << to_token(a.mode) << " | " << fixed(a.adv, 3) << " | "
            << fixed(a.det, 3) << " | " << fixed(a.imp, 3) << " | " << fixed(a.score, 2) << " | "
            << to_token(a.band) << " |\n";
    }

    const auto counts = band_counts(assessments);
    out << "\nBand counts: low " << counts[0] << ", medium " << counts[1] << ", high " << counts[2]
        << "\n";

    const auto pairs = mode_pairs(assessments);
    if (!pairs.empty()) {
        out << "\n## Mode deltas\n\n";
        out << "| Case | With | Baseline | Delta |\n";
        out << "|---|---|---|---|\n";
        for (const auto& [id, pair] : pairs) {
            out << "| " << id << " | " << fixed(pair.with->score, 2) << " ("
                << to_token(pair.with->band) << ") | " << fixed(pair.baseline->score, 2) << " ("
                << to_token(pair.baseline->band) << ") | "
                << signed_fixed(pair.with->score - pair.baseline->score, 2) << " |\n";
        }
    }

    for (const auto& a : assessments) {
        const auto& b = a.breakdown;
        out << "\n## " << a.case_id << " (" << to_token(a.mode) << ")\n\n";
        if (b.adv_terms.empty()) {
            out << "- ADV = " << fixed(a.adv, 4) << " (challenger guesses at random)\n";
        } else {
            out << "- ADV = " << fixed(a.adv, 4) << ":";
            for (const auto& t : b.adv_terms) {
                out << " " << to_token(t.factor) << "=" << to_token(t.level) << " ("
                    << fixed(t.weight, 4) << " x " << fixed(t.level_value, 4) << ")";
            }
            out << "\n";
        }
        out << "- DET = " << fixed(a.det, 4) << " (" << to_token(a.det_source) << ")\n";
        out << "- IMP = " << fixed(a.imp, 4);
        if (b.imp_terms.empty()) {
            out << " (no consequences)";
        } else {
            out << ":";
            for (const auto& t : b.imp_terms) {
                out << " " << to_token(t.consequence) << "=" << fixed(t.contribution, 4);
            }
            if (b.imp_clamped) {
                out << " (clamped to 1)";
            }
        }
        out << "\n";
        out << "- R = " << fixed(b.offset_term, 4) << " x " << fixed(b.impact_multiplier, 4) << " x "
            << fixed(b.beta, 4) << " = " << fixed(b.final_score, 4) << " -> " << to_token(a.band)
            << "\n";
    }
    return out.str();
}

} // namespace

Json to_json(const Assessment& a)
{
    return Json{{"case_id", a.case_id},
                {"mode", std::string(to_token(a.mode))},
                {"adv", a.adv},
                {"det", a.det},
                {"det_source", std::string(to_token(a.det_source))},
                {"imp", a.imp},
                {"score", round2(a.score)},
                {"score_exact", a.score},
                {"band", std::string(to_token(a.band))}};
}

Json to_json(const ScoreBreakdown& b)
{
    Json adv = Json::array();
    for (const auto& t : b.adv_terms) {
        adv.push_back({{"factor", std::string(to_token(t.factor))},
                       {"level", std::string(to_token(t.level))},
                       {"weight", t.weight},
                       {"level_value", t.level_value},
                       {"contribution", t.contribution}});
    }
    Json imp = Json::array();
    for (const auto& t : b.imp_terms) {
        imp.push_back({{"consequence", std::string(to_token(t.consequence))},
                       {"contribution", t.contribution}});
    }
    return Json{{"adv_terms", std::move(adv)},
                {"imp_terms", std::move(imp)},
                {"imp_clamped", b.imp_clamped},
                {"offset_term", b.offset_term},
                {"impact_multiplier", b.impact_multiplier},
                {"raw_product", b.raw_product},
                {"beta", b.beta},
                {"final_score", b.final_score},
                {"score_clamped", b.score_clamped}};
}

std::vector<Assessment> parse_machine_report(std::string_view text)
{
    const Json doc = json_io::parse(text, "<report>");
    json_io::ObjectReader root(doc, "report");
    const Json& list = root.required("assessments");
    if (!list.is_array()) {
        throw Error(ErrorCode::InvalidValue, "report.assessments must be an array");
    }
    std::vector<Assessment> out;
    for (const auto& item : list) {
        json_io::ObjectReader r(item, "report assessment");
        Assessment a;
        a.case_id = r.string("case_id");
        a.mode = mode_from_token(r.string("mode"));
        a.adv = r.number("adv");
        a.det = r.number("det");
        const std::string source = r.string("det_source");
        for (auto s : {DetectionSource::Override, DetectionSource::Table, DetectionSource::Fallback,
                       DetectionSource::Simulated}) {
            if (to_token(s) == source) {
                a.det_source = s;
            }
        }
        a.imp = r.number("imp");
        a.score = r.number("score_exact");
        a.band = band_from_token(r.string("band"));
        out.push_back(std::move(a));
    }
    return out;
}

std::string emit_report(std::span<const Assessment> assessments, ReportFormat format)
{
    return format == ReportFormat::Machine ? machine_report(assessments)
                                           : human_report(assessments);
}

} // namespace dprisk
