#include "dprisk/scoring.hpp"

#include "dprisk/error.hpp"

#include <algorithm>
#include <cmath>

namespace dprisk {

namespace {

void require_unit(double value, const char* name)
{
    if (!(value >= 0.0 && value <= 1.0)) {
        throw Error(ErrorCode::FactorOutOfRange,
                    std::string(name) + " = " + std::to_string(value) + " is outside [0,1]");
    }
}

} // namespace

std::vector<AdvTerm> adv_terms(const FactorRatings& ratings, const WeightProfile& profile)
{
    std::vector<AdvTerm> terms;
    terms.reserve(kSubFactors.size());
    for (SubFactor factor : kSubFactors) {
        const RiskLevel level = ratings.at(factor);
        const double weight = profile.weight(factor);
        const double value = profile.level_value(level);
        terms.push_back({factor, level, weight, value, weight * value});
    }
    return terms;
}

double compute_adv(const FactorRatings& ratings, const WeightProfile& profile)
{
    double adv = 0.0;
    for (const auto& term : adv_terms(ratings, profile)) {
        adv += term.contribution;
    }
    return adv;
}

ImpactBreakdown impact_breakdown(const std::set<Consequence>& consequences,
                                 const WeightProfile& profile)
{
    ImpactBreakdown out;
    for (Consequence c : consequences) {
        const double v = profile.imp_value(c);
        out.terms.push_back({c, v});
        out.unclamped_sum += v;
    }
    out.clamped = out.unclamped_sum > kImpactMax;
    out.value = std::min(kImpactMax, out.unclamped_sum);
    return out;
}

double compute_imp(const std::set<Consequence>& consequences, const WeightProfile& profile)
{
    return impact_breakdown(consequences, profile).value;
}

ScoreBreakdown compute_risk(double adv, double det, double imp, const WeightProfile& profile)
{
    require_unit(adv, "adv");
    require_unit(det, "det");
    require_unit(imp, "imp");

    ScoreBreakdown out;
    out.offset_term = adv - det + profile.alpha;
    out.impact_multiplier = 1.0 + imp;
    out.raw_product = out.offset_term * out.impact_multiplier;
    out.beta = profile.beta;
    const double score = out.raw_product * profile.beta;
    out.final_score = std::clamp(score, 0.0, 10.0);
    out.score_clamped = out.final_score != score;
    return out;
}

RiskBand classify_band(double score, const WeightProfile& profile)
{
    if (!(score >= 0.0 && score <= 10.0)) {
        throw Error(ErrorCode::ScoreOutOfRange, std::to_string(score) + " is outside [0,10]");
    }
    if (score <= profile.band_low_max) {
        return RiskBand::Low;
    }
    if (score > profile.band_high_min) {
        return RiskBand::High;
    }
    return RiskBand::Medium;
}

Assessment assess_case(const CaseRecord& record, const Taxonomy& taxonomy,
                       const WeightProfile& profile, const DetectorProfile& detector,
                       AssessmentMode mode, const std::optional<DetectionFactor>& detection)
{
    validate_case(record, taxonomy);
    const DetectionFactor det =
        detection ? *detection
                  : resolve_detection(record.category, taxonomy, detector, record.detector_override);

    Assessment out;
    out.case_id = record.id;
    out.mode = mode;
    out.det = det.value;
    out.det_source = det.source;

    std::vector<AdvTerm> terms;
    if (mode == AssessmentMode::WithChallenger) {
        terms = adv_terms(record.ratings, profile);
        out.adv = compute_adv(record.ratings, profile);
    } else {
        out.adv = kBaselineAdvantage;
    }

    const ImpactBreakdown impact = impact_breakdown(record.consequences, profile);
    out.imp = impact.value;

    out.breakdown = compute_risk(out.adv, out.det, out.imp, profile);
    out.breakdown.adv_terms = std::move(terms);
    out.breakdown.imp_terms = impact.terms;
    out.breakdown.imp_clamped = impact.clamped;
    out.score = out.breakdown.final_score;
    out.band = classify_band(out.score, profile);
    return out;
}

ModeComparison compare_modes(const CaseRecord& record, const Taxonomy& taxonomy,
                             const WeightProfile& profile, const DetectorProfile& detector)
{
    ModeComparison out;
    out.with_challenger =
        assess_case(record, taxonomy, profile, detector, AssessmentMode::WithChallenger);
    out.baseline =
        assess_case(record, taxonomy, profile, detector, AssessmentMode::BaselineChallenger);
    out.delta = out.with_challenger.score - out.baseline.score;
    return out;
}

double round2(double value)
{
    return std::round(value * 100.0) / 100.0;
}

} // namespace dprisk
