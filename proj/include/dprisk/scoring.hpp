#pragma once

// Risk pipeline: sub-factor ratings -> ADV, consequences -> IMP,
// detector -> DET, then R = (ADV - DET + alpha) * (1 + IMP) * beta and a band.

#include "dprisk/model.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dprisk {

struct AdvTerm {
    SubFactor factor;
    RiskLevel level;
    double weight;
    double level_value;
    double contribution;
};

struct ImpTerm {
    Consequence consequence;
    double contribution;
};

struct ImpactBreakdown {
    std::vector<ImpTerm> terms;
    double unclamped_sum = 0.0;
    double value = 0.0;
    bool clamped = false;
};

struct ScoreBreakdown {
    std::vector<AdvTerm> adv_terms;
    std::vector<ImpTerm> imp_terms;
    bool imp_clamped = false;
    double offset_term = 0.0;       // adv - det + alpha
    double impact_multiplier = 1.0; // 1 + imp
    double raw_product = 0.0;       // offset_term * impact_multiplier
    double beta = 0.0;
    double final_score = 0.0;
    bool score_clamped = false;
};

struct Assessment {
    std::string case_id;
    AssessmentMode mode = AssessmentMode::WithChallenger;
    double adv = 0.0;
    double det = 0.0;
    DetectionSource det_source = DetectionSource::Table;
    double imp = 0.0;
    double score = 0.0;
    RiskBand band = RiskBand::Low;
    ScoreBreakdown breakdown;
};

struct ModeComparison {
    Assessment with_challenger;
    Assessment baseline;
    double delta = 0.0; // with - baseline
};

std::vector<AdvTerm> adv_terms(const FactorRatings& ratings, const WeightProfile& profile);
double compute_adv(const FactorRatings& ratings, const WeightProfile& profile);

ImpactBreakdown impact_breakdown(const std::set<Consequence>& consequences,
                                 const WeightProfile& profile);
double compute_imp(const std::set<Consequence>& consequences, const WeightProfile& profile);

/// Throws FactorOutOfRange when any factor is outside [0,1].
ScoreBreakdown compute_risk(double adv, double det, double imp, const WeightProfile& profile);

/// Low iff score <= band_low_max, High iff score > band_high_min.
/// Throws ScoreOutOfRange outside [0,10].
RiskBand classify_band(double score, const WeightProfile& profile);

/// `detection` replaces the detector lookup (e.g. a simulated estimate).
Assessment assess_case(const CaseRecord& record, const Taxonomy& taxonomy,
                       const WeightProfile& profile, const DetectorProfile& detector,
                       AssessmentMode mode,
                       const std::optional<DetectionFactor>& detection = std::nullopt);

ModeComparison compare_modes(const CaseRecord& record, const Taxonomy& taxonomy,
                             const WeightProfile& profile, const DetectorProfile& detector);

/// Display rounding; band classification always uses the unrounded score.
double round2(double value);

} // namespace dprisk
