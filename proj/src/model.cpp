#include "dprisk/model.hpp"

#include "dprisk/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace dprisk {

std::string_view to_token(RiskLevel level)
{
    switch (level) {
    case RiskLevel::Low: return "low";
    case RiskLevel::Medium: return "medium";
    case RiskLevel::High: return "high";
    }
    return "low";
}

RiskLevel risk_level_from_token(std::string_view token)
{
    for (RiskLevel level : kRiskLevels) {
        if (to_token(level) == token) {
            return level;
        }
    }
    throw Error(ErrorCode::InvalidRatingToken, "'" + std::string(token) + "'");
}

std::string_view to_token(Consequence consequence)
{
    switch (consequence) {
    case Consequence::TimeWasting: return "time_wasting";
    case Consequence::PrivacyBreach: return "privacy_breach";
    case Consequence::FinancialLoss: return "financial_loss";
    }
    return "time_wasting";
}

Consequence consequence_from_token(std::string_view token)
{
    for (Consequence c : kConsequences) {
        if (to_token(c) == token) {
            return c;
        }
    }
    throw Error(ErrorCode::UnknownConsequence, "'" + std::string(token) + "'");
}

std::string_view to_token(SubFactor factor)
{
    switch (factor) {
    case SubFactor::UserInterface: return "uf";
    case SubFactor::PriorKnowledge: return "pk";
    case SubFactor::Sequence: return "se";
    }
    return "uf";
}

RiskLevel FactorRatings::at(SubFactor factor) const
{
    switch (factor) {
    case SubFactor::UserInterface: return uf;
    case SubFactor::PriorKnowledge: return pk;
    case SubFactor::Sequence: return se;
    }
    return uf;
}

Taxonomy::Taxonomy(std::vector<Category> categories) : categories_(std::move(categories))
{
    std::unordered_map<std::string, const Category*> by_id;
    for (const auto& category : categories_) {
        if (category.id.empty()) {
            throw Error(ErrorCode::InvalidValue, "category id must be nonempty");
        }
        if (!by_id.emplace(category.id, &category).second) {
            throw Error(ErrorCode::DuplicateCategoryId, "'" + category.id + "'");
        }
    }
    for (const auto& category : categories_) {
        if (category.parent && !by_id.contains(*category.parent)) {
            throw Error(ErrorCode::UnknownCategory,
                        "parent '" + *category.parent + "' of '" + category.id + "'");
        }
    }
    // A parent chain longer than the category count must revisit a node.
    for (const auto& category : categories_) {
        const Category* cursor = &category;
        std::size_t hops = 0;
        while (cursor->parent) {
            cursor = by_id.at(*cursor->parent);
            if (++hops > categories_.size()) {
                throw Error(ErrorCode::TaxonomyCycle, "through '" + category.id + "'");
            }
        }
    }
}

bool Taxonomy::contains(std::string_view id) const
{
    return std::any_of(categories_.begin(), categories_.end(),
                       [&](const Category& c) { return c.id == id; });
}

const Category& Taxonomy::at(std::string_view id) const
{
    auto it = std::find_if(categories_.begin(), categories_.end(),
                           [&](const Category& c) { return c.id == id; });
    if (it == categories_.end()) {
        throw Error(ErrorCode::UnknownCategory, "'" + std::string(id) + "'");
    }
    return *it;
}

std::vector<std::string> Taxonomy::lineage(std::string_view id) const
{
    std::vector<std::string> out;
    const Category* cursor = &at(id);
    while (cursor->parent) {
        out.push_back(*cursor->parent);
        cursor = &at(*cursor->parent);
    }
    return out;
}

double normalizing_beta(double alpha)
{
    return 10.0 / ((1.0 + alpha) * (1.0 + kImpactMax));
}

bool ProfileValidation::has(std::string_view code) const
{
    return std::any_of(violations.begin(), violations.end(),
                       [&](const ProfileViolation& v) { return v.code == code; });
}

ProfileValidation validate_profile(const WeightProfile& profile)
{
    constexpr double kTolerance = 1e-9;
    ProfileValidation result;
    auto add = [&](std::string code, std::string message) {
        result.violations.push_back({std::move(code), std::move(message)});
    };
    auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };

    if (!std::all_of(profile.level_values.begin(), profile.level_values.end(), in_unit)) {
        add("level_value_out_of_range", "level_values must lie in [0,1]");
    }
    if (!(profile.level_values[0] < profile.level_values[1] &&
          profile.level_values[1] < profile.level_values[2])) {
        add("level_values_not_increasing", "level_values not strictly increasing");
    }

    const auto& w = profile.adv_weights;
    if (!std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v) && v >= 0.0; })) {
        add("adv_weight_negative", "adv weights must be nonnegative");
    }
    if (std::abs(w[0] + w[1] + w[2] - 1.0) > kTolerance) {
        add("adv_weights_sum", "adv weights do not sum to 1");
    }

    if (!std::all_of(profile.imp_values.begin(), profile.imp_values.end(), in_unit)) {
        add("imp_value_out_of_range", "imp_values must lie in [0,1]");
    }

    if (!std::isfinite(profile.alpha) || profile.alpha < 1.0) {
        add("alpha_below_one", "alpha must be at least 1");
    }
    if (!std::isfinite(profile.beta) || profile.beta <= 0.0) {
        add("beta_nonpositive", "beta must be positive");
    } else if (std::isfinite(profile.alpha) &&
               std::abs(profile.beta - normalizing_beta(profile.alpha)) > kTolerance) {
        add("beta_not_normalizing", "beta must equal 10 / ((1 + alpha) * (1 + IMP_max))");
    }

    if (!(profile.band_low_max > 0.0 && profile.band_low_max < profile.band_high_min &&
          profile.band_high_min <= 10.0)) {
        add("band_thresholds_invalid", "band thresholds must satisfy 0 < low_max < high_min <= 10");
    }
    return result;
}

std::string_view to_token(DetectionSource source)
{
    switch (source) {
    case DetectionSource::Override: return "override";
    case DetectionSource::Table: return "table";
    case DetectionSource::Fallback: return "fallback";
    case DetectionSource::Simulated: return "simulated";
    }
    return "table";
}

DetectionFactor resolve_detection(std::string_view category, const Taxonomy& taxonomy,
                                  const DetectorProfile& detector,
                                  std::optional<double> override_value)
{
    if (!taxonomy.contains(category)) {
        throw Error(ErrorCode::UnknownCategory, "'" + std::string(category) + "'");
    }
    if (override_value) {
        return {*override_value, DetectionSource::Override};
    }
    if (auto it = detector.f_scores.find(std::string(category)); it != detector.f_scores.end()) {
        return {it->second, DetectionSource::Table};
    }
    if (detector.f_scores.empty()) {
        throw Error(ErrorCode::EmptyDetectorProfile, "'" + detector.name + "'");
    }
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& [id, score] : detector.f_scores) {
        lowest = std::min(lowest, score);
    }
    return {lowest, DetectionSource::Fallback};
}

void validate_case(const CaseRecord& record, const Taxonomy& taxonomy)
{
    if (record.id.empty()) {
        throw Error(ErrorCode::InvalidValue, "case id must be nonempty");
    }
    if (!taxonomy.contains(record.category)) {
        throw Error(ErrorCode::UnknownCategory,
                    "'" + record.category + "' in case '" + record.id + "'");
    }
    if (record.detector_override &&
        !(*record.detector_override >= 0.0 && *record.detector_override <= 1.0)) {
        throw Error(ErrorCode::FactorOutOfRange,
                    "detector_override of case '" + record.id + "' must lie in [0,1]");
    }
}

std::string_view to_token(AssessmentMode mode)
{
    return mode == AssessmentMode::WithChallenger ? "with" : "baseline";
}

AssessmentMode mode_from_token(std::string_view token)
{
    if (token == "with") {
        return AssessmentMode::WithChallenger;
    }
    if (token == "baseline") {
        return AssessmentMode::BaselineChallenger;
    }
    throw Error(ErrorCode::InvalidValue, "mode must be \"with\" or \"baseline\", got '" +
                                             std::string(token) + "'");
}

std::string_view to_token(RiskBand band)
{
    switch (band) {
    case RiskBand::Low: return "low";
    case RiskBand::Medium: return "medium";
    case RiskBand::High: return "high";
    }
    return "low";
}

RiskBand band_from_token(std::string_view token)
{
    if (token == "low") return RiskBand::Low;
    if (token == "medium") return RiskBand::Medium;
    if (token == "high") return RiskBand::High;
    throw Error(ErrorCode::InvalidValue, "band must be low, medium or high, got '" +
                                             std::string(token) + "'");
}

} // namespace dprisk
