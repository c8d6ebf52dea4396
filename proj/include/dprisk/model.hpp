#pragma once

// Domain types shared by every other module: ratings, taxonomy, weight and
// detector profiles, case records and assessments.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dprisk {

enum class RiskLevel { Low = 0, Medium = 1, High = 2 };

inline constexpr std::array<RiskLevel, 3> kRiskLevels{RiskLevel::Low, RiskLevel::Medium,
                                                      RiskLevel::High};

std::string_view to_token(RiskLevel level);
/// Throws Error(InvalidRatingToken) for anything but "low", "medium", "high".
RiskLevel risk_level_from_token(std::string_view token);

enum class Consequence { TimeWasting = 0, PrivacyBreach = 1, FinancialLoss = 2 };

inline constexpr std::array<Consequence, 3> kConsequences{
    Consequence::TimeWasting, Consequence::PrivacyBreach, Consequence::FinancialLoss};

std::string_view to_token(Consequence consequence);
/// Throws Error(UnknownConsequence).
Consequence consequence_from_token(std::string_view token);

/// The three sub-factors of the adversary's advantage.
enum class SubFactor { UserInterface = 0, PriorKnowledge = 1, Sequence = 2 };

inline constexpr std::array<SubFactor, 3> kSubFactors{
    SubFactor::UserInterface, SubFactor::PriorKnowledge, SubFactor::Sequence};

std::string_view to_token(SubFactor factor); // "uf", "pk", "se"

struct FactorRatings {
    RiskLevel uf = RiskLevel::Low;
    RiskLevel pk = RiskLevel::Low;
    RiskLevel se = RiskLevel::Low;

    RiskLevel at(SubFactor factor) const;

    friend bool operator==(const FactorRatings&, const FactorRatings&) = default;
};

struct Category {
    std::string id;
    std::string display_name;
    std::optional<std::string> parent;

    friend bool operator==(const Category&, const Category&) = default;
};

/// Validated category set. Construction checks id uniqueness, parent
/// resolution and acyclicity.
class Taxonomy {
public:
    Taxonomy() = default;
    explicit Taxonomy(std::vector<Category> categories);

    const std::vector<Category>& categories() const noexcept { return categories_; }
    bool contains(std::string_view id) const;
    const Category& at(std::string_view id) const; // throws UnknownCategory

    /// Ancestors from the direct parent to the root.
    std::vector<std::string> lineage(std::string_view id) const;

    friend bool operator==(const Taxonomy&, const Taxonomy&) = default;

private:
    std::vector<Category> categories_;
};

struct WeightProfile {
    std::string name = "default";
    std::array<double, 3> level_values{0.1, 0.5, 0.9}; // indexed by RiskLevel
    std::array<double, 3> adv_weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}; // uf, pk, se
    std::array<double, 3> imp_values{0.3, 0.6, 0.7}; // indexed by Consequence
    double alpha = 1.0;
    double beta = 2.5;
    double band_low_max = 3.0;
    double band_high_min = 7.0;

    double level_value(RiskLevel level) const { return level_values[static_cast<int>(level)]; }
    double weight(SubFactor factor) const { return adv_weights[static_cast<int>(factor)]; }
    double imp_value(Consequence c) const { return imp_values[static_cast<int>(c)]; }

    friend bool operator==(const WeightProfile&, const WeightProfile&) = default;
};

/// Upper bound of the aggregated impact under the clamped-sum rule.
inline constexpr double kImpactMax = 1.0;

/// The beta that maps the largest reachable product onto 10.
double normalizing_beta(double alpha);

struct ProfileViolation {
    std::string code;
    std::string message;
};

struct ProfileValidation {
    std::vector<ProfileViolation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(std::string_view code) const;
};

ProfileValidation validate_profile(const WeightProfile& profile);

enum class DetectionSource { Override, Table, Fallback, Simulated };

std::string_view to_token(DetectionSource source);

struct DetectionFactor {
    double value = 0.0;
    DetectionSource source = DetectionSource::Table;
};

struct DetectorProfile {
    std::string name = "default";
    std::map<std::string, double> f_scores;

    friend bool operator==(const DetectorProfile&, const DetectorProfile&) = default;
};

inline constexpr std::string_view kFallbackLowest = "lowest_across_categories";

/// Override, else table entry, else the lowest table entry.
/// Throws UnknownCategory or EmptyDetectorProfile.
DetectionFactor resolve_detection(std::string_view category, const Taxonomy& taxonomy,
                                  const DetectorProfile& detector,
                                  std::optional<double> override_value = std::nullopt);

struct CaseRecord {
    std::string id;
    std::string title;
    std::string category;
    std::string platform;
    FactorRatings ratings;
    std::set<Consequence> consequences;
    std::optional<double> detector_override;
    std::optional<std::string> notes;
    std::optional<std::string> evidence_uri;

    friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

/// Checks id, category and override range; throws on the first problem.
void validate_case(const CaseRecord& record, const Taxonomy& taxonomy);

enum class AssessmentMode { WithChallenger, BaselineChallenger };

inline constexpr std::array<AssessmentMode, 2> kBothModes{AssessmentMode::WithChallenger,
                                                          AssessmentMode::BaselineChallenger};

std::string_view to_token(AssessmentMode mode); // "with", "baseline"
AssessmentMode mode_from_token(std::string_view token);

enum class RiskBand { Low, Medium, High };

std::string_view to_token(RiskBand band);
RiskBand band_from_token(std::string_view token);

/// Random guessing on a binary decision.
inline constexpr double kBaselineAdvantage = 0.5;

} // namespace dprisk
