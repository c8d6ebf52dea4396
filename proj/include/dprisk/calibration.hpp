#pragma once

// Grid search for weight / detector values under which a corpus reproduces
// required bands, score intervals and mode deltas.

#include "dprisk/corpus.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dprisk {

struct CalibrationConstraint {
    enum class Kind { Band, Interval, Delta };

    std::string case_id;
    AssessmentMode mode = AssessmentMode::WithChallenger;
    Kind kind = Kind::Band;
    RiskBand band = RiskBand::Low;
    std::optional<double> score_min;
    std::optional<double> score_max;
    bool min_exclusive = false;
    bool max_exclusive = false;
    double delta_max = 0.0; // bounds score(with) - score(baseline)

    std::string describe() const;
};

/// A constraint carries exactly one of: band, score interval, delta_max.
std::vector<CalibrationConstraint> constraints_from_json(const Json& value);
Json to_json(const std::vector<CalibrationConstraint>& constraints);
/// Accepts a path or "builtin:<fixture>"; throws InvalidConstraint.
std::vector<CalibrationConstraint> load_constraints(std::string_view reference);

struct ConstraintCheck {
    std::size_t index = 0;
    std::string description;
    bool satisfied = false;
    double observed = 0.0;
    double shortfall = 0.0; // distance to satisfaction, 0 when satisfied
};

/// Checks each constraint against a set of assessments covering its case/modes.
std::vector<ConstraintCheck> check_constraints(const std::vector<CalibrationConstraint>& constraints,
                                               std::span<const Assessment> assessments,
                                               const WeightProfile& profile);

/// One searched value. Names: "level.low|medium|high",
/// "imp.time_wasting|privacy_breach|financial_loss", "f_score.<category>".
struct SearchParameter {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    double step = 0.05;

    std::vector<double> grid() const;
};

struct SearchSpace {
    std::vector<SearchParameter> parameters;
};

/// Level values, impact values and every f_score stored in `detector`, each
/// over [0,1] at `step`. Alpha stays fixed and beta stays derived.
SearchSpace default_search_space(const DetectorProfile& detector, double step);

struct CalibrationResult {
    bool found = false;
    WeightProfile profile;
    DetectorProfile detector;
    std::vector<std::string> parameter_order;
    std::uint64_t nodes_examined = 0;
    /// For exhaustion: the nearest candidate and the constraints it misses.
    std::map<std::string, double> best_assignment;
    std::vector<ConstraintCheck> best_failures;
};

/// Depth-first walk of the grid in lexicographic order over
/// `parameter_order`; returns the first point that yields a valid profile and
/// satisfies every constraint. The returned profile is re-checked through
/// batch_score before it is handed back.
CalibrationResult calibrate(const Corpus& corpus, const std::vector<CalibrationConstraint>& constraints,
                            const SearchSpace& space, const WeightProfile& base_profile,
                            const DetectorProfile& base_detector);

Json to_json(const CalibrationResult& result);

} // namespace dprisk
