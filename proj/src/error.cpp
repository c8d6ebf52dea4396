#include "dprisk/error.hpp"

namespace dprisk {

namespace {

struct CodeNames {
    std::string_view token;
    std::string_view phrase;
};

CodeNames names(ErrorCode code)
{
    switch (code) {
    case ErrorCode::FileNotFound: return {"file_not_found", "file not found"};
    case ErrorCode::ParseError: return {"parse_error", "parse error"};
    case ErrorCode::UnknownKey: return {"unknown_key", "unknown key"};
    case ErrorCode::MissingField: return {"missing_field", "missing field"};
    case ErrorCode::InvalidValue: return {"invalid_value", "invalid value"};
    case ErrorCode::InvalidRatingToken: return {"invalid_rating_token", "invalid rating token"};
    case ErrorCode::UnknownConsequence: return {"unknown_consequence", "unknown consequence"};
    case ErrorCode::UnknownCategory: return {"unknown_category", "unknown category"};
    case ErrorCode::DuplicateCaseId: return {"duplicate_case_id", "duplicate case id"};
    case ErrorCode::DuplicateCategoryId: return {"duplicate_category_id", "duplicate category id"};
    case ErrorCode::TaxonomyCycle: return {"taxonomy_cycle", "taxonomy cycle"};
    case ErrorCode::EmptyDetectorProfile: return {"empty_detector_profile", "empty detector profile"};
    case ErrorCode::InvalidProfile: return {"invalid_profile", "invalid profile"};
    case ErrorCode::FactorOutOfRange: return {"factor_out_of_range", "factor out of range"};
    case ErrorCode::ScoreOutOfRange: return {"score_out_of_range", "score out of range"};
    case ErrorCode::InvalidScenario: return {"invalid_scenario", "invalid scenario"};
    case ErrorCode::InteractionDidNotTerminate:
        return {"interaction_did_not_terminate", "interaction did not terminate"};
    case ErrorCode::InsufficientTrials:
        return {"insufficient_trials", "insufficient trials for thresholds"};
    case ErrorCode::InvalidConstraint: return {"invalid_constraint", "invalid constraint"};
    case ErrorCode::Internal: return {"internal", "internal error"};
    }
    return {"internal", "internal error"};
}

std::string compose(ErrorCode code, const std::string& detail)
{
    std::string text{names(code).phrase};
    if (!detail.empty()) {
        text += ": ";
        text += detail;
    }
    return text;
}

} // namespace

std::string_view error_token(ErrorCode code) { return names(code).token; }

std::string_view error_phrase(ErrorCode code) { return names(code).phrase; }

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(detail)
{
}

bool is_input_error(ErrorCode code)
{
    return code != ErrorCode::Internal;
}

} // namespace dprisk
