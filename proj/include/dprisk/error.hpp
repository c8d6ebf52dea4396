#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dprisk {

enum class ErrorCode {
    FileNotFound,
    ParseError,
    UnknownKey,
    MissingField,
    InvalidValue,
    InvalidRatingToken,
    UnknownConsequence,
    UnknownCategory,
    DuplicateCaseId,
    DuplicateCategoryId,
    TaxonomyCycle,
    EmptyDetectorProfile,
    InvalidProfile,
    FactorOutOfRange,
    ScoreOutOfRange,
    InvalidScenario,
    InteractionDidNotTerminate,
    InsufficientTrials,
    InvalidConstraint,
    Internal,
};

/// Machine-readable token, e.g. "duplicate_case_id".
std::string_view error_token(ErrorCode code);

/// Human phrase, e.g. "duplicate case id".
std::string_view error_phrase(ErrorCode code);

/// All failures raised by the library carry a stable code alongside the text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

/// True for codes caused by bad input (exit status 2 at the CLI).
bool is_input_error(ErrorCode code);

} // namespace dprisk
