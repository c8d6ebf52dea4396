#pragma once

#include "dprisk/json_io.hpp"
#include "dprisk/model.hpp"
#include "dprisk/scoring.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dprisk {

struct Provenance {
    std::string source;
    std::string date;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Corpus {
    Provenance provenance;
    Taxonomy taxonomy;
    std::vector<CaseRecord> cases;

    const CaseRecord* find(std::string_view id) const;

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Decodes and validates: unique ids, categories resolve, tokens known.
Corpus corpus_from_json(const Json& value);
Json to_json(const Corpus& corpus);

Corpus parse_corpus(std::string_view text, std::string_view source = "<corpus>");
/// Accepts a path or "builtin:<fixture>".
Corpus load_corpus(std::string_view reference);
/// Canonical text; save_corpus(load_corpus(x)) is byte-stable.
std::string encode_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// One assessment per (case, mode), in case order then mode order.
/// Errors are re-thrown with the case id prepended.
std::vector<Assessment> batch_score(const Corpus& corpus, const WeightProfile& profile,
                                    const DetectorProfile& detector,
                                    std::span<const AssessmentMode> modes);

enum class ReportFormat { Machine, Human };

std::string emit_report(std::span<const Assessment> assessments, ReportFormat format);

Json to_json(const Assessment& assessment);
Json to_json(const ScoreBreakdown& breakdown);
/// Reads the machine report back into assessments (breakdowns excluded).
std::vector<Assessment> parse_machine_report(std::string_view text);

WeightProfile load_profile(std::string_view reference);
DetectorProfile load_detector(std::string_view reference);
Taxonomy load_taxonomy(std::string_view reference);

} // namespace dprisk
