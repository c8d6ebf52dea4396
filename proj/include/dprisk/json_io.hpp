#pragma once

// JSON encoding for configuration and case files. Decoders reject unknown
// keys; encoders emit canonical text (sorted keys, 2-space indent, numbers
// rounded to 6 fractional digits).

#include "dprisk/model.hpp"

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

namespace dprisk {

using Json = nlohmann::json;

namespace json_io {

/// Parses text; syntax errors become Error(ParseError) with line and column.
Json parse(std::string_view text, std::string_view source = "<input>");

/// Reads a whole file; throws Error(FileNotFound).
std::string read_text(const std::filesystem::path& path);

/// Writes text, replacing the file.
void write_text(const std::filesystem::path& path, std::string_view text);

/// Canonical serialization used by every file writer.
std::string dump(const Json& value);

/// Rounds to 6 fractional digits.
double round6(double value);

/// Key-checked view over a JSON object being decoded.
class ObjectReader {
public:
    ObjectReader(const Json& object, std::string context);

    /// Throws UnknownKey if the object holds a key outside `allowed`.
    void allow_only(std::initializer_list<std::string_view> allowed) const;

    bool has(std::string_view key) const;
    const Json& required(std::string_view key) const;

    std::string string(std::string_view key) const;
    std::optional<std::string> optional_string(std::string_view key) const;
    double number(std::string_view key) const;
    std::optional<double> optional_number(std::string_view key) const;
    bool boolean(std::string_view key, bool fallback) const;
    long long integer(std::string_view key) const;

    const std::string& context() const noexcept { return context_; }

private:
    const Json& object_;
    std::string context_;
};

} // namespace json_io

Json to_json(const Taxonomy& taxonomy);
Taxonomy taxonomy_from_json(const Json& value);

Json to_json(const WeightProfile& profile);
WeightProfile profile_from_json(const Json& value);

Json to_json(const DetectorProfile& detector);
DetectorProfile detector_from_json(const Json& value);

Json to_json(const FactorRatings& ratings);
FactorRatings ratings_from_json(const Json& value, std::string_view context);

struct CaseDecodeOptions {
    bool require_id = true;
    bool require_descriptive_fields = true; // title, platform
};

Json to_json(const CaseRecord& record);
CaseRecord case_from_json(const Json& value, const CaseDecodeOptions& options = {});

} // namespace dprisk
