#pragma once

// Data files compiled into the library (profiles, detectors, taxonomy,
// fixtures, scenarios). Keys are paths relative to the data root without the
// ".json" suffix, e.g. "scenarios/binary-choice".

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dprisk::builtin {

std::optional<std::string_view> find(std::string_view key);
std::vector<std::string> keys_with_prefix(std::string_view prefix);

/// Resolves "builtin:<name>" within `group` (e.g. "profiles"), or reads a
/// file path. A path lacking the ".json" suffix falls back to path + ".json".
std::string read_reference(std::string_view reference, std::string_view group);

} // namespace dprisk::builtin
