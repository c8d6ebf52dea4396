#include "dprisk/builtin.hpp"

#include "dprisk/error.hpp"
#include "dprisk/json_io.hpp"

#include <algorithm>
#include <filesystem>
#include <utility>

namespace dprisk::builtin {

namespace detail {
extern const std::pair<std::string_view, std::string_view> kEntries[];
extern const std::size_t kEntryCount;
} // namespace detail

namespace {
constexpr std::string_view kPrefix = "builtin:";
}

std::optional<std::string_view> find(std::string_view key)
{
    for (std::size_t i = 0; i < detail::kEntryCount; ++i) {
        if (detail::kEntries[i].first == key) {
            return detail::kEntries[i].second;
        }
    }
    return std::nullopt;
}

std::vector<std::string> keys_with_prefix(std::string_view prefix)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < detail::kEntryCount; ++i) {
        const auto key = detail::kEntries[i].first;
        if (key.substr(0, prefix.size()) == prefix) {
            out.emplace_back(key.substr(prefix.size()));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string read_reference(std::string_view reference, std::string_view group)
{
    if (reference.substr(0, kPrefix.size()) == kPrefix) {
        const std::string key =
            std::string(group) + "/" + std::string(reference.substr(kPrefix.size()));
        if (auto text = find(key)) {
            return std::string(*text);
        }
        throw Error(ErrorCode::FileNotFound, "no built-in '" + std::string(reference) + "'");
    }
    std::filesystem::path path{std::string(reference)};
    std::error_code ec;
    if (!std::filesystem::exists(path, ec) && path.extension() != ".json") {
        std::filesystem::path with_suffix = path;
        with_suffix += ".json";
        if (std::filesystem::exists(with_suffix, ec)) {
            path = with_suffix;
        }
    }
    return json_io::read_text(path);
}

} // namespace dprisk::builtin
