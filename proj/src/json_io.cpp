#include "dprisk/json_io.hpp"

#include "dprisk/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dprisk {

namespace json_io {

namespace {

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

} // namespace

Json parse(std::string_view text, std::string_view source)
{
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        // byte is one past the offending character
        const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        const auto [line, column] = line_and_column(text, offset);
        throw Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(line) +
                                               ":" + std::to_string(column) + ": " + e.what());
    }
}

std::string read_text(const std::filesystem::path& path)
{
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::FileNotFound, "cannot open " + path.string() + " for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string dump(const Json& value)
{
    return value.dump(2) + "\n";
}

double round6(double value)
{
    const double r = std::round(value * 1e6) / 1e6;
    return r == 0.0 ? 0.0 : r; // no "-0.0"
}

ObjectReader::ObjectReader(const Json& object, std::string context)
    : object_(object), context_(std::move(context))
{
    if (!object_.is_object()) {
        throw Error(ErrorCode::InvalidValue, context_ + " must be an object");
    }
}

void ObjectReader::allow_only(std::initializer_list<std::string_view> allowed) const
{
    for (const auto& item : object_.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw Error(ErrorCode::UnknownKey, "'" + item.key() + "' in " + context_);
        }
    }
}

bool ObjectReader::has(std::string_view key) const
{
    auto it = object_.find(std::string(key));
    return it != object_.end() && !it->is_null();
}

const Json& ObjectReader::required(std::string_view key) const
{
    auto it = object_.find(std::string(key));
    if (it == object_.end() || it->is_null()) {
        throw Error(ErrorCode::MissingField, "'" + std::string(key) + "' in " + context_);
    }
    return *it;
}

std::string ObjectReader::string(std::string_view key) const
{
    const Json& v = required(key);
    if (!v.is_string()) {
        throw Error(ErrorCode::InvalidValue,
                    "'" + std::string(key) + "' in " + context_ + " must be a string");
    }
    return v.get<std::string>();
}

std::optional<std::string> ObjectReader::optional_string(std::string_view key) const
{
    if (!has(key)) {
        return std::nullopt;
    }
    return string(key);
}

double ObjectReader::number(std::string_view key) const
{
    const Json& v = required(key);
    if (!v.is_number()) {
        throw Error(ErrorCode::InvalidValue,
                    "'" + std::string(key) + "' in " + context_ + " must be a number");
    }
    return v.get<double>();
}

std::optional<double> ObjectReader::optional_number(std::string_view key) const
{
    if (!has(key)) {
        return std::nullopt;
    }
    return number(key);
}

bool ObjectReader::boolean(std::string_view key, bool fallback) const
{
    if (!has(key)) {
        return fallback;
    }
    const Json& v = required(key);
    if (!v.is_boolean()) {
        throw Error(ErrorCode::InvalidValue,
                    "'" + std::string(key) + "' in " + context_ + " must be a boolean");
    }
    return v.get<bool>();
}

long long ObjectReader::integer(std::string_view key) const
{
    const Json& v = required(key);
    if (!v.is_number_integer()) {
        throw Error(ErrorCode::InvalidValue,
                    "'" + std::string(key) + "' in " + context_ + " must be an integer");
    }
    return v.get<long long>();
}

} // namespace json_io

using json_io::ObjectReader;
using json_io::round6;

namespace {
constexpr double kWeightRoundingSlack = 3 * 0.5e-6;
}

Json to_json(const Taxonomy& taxonomy)
{
    Json categories = Json::array();
    for (const auto& c : taxonomy.categories()) {
        Json item{{"id", c.id}, {"display_name", c.display_name}};
        if (c.parent) {
            item["parent"] = *c.parent;
        }
        categories.push_back(std::move(item));
    }
    return Json{{"categories", std::move(categories)}};
}

Taxonomy taxonomy_from_json(const Json& value)
{
    ObjectReader root(value, "taxonomy");
    root.allow_only({"categories"});
    const Json& list = root.required("categories");
    if (!list.is_array()) {
        throw Error(ErrorCode::InvalidValue, "taxonomy.categories must be an array");
    }
    std::vector<Category> categories;
    for (std::size_t i = 0; i < list.size(); ++i) {
        ObjectReader item(list[i], "taxonomy.categories[" + std::to_string(i) + "]");
        item.allow_only({"id", "display_name", "parent"});
        categories.push_back({item.string("id"), item.string("display_name"),
                              item.optional_string("parent")});
    }
    return Taxonomy(std::move(categories));
}

Json to_json(const WeightProfile& p)
{
    Json levels = Json::object();
    for (RiskLevel level : kRiskLevels) {
        levels[std::string(to_token(level))] = round6(p.level_value(level));
    }
    Json weights = Json::object();
    for (SubFactor f : kSubFactors) {
        weights[std::string(to_token(f))] = round6(p.weight(f));
    }
    Json imps = Json::object();
    for (Consequence c : kConsequences) {
        imps[std::string(to_token(c))] = round6(p.imp_value(c));
    }
    return Json{{"name", p.name},
                {"level_values", std::move(levels)},
                {"adv_weights", std::move(weights)},
                {"imp_values", std::move(imps)},
                {"alpha", round6(p.alpha)},
                {"beta", round6(p.beta)},
                {"band_low_max", round6(p.band_low_max)},
                {"band_high_min", round6(p.band_high_min)}};
}

WeightProfile profile_from_json(const Json& value)
{
    ObjectReader root(value, "profile");
    root.allow_only({"name", "level_values", "adv_weights", "imp_values", "alpha", "beta",
                     "band_low_max", "band_high_min"});
    WeightProfile p;
    p.name = root.string("name");

    ObjectReader levels(root.required("level_values"), "profile.level_values");
    levels.allow_only({"low", "medium", "high"});
    for (RiskLevel level : kRiskLevels) {
        p.level_values[static_cast<int>(level)] = levels.number(to_token(level));
    }

    ObjectReader weights(root.required("adv_weights"), "profile.adv_weights");
    weights.allow_only({"uf", "pk", "se"});
    for (SubFactor f : kSubFactors) {
        p.adv_weights[static_cast<int>(f)] = weights.number(to_token(f));
    }
    // Six-digit files cannot spell 1/3 exactly; undo that rounding so the
    // weight-sum invariant holds at full precision.
    const double weight_sum = p.adv_weights[0] + p.adv_weights[1] + p.adv_weights[2];
    if (weight_sum > 0.0 && std::abs(weight_sum - 1.0) <= kWeightRoundingSlack) {
        for (double& w : p.adv_weights) {
            w /= weight_sum;
        }
    }

    ObjectReader imps(root.required("imp_values"), "profile.imp_values");
    imps.allow_only({"time_wasting", "privacy_breach", "financial_loss"});
    for (Consequence c : kConsequences) {
        p.imp_values[static_cast<int>(c)] = imps.number(to_token(c));
    }

    p.alpha = root.number("alpha");
    p.beta = root.number("beta");
    if (std::abs(p.beta - normalizing_beta(p.alpha)) <= 0.5e-6) {
        p.beta = normalizing_beta(p.alpha);
    }
    p.band_low_max = root.optional_number("band_low_max").value_or(3.0);
    p.band_high_min = root.optional_number("band_high_min").value_or(7.0);
    return p;
}

Json to_json(const DetectorProfile& d)
{
    Json scores = Json::object();
    for (const auto& [category, score] : d.f_scores) {
        scores[category] = round6(score);
    }
    return Json{{"name", d.name},
                {"f_scores", std::move(scores)},
                {"fallback", std::string(kFallbackLowest)}};
}

DetectorProfile detector_from_json(const Json& value)
{
    ObjectReader root(value, "detector");
    root.allow_only({"name", "f_scores", "fallback"});
    DetectorProfile d;
    d.name = root.string("name");
    if (auto fallback = root.optional_string("fallback"); fallback && *fallback != kFallbackLowest) {
        throw Error(ErrorCode::InvalidValue, "detector.fallback must be \"" +
                                                 std::string(kFallbackLowest) + "\"");
    }
    const Json& scores = root.required("f_scores");
    if (!scores.is_object()) {
        throw Error(ErrorCode::InvalidValue, "detector.f_scores must be an object");
    }
    for (const auto& item : scores.items()) {
        if (!item.value().is_number()) {
            throw Error(ErrorCode::InvalidValue, "detector.f_scores['" + item.key() + "']");
        }
        const double v = item.value().get<double>();
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::FactorOutOfRange,
                        "detector.f_scores['" + item.key() + "'] must lie in [0,1]");
        }
        d.f_scores.emplace(item.key(), v);
    }
    return d;
}

Json to_json(const FactorRatings& r)
{
    return Json{{"uf", std::string(to_token(r.uf))},
                {"pk", std::string(to_token(r.pk))},
                {"se", std::string(to_token(r.se))}};
}

FactorRatings ratings_from_json(const Json& value, std::string_view context)
{
    ObjectReader obj(value, std::string(context));
    obj.allow_only({"uf", "pk", "se"});
    auto level = [&](std::string_view key) {
        const Json& v = obj.required(key);
        if (!v.is_string()) {
            throw Error(ErrorCode::InvalidRatingToken,
                        std::string(context) + "." + std::string(key) + " must be a string token");
        }
        return risk_level_from_token(v.get<std::string>());
    };
    return FactorRatings{level("uf"), level("pk"), level("se")};
}

Json to_json(const CaseRecord& r)
{
    Json consequences = Json::array();
    for (Consequence c : r.consequences) {
        consequences.push_back(std::string(to_token(c)));
    }
    Json out{{"id", r.id},
             {"title", r.title},
             {"category", r.category},
             {"platform", r.platform},
             {"ratings", to_json(r.ratings)},
             {"consequences", std::move(consequences)}};
    if (r.detector_override) {
        out["detector_override"] = round6(*r.detector_override);
    }
    if (r.notes) {
        out["notes"] = *r.notes;
    }
    if (r.evidence_uri) {
        out["evidence_uri"] = *r.evidence_uri;
    }
    return out;
}

CaseRecord case_from_json(const Json& value, const CaseDecodeOptions& options)
{
    ObjectReader obj(value, "case");
    obj.allow_only({"id", "title", "category", "platform", "ratings", "consequences",
                    "detector_override", "notes", "evidence_uri"});
    CaseRecord r;
    if (options.require_id) {
        r.id = obj.string("id");
    } else {
        r.id = obj.optional_string("id").value_or("adhoc");
    }
    const std::string context = "case '" + r.id + "'";
    if (options.require_descriptive_fields) {
        r.title = obj.string("title");
        r.platform = obj.string("platform");
    } else {
        r.title = obj.optional_string("title").value_or("");
        r.platform = obj.optional_string("platform").value_or("");
    }
    r.category = obj.string("category");
    r.ratings = ratings_from_json(obj.required("ratings"), context + ".ratings");

    const Json& consequences = obj.required("consequences");
    if (!consequences.is_array()) {
        throw Error(ErrorCode::InvalidValue, context + ".consequences must be an array");
    }
    for (const auto& token : consequences) {
        if (!token.is_string()) {
            throw Error(ErrorCode::UnknownConsequence, context + ": non-string token");
        }
        r.consequences.insert(consequence_from_token(token.get<std::string>()));
    }

    r.detector_override = obj.optional_number("detector_override");
    r.notes = obj.optional_string("notes");
    r.evidence_uri = obj.optional_string("evidence_uri");
    return r;
}

} // namespace dprisk
