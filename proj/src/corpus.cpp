#include "dprisk/corpus.hpp"

#include "dprisk/builtin.hpp"
#include "dprisk/error.hpp"

#include <unordered_set>

namespace dprisk {

using json_io::ObjectReader;

const CaseRecord* Corpus::find(std::string_view id) const
{
    for (const auto& c : cases) {
        if (c.id == id) {
            return &c;
        }
    }
    return nullptr;
}

Corpus corpus_from_json(const Json& value)
{
    ObjectReader root(value, "corpus");
    root.allow_only({"provenance", "taxonomy", "cases"});
    Corpus corpus;
    if (root.has("provenance")) {
        ObjectReader p(root.required("provenance"), "corpus.provenance");
        p.allow_only({"source", "date"});
        corpus.provenance.source = p.optional_string("source").value_or("");
        corpus.provenance.date = p.optional_string("date").value_or("");
    }
    corpus.taxonomy = taxonomy_from_json(root.required("taxonomy"));

    const Json& cases = root.required("cases");
    if (!cases.is_array()) {
        throw Error(ErrorCode::InvalidValue, "corpus.cases must be an array");
    }
    std::unordered_set<std::string> ids;
    for (const auto& item : cases) {
        CaseRecord record = case_from_json(item);
        if (!ids.insert(record.id).second) {
            throw Error(ErrorCode::DuplicateCaseId, "'" + record.id + "'");
        }
        validate_case(record, corpus.taxonomy);
        corpus.cases.push_back(std::move(record));
    }
    return corpus;
}

Json to_json(const Corpus& corpus)
{
    Json cases = Json::array();
    for (const auto& c : corpus.cases) {
        cases.push_back(to_json(c));
    }
    return Json{{"provenance",
                 {{"source", corpus.provenance.source}, {"date", corpus.provenance.date}}},
                {"taxonomy", to_json(corpus.taxonomy)},
                {"cases", std::move(cases)}};
}

Corpus parse_corpus(std::string_view text, std::string_view source)
{
    return corpus_from_json(json_io::parse(text, source));
}

Corpus load_corpus(std::string_view reference)
{
    return parse_corpus(builtin::read_reference(reference, "fixtures"), reference);
}

std::string encode_corpus(const Corpus& corpus)
{
    return json_io::dump(to_json(corpus));
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path)
{
    json_io::write_text(path, encode_corpus(corpus));
}

std::vector<Assessment> batch_score(const Corpus& corpus, const WeightProfile& profile,
                                    const DetectorProfile& detector,
                                    std::span<const AssessmentMode> modes)
{
    std::vector<Assessment> out;
    out.reserve(corpus.cases.size() * modes.size());
    for (const auto& record : corpus.cases) {
        for (AssessmentMode mode : modes) {
            try {
                out.push_back(assess_case(record, corpus.taxonomy, profile, detector, mode));
            } catch (const Error& e) {
                throw Error(e.code(), "case '" + record.id + "': " + e.detail());
            }
        }
    }
    return out;
}

WeightProfile load_profile(std::string_view reference)
{
    return profile_from_json(
        json_io::parse(builtin::read_reference(reference, "profiles"), reference));
}

DetectorProfile load_detector(std::string_view reference)
{
    return detector_from_json(
        json_io::parse(builtin::read_reference(reference, "detectors"), reference));
}

Taxonomy load_taxonomy(std::string_view reference)
{
    return taxonomy_from_json(
        json_io::parse(builtin::read_reference(reference, "taxonomy"), reference));
}

} // namespace dprisk
