#include "dprisk/calibration.hpp"

#include "dprisk/builtin.hpp"
#include "dprisk/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace dprisk {

using json_io::ObjectReader;

namespace {

[[noreturn]] void bad_constraint(const std::string& detail)
{
    throw Error(ErrorCode::InvalidConstraint, detail);
}

std::string number_text(double v)
{
    std::ostringstream out;
    out << v;
    return out.str();
}

double band_shortfall(double score, RiskBand band, const WeightProfile& p)
{
    switch (band) {
    case RiskBand::Low: return std::max(0.0, score - p.band_low_max);
    case RiskBand::Medium:
        if (score <= p.band_low_max) return p.band_low_max - score;
        return std::max(0.0, score - p.band_high_min);
    case RiskBand::High: return score > p.band_high_min ? 0.0 : p.band_high_min - score;
    }
    return 0.0;
}

ConstraintCheck evaluate(const CalibrationConstraint& c, std::size_t index, const Assessment* with,
                         const Assessment* baseline, const WeightProfile& profile)
{
    ConstraintCheck out;
    out.index = index;
    out.description = c.describe();
    if (c.kind == CalibrationConstraint::Kind::Delta) {
        if (with == nullptr || baseline == nullptr) {
            bad_constraint("no assessments in both modes for case '" + c.case_id + "'");
        }
        out.observed = with->score - baseline->score;
        out.satisfied = out.observed <= c.delta_max;
        out.shortfall = std::max(0.0, out.observed - c.delta_max);
        return out;
    }
    const Assessment* a = c.mode == AssessmentMode::WithChallenger ? with : baseline;
    if (a == nullptr) {
        bad_constraint("no '" + std::string(to_token(c.mode)) + "' assessment for case '" +
                       c.case_id + "'");
    }
    out.observed = a->score;
    if (c.kind == CalibrationConstraint::Kind::Band) {
        out.satisfied = a->band == c.band;
        out.shortfall = out.satisfied ? 0.0 : std::max(band_shortfall(a->score, c.band, profile), 1e-12);
        return out;
    }
    double shortfall = 0.0;
    bool ok = true;
    if (c.score_min) {
        const bool pass = c.min_exclusive ? a->score > *c.score_min : a->score >= *c.score_min;
        if (!pass) {
            ok = false;
            shortfall = std::max(shortfall, std::max(*c.score_min - a->score, 1e-12));
        }
    }
    if (c.score_max) {
        const bool pass = c.max_exclusive ? a->score < *c.score_max : a->score <= *c.score_max;
        if (!pass) {
            ok = false;
            shortfall = std::max(shortfall, std::max(a->score - *c.score_max, 1e-12));
        }
    }
    out.satisfied = ok;
    out.shortfall = shortfall;
    return out;
}

enum class Slot { Level, Impact, FScore };

struct Binding {
    Slot slot;
    int index = 0;         // RiskLevel or Consequence
    std::string category;  // FScore
};

Binding binding_for(const std::string& name)
{
    auto suffix = [&](std::string_view prefix) -> std::optional<std::string> {
        if (name.rfind(prefix, 0) == 0) {
            return name.substr(prefix.size());
        }
        return std::nullopt;
    };
    if (auto level = suffix("level.")) {
        for (RiskLevel l : kRiskLevels) {
            if (to_token(l) == *level) {
                return {Slot::Level, static_cast<int>(l), {}};
            }
        }
    } else if (auto imp = suffix("imp.")) {
        for (Consequence c : kConsequences) {
            if (to_token(c) == *imp) {
                return {Slot::Impact, static_cast<int>(c), {}};
            }
        }
    } else if (auto category = suffix("f_score.")) {
        if (!category->empty()) {
            return {Slot::FScore, 0, *category};
        }
    }
    throw Error(ErrorCode::InvalidValue, "unknown search parameter '" + name + "'");
}

void apply(const Binding& b, double value, WeightProfile& profile, DetectorProfile& detector)
{
    switch (b.slot) {
    case Slot::Level: profile.level_values[b.index] = value; break;
    case Slot::Impact: profile.imp_values[b.index] = value; break;
    case Slot::FScore: detector.f_scores[b.category] = value; break;
    }
}

class Search {
public:
    Search(const Corpus& corpus, const std::vector<CalibrationConstraint>& constraints,
           const SearchSpace& space, const WeightProfile& base_profile,
           const DetectorProfile& base_detector)
        : corpus_(corpus), constraints_(constraints), base_profile_(base_profile),
          base_detector_(base_detector)
    {
        for (const auto& p : space.parameters) {
            if (!(p.step > 0.0) || p.min > p.max) {
                throw Error(ErrorCode::InvalidValue, "bad range for search parameter '" + p.name + "'");
            }
            for (const auto& q : canonical_) {
                if (q.name == p.name) {
                    throw Error(ErrorCode::InvalidValue, "duplicate search parameter '" + p.name + "'");
                }
            }
            canonical_.push_back(p);
        }
        for (const auto& c : constraints_) {
            if (corpus_.find(c.case_id) == nullptr) {
                bad_constraint("case '" + c.case_id + "' is not in the corpus");
            }
            deps_.push_back(dependencies(c));
        }
        order_parameters();
    }

    CalibrationResult run()
    {
        result_.parameter_order.clear();
        for (const auto& p : order_) {
            result_.parameter_order.push_back(p.name);
        }
        profile_ = base_profile_;
        detector_ = base_detector_;
        profile_.name = "calibrated";
        detector_.name = "calibrated";

        const bool found = checks_pass(-1) && descend(0);
        result_.found = found;
        if (found) {
            result_.profile = profile_;
            result_.detector = detector_;
            verify();
        } else if (!have_best_) {
            record_candidate();
        }
        return result_;
    }

private:
    std::set<std::size_t> dependencies(const CalibrationConstraint& c) const
    {
        const CaseRecord& record = *corpus_.find(c.case_id);
        std::set<std::string> names;
        const bool uses_with = c.kind == CalibrationConstraint::Kind::Delta ||
                               c.mode == AssessmentMode::WithChallenger;
        if (uses_with) {
            for (SubFactor f : kSubFactors) {
                names.insert("level." + std::string(to_token(record.ratings.at(f))));
            }
        }
        for (Consequence con : record.consequences) {
            names.insert("imp." + std::string(to_token(con)));
        }
        if (!record.detector_override) {
            if (base_detector_.f_scores.contains(record.category)) {
                names.insert("f_score." + record.category);
            } else {
                for (const auto& [category, score] : base_detector_.f_scores) {
                    names.insert("f_score." + category);
                }
                for (const auto& p : canonical_) {
                    if (p.name.rfind("f_score.", 0) == 0) {
                        names.insert(p.name);
                    }
                }
            }
        }
        std::set<std::size_t> out;
        for (std::size_t i = 0; i < canonical_.size(); ++i) {
            if (names.contains(canonical_[i].name)) {
                out.insert(i);
            }
        }
        return out;
    }

    // Constraints with fewer free parameters go first so that they prune
    // near the root; ties keep file order.
    void order_parameters()
    {
        std::vector<std::size_t> by_size(constraints_.size());
        for (std::size_t i = 0; i < by_size.size(); ++i) {
            by_size[i] = i;
        }
        std::stable_sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) {
            return deps_[a].size() < deps_[b].size();
        });
        std::vector<bool> placed(canonical_.size(), false);
        std::vector<std::size_t> order;
        auto place = [&](std::size_t i) {
            if (!placed[i]) {
                placed[i] = true;
                order.push_back(i);
            }
        };
        for (std::size_t c : by_size) {
            for (std::size_t i : deps_[c]) {
                place(i);
            }
        }
        for (std::size_t i = 0; i < canonical_.size(); ++i) {
            place(i);
        }

        std::vector<int> position(canonical_.size());
        for (std::size_t depth = 0; depth < order.size(); ++depth) {
            position[order[depth]] = static_cast<int>(depth);
            order_.push_back(canonical_[order[depth]]);
            bindings_.push_back(binding_for(canonical_[order[depth]].name));
            grids_.push_back(canonical_[order[depth]].grid());
        }
        checks_at_.assign(order.size() + 1, {});
        for (std::size_t c = 0; c < constraints_.size(); ++c) {
            int last = -1;
            for (std::size_t i : deps_[c]) {
                last = std::max(last, position[i]);
            }
            checks_at_[last + 1].push_back(c);
        }
        level_depth_.fill(-1);
        for (std::size_t depth = 0; depth < bindings_.size(); ++depth) {
            if (bindings_[depth].slot == Slot::Level) {
                level_depth_[bindings_[depth].index] = static_cast<int>(depth);
            }
        }
    }

    // Strict level ordering for every pair whose values are fixed by `depth`.
    bool levels_ordered(int depth) const
    {
        auto fixed = [&](int level) { return level_depth_[level] <= depth; };
        const auto& v = profile_.level_values;
        for (int a = 0; a < 3; ++a) {
            for (int b = a + 1; b < 3; ++b) {
                if (fixed(a) && fixed(b) && !(v[a] < v[b])) {
                    return false;
                }
            }
        }
        return true;
    }

    bool constraint_holds(std::size_t c)
    {
        const auto& constraint = constraints_[c];
        const CaseRecord& record = *corpus_.find(constraint.case_id);
        std::optional<Assessment> with;
        std::optional<Assessment> baseline;
        const bool delta = constraint.kind == CalibrationConstraint::Kind::Delta;
        if (delta || constraint.mode == AssessmentMode::WithChallenger) {
            with = assess_case(record, corpus_.taxonomy, profile_, detector_,
                               AssessmentMode::WithChallenger);
        }
        if (delta || constraint.mode == AssessmentMode::BaselineChallenger) {
            baseline = assess_case(record, corpus_.taxonomy, profile_, detector_,
                                   AssessmentMode::BaselineChallenger);
        }
        return evaluate(constraint, c, with ? &*with : nullptr, baseline ? &*baseline : nullptr,
                        profile_)
            .satisfied;
    }

    bool checks_pass(int depth)
    {
        if (!levels_ordered(depth)) {
            return false;
        }
        for (std::size_t c : checks_at_[depth + 1]) {
            if (!constraint_holds(c)) {
                return false;
            }
        }
        return true;
    }

    bool descend(std::size_t depth)
    {
        if (depth == order_.size()) {
            return validate_profile(profile_).ok();
        }
        for (double value : grids_[depth]) {
            apply(bindings_[depth], value, profile_, detector_);
            ++result_.nodes_examined;
            if (!checks_pass(static_cast<int>(depth))) {
                record_candidate();
                continue;
            }
            if (descend(depth + 1)) {
                return true;
            }
        }
        restore(depth);
        return false;
    }

    void restore(std::size_t depth)
    {
        const Binding& b = bindings_[depth];
        switch (b.slot) {
        case Slot::Level: profile_.level_values[b.index] = base_profile_.level_values[b.index]; break;
        case Slot::Impact: profile_.imp_values[b.index] = base_profile_.imp_values[b.index]; break;
        case Slot::FScore:
            if (auto it = base_detector_.f_scores.find(b.category); it != base_detector_.f_scores.end()) {
                detector_.f_scores[b.category] = it->second;
            } else {
                detector_.f_scores.erase(b.category);
            }
            break;
        }
    }

    // Scores the pruned point (unbound parameters at their base values)
    // against every constraint; keeps the valid profile missing the fewest.
    void record_candidate()
    {
        if (!validate_profile(profile_).ok()) {
            return;
        }
        std::vector<ConstraintCheck> failures;
        double total = 0.0;
        try {
            const auto assessments = batch_score(corpus_, profile_, detector_, kBothModes);
            for (auto& check : check_constraints(constraints_, assessments, profile_)) {
                if (!check.satisfied) {
                    total += check.shortfall;
                    failures.push_back(std::move(check));
                }
            }
        } catch (const Error&) {
            return;
        }
        const bool better = !have_best_ || failures.size() < result_.best_failures.size() ||
                            (failures.size() == result_.best_failures.size() && total < best_total_);
        if (!better) {
            return;
        }
        have_best_ = true;
        best_total_ = total;
        result_.best_failures = std::move(failures);
        result_.best_assignment.clear();
        for (const auto& p : canonical_) {
            const Binding b = binding_for(p.name);
            double v = 0.0;
            switch (b.slot) {
            case Slot::Level: v = profile_.level_values[b.index]; break;
            case Slot::Impact: v = profile_.imp_values[b.index]; break;
            case Slot::FScore: v = detector_.f_scores.at(b.category); break;
            }
            result_.best_assignment[p.name] = v;
        }
    }

    void verify() const
    {
        if (!validate_profile(result_.profile).ok()) {
            throw Error(ErrorCode::Internal, "calibrated profile fails validation");
        }
        const auto assessments =
            batch_score(corpus_, result_.profile, result_.detector, kBothModes);
        for (const auto& check : check_constraints(constraints_, assessments, result_.profile)) {
            if (!check.satisfied) {
                throw Error(ErrorCode::Internal,
                            "calibrated profile fails re-check of " + check.description);
            }
        }
    }

    const Corpus& corpus_;
    const std::vector<CalibrationConstraint>& constraints_;
    const WeightProfile& base_profile_;
    const DetectorProfile& base_detector_;

    std::vector<SearchParameter> canonical_;
    std::vector<std::set<std::size_t>> deps_;
    std::vector<SearchParameter> order_;
    std::vector<Binding> bindings_;
    std::vector<std::vector<double>> grids_;
    std::vector<std::vector<std::size_t>> checks_at_; // index = depth + 1
    std::array<int, 3> level_depth_{};

    WeightProfile profile_;
    DetectorProfile detector_;
    CalibrationResult result_;
    bool have_best_ = false;
    double best_total_ = std::numeric_limits<double>::infinity();
};

} // namespace

std::string CalibrationConstraint::describe() const
{
    std::string text = case_id + " (" + std::string(to_token(mode)) + "): ";
    switch (kind) {
    case Kind::Band: return text + "band " + std::string(to_token(band));
    case Kind::Delta: return case_id + ": score(with) - score(baseline) <= " + number_text(delta_max);
    case Kind::Interval:
        text += "score in ";
        text += score_min ? (min_exclusive ? "(" : "[") + number_text(*score_min) : "(-inf";
        text += ", ";
        text += score_max ? number_text(*score_max) + (max_exclusive ? ")" : "]") : "+inf)";
        return text;
    }
    return text;
}

std::vector<CalibrationConstraint> constraints_from_json(const Json& value)
{
    if (!value.is_array()) {
        bad_constraint("constraint file must hold an array");
    }
    std::vector<CalibrationConstraint> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        const std::string context = "constraint[" + std::to_string(i) + "]";
        try {
            ObjectReader obj(value[i], context);
            obj.allow_only({"case_id", "mode", "band", "score_min", "score_max", "min_exclusive",
                            "max_exclusive", "delta_max"});
            CalibrationConstraint c;
            c.case_id = obj.string("case_id");
            c.mode = mode_from_token(obj.string("mode"));
            const bool has_band = obj.has("band");
            const bool has_interval = obj.has("score_min") || obj.has("score_max");
            const bool has_delta = obj.has("delta_max");
            if (int(has_band) + int(has_interval) + int(has_delta) != 1) {
                bad_constraint(context + " needs exactly one of band, score interval, delta_max");
            }
            if (!has_interval && (obj.has("min_exclusive") || obj.has("max_exclusive"))) {
                bad_constraint(context + ": exclusivity flags need a score interval");
            }
            if (has_band) {
                c.kind = CalibrationConstraint::Kind::Band;
                c.band = band_from_token(obj.string("band"));
            } else if (has_interval) {
                c.kind = CalibrationConstraint::Kind::Interval;
                c.score_min = obj.optional_number("score_min");
                c.score_max = obj.optional_number("score_max");
                c.min_exclusive = obj.boolean("min_exclusive", false);
                c.max_exclusive = obj.boolean("max_exclusive", false);
                auto in_range = [](double v) { return v >= 0.0 && v <= 10.0; };
                if ((c.score_min && !in_range(*c.score_min)) || (c.score_max && !in_range(*c.score_max))) {
                    bad_constraint(context + ": interval endpoints must lie in [0,10]");
                }
                if (c.score_min && c.score_max && *c.score_min > *c.score_max) {
                    bad_constraint(context + ": score_min exceeds score_max");
                }
            } else {
                c.kind = CalibrationConstraint::Kind::Delta;
                c.delta_max = obj.number("delta_max");
            }
            out.push_back(std::move(c));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::InvalidConstraint) {
                throw;
            }
            throw Error(ErrorCode::InvalidConstraint, e.what());
        }
    }
    return out;
}

Json to_json(const std::vector<CalibrationConstraint>& constraints)
{
    Json out = Json::array();
    for (const auto& c : constraints) {
        Json item{{"case_id", c.case_id}, {"mode", std::string(to_token(c.mode))}};
        switch (c.kind) {
        case CalibrationConstraint::Kind::Band: item["band"] = std::string(to_token(c.band)); break;
        case CalibrationConstraint::Kind::Delta: item["delta_max"] = json_io::round6(c.delta_max); break;
        case CalibrationConstraint::Kind::Interval:
            if (c.score_min) item["score_min"] = json_io::round6(*c.score_min);
            if (c.score_max) item["score_max"] = json_io::round6(*c.score_max);
            if (c.min_exclusive) item["min_exclusive"] = true;
            if (c.max_exclusive) item["max_exclusive"] = true;
            break;
        }
        out.push_back(std::move(item));
    }
    return out;
}

std::vector<CalibrationConstraint> load_constraints(std::string_view reference)
{
    const std::string text = builtin::read_reference(reference, "fixtures");
    Json doc;
    try {
        doc = json_io::parse(text, reference);
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConstraint, e.what());
    }
    return constraints_from_json(doc);
}

std::vector<ConstraintCheck> check_constraints(const std::vector<CalibrationConstraint>& constraints,
                                               std::span<const Assessment> assessments,
                                               const WeightProfile& profile)
{
    std::vector<ConstraintCheck> out;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        const Assessment* with = nullptr;
        const Assessment* baseline = nullptr;
        for (const auto& a : assessments) {
            if (a.case_id == c.case_id) {
                (a.mode == AssessmentMode::WithChallenger ? with : baseline) = &a;
            }
        }
        out.push_back(evaluate(c, i, with, baseline, profile));
    }
    return out;
}

std::vector<double> SearchParameter::grid() const
{
    const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> values;
    values.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        values.push_back(json_io::round6(min + static_cast<double>(i) * step));
    }
    return values;
}

SearchSpace default_search_space(const DetectorProfile& detector, double step)
{
    SearchSpace space;
    for (RiskLevel l : kRiskLevels) {
        space.parameters.push_back({"level." + std::string(to_token(l)), 0.0, 1.0, step});
    }
    for (Consequence c : kConsequences) {
        space.parameters.push_back({"imp." + std::string(to_token(c)), 0.0, 1.0, step});
    }
    for (const auto& [category, score] : detector.f_scores) {
        space.parameters.push_back({"f_score." + category, 0.0, 1.0, step});
    }
    return space;
}

CalibrationResult calibrate(const Corpus& corpus, const std::vector<CalibrationConstraint>& constraints,
                            const SearchSpace& space, const WeightProfile& base_profile,
                            const DetectorProfile& base_detector)
{
    return Search(corpus, constraints, space, base_profile, base_detector).run();
}

Json to_json(const CalibrationResult& result)
{
    Json out{{"found", result.found},
             {"nodes_examined", result.nodes_examined},
             {"parameter_order", result.parameter_order}};
    if (result.found) {
        out["profile"] = to_json(result.profile);
        out["detector"] = to_json(result.detector);
        return out;
    }
    Json assignment = Json::object();
    for (const auto& [name, v] : result.best_assignment) {
        assignment[name] = json_io::round6(v);
    }
    Json failures = Json::array();
    for (const auto& f : result.best_failures) {
        failures.push_back({{"constraint", f.description},
                            {"observed", json_io::round6(f.observed)},
                            {"shortfall", json_io::round6(f.shortfall)}});
    }
    out["nearest_miss"] = {{"assignment", std::move(assignment)}, {"failed", std::move(failures)}};
    return out;
}

} // namespace dprisk
