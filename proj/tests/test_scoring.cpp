#include "dprisk/scoring.hpp"

#include "test_support.hpp"

#include <algorithm>
#include <random>

using namespace dprisk;

namespace {

const WeightProfile kDefaults{};

Taxonomy taxonomy()
{
    return Taxonomy({{"nagging", "Nagging", std::nullopt},
                     {"pop-up-ads", "Pop-up ads", "nagging"},
                     {"roach-motel", "Roach motel", std::nullopt}});
}

double score(double adv, double det, double imp, const WeightProfile& p = kDefaults)
{
    return compute_risk(adv, det, imp, p).final_score;
}

} // namespace

TEST_CASE("corner identities")
{
    CHECK(score(1.0, 0.0, 1.0) == 10.0);
    for (double imp : {0.0, 0.3, 0.5, 1.0}) {
        CHECK(score(0.0, 1.0, imp) == 0.0);
    }
    CHECK(classify_band(3.0, kDefaults) == RiskBand::Low);
    CHECK(classify_band(7.0, kDefaults) == RiskBand::Medium);
    CHECK(classify_band(7.01, kDefaults) == RiskBand::High);
    CHECK(classify_band(0.0, kDefaults) == RiskBand::Low);
    CHECK(classify_band(10.0, kDefaults) == RiskBand::High);
    CHECK_ERROR_CODE(classify_band(10.5, kDefaults), ErrorCode::ScoreOutOfRange);
    CHECK_ERROR_CODE(classify_band(-0.1, kDefaults), ErrorCode::ScoreOutOfRange);
}

TEST_CASE("factors outside [0,1] are rejected")
{
    CHECK_ERROR_CODE(compute_risk(1.1, 0.0, 0.0, kDefaults), ErrorCode::FactorOutOfRange);
    CHECK_ERROR_CODE(compute_risk(0.5, -0.1, 0.0, kDefaults), ErrorCode::FactorOutOfRange);
    CHECK_ERROR_CODE(compute_risk(0.5, 0.5, 2.0, kDefaults), ErrorCode::FactorOutOfRange);
}

TEST_CASE("ADV is the weighted sum of level values")
{
    CHECK(compute_adv({RiskLevel::Low, RiskLevel::Medium, RiskLevel::Low}, kDefaults) ==
          doctest::Approx(0.7 / 3.0));
    CHECK(compute_adv({RiskLevel::High, RiskLevel::High, RiskLevel::High}, kDefaults) ==
          doctest::Approx(0.9));
    const auto terms = adv_terms({RiskLevel::High, RiskLevel::Low, RiskLevel::Medium}, kDefaults);
    REQUIRE(terms.size() == 3);
    CHECK(terms[0].factor == SubFactor::UserInterface);
    CHECK(terms[2].level_value == 0.5);
}

TEST_CASE("IMP sums present consequences and clamps at one")
{
    CHECK(compute_imp({}, kDefaults) == 0.0);
    CHECK(compute_imp({Consequence::PrivacyBreach}, kDefaults) == doctest::Approx(0.6));
    const auto all = impact_breakdown(
        {Consequence::TimeWasting, Consequence::PrivacyBreach, Consequence::FinancialLoss}, kDefaults);
    CHECK(all.unclamped_sum == doctest::Approx(1.6));
    CHECK(all.value == 1.0);
    CHECK(all.clamped);
    const auto two = impact_breakdown({Consequence::TimeWasting, Consequence::FinancialLoss}, kDefaults);
    CHECK(two.value == doctest::Approx(1.0));
}

TEST_CASE("worked values for the reference cases")
{
    const Taxonomy t = taxonomy();
    const DetectorProfile d{"d", {{"pop-up-ads", 0.6}}};
    CaseRecord rm;
    rm.id = "rm";
    rm.category = "roach-motel";
    rm.ratings = {RiskLevel::High, RiskLevel::High, RiskLevel::High};
    rm.consequences = {Consequence::TimeWasting, Consequence::FinancialLoss};
    const DetectorProfile low{"d", {{"pop-up-ads", 0.6}, {"nagging", 0.15}}};
    const ModeComparison cmp = compare_modes(rm, t, kDefaults, low);
    CHECK(cmp.with_challenger.det_source == DetectionSource::Fallback);
    CHECK(cmp.with_challenger.score == doctest::Approx(8.75));
    CHECK(cmp.with_challenger.band == RiskBand::High);
    CHECK(cmp.baseline.adv == kBaselineAdvantage);
    CHECK(cmp.baseline.score == doctest::Approx(6.75));
    CHECK(cmp.baseline.band == RiskBand::Medium);
    CHECK(cmp.delta == doctest::Approx(2.0));

    CaseRecord pa;
    pa.id = "pa";
    pa.category = "pop-up-ads";
    pa.ratings = {RiskLevel::High, RiskLevel::High, RiskLevel::Low};
    pa.consequences = {Consequence::TimeWasting};
    const Assessment a = assess_case(pa, t, kDefaults, d, AssessmentMode::WithChallenger);
    CHECK(a.score == doctest::Approx((1.9 / 3.0 - 0.6 + 1.0) * 1.3 * 2.5));
    CHECK(round2(a.score) == 3.36);

    pa.detector_override = 0.0;
    const Assessment o = assess_case(pa, t, kDefaults, d, AssessmentMode::WithChallenger);
    CHECK(o.det == 0.0);
    CHECK(o.det_source == DetectionSource::Override);

    const Assessment sim = assess_case(pa, t, kDefaults, d, AssessmentMode::WithChallenger,
                                       DetectionFactor{0.25, DetectionSource::Simulated});
    CHECK(sim.det == 0.25);
    CHECK(sim.det_source == DetectionSource::Simulated);
}

TEST_CASE("random triples stay in range and the breakdown multiplies out")
{
    std::mt19937_64 rng(20261017);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10'000; ++i) {
        const double adv = u(rng), det = u(rng), imp = u(rng);
        const ScoreBreakdown b = compute_risk(adv, det, imp, kDefaults);
        REQUIRE(b.final_score >= 0.0);
        REQUIRE(b.final_score <= 10.0);
        REQUIRE_FALSE(b.score_clamped);
        REQUIRE(b.offset_term == doctest::Approx(adv - det + 1.0));
        REQUIRE(b.impact_multiplier == doctest::Approx(1.0 + imp));
        REQUIRE(b.final_score == doctest::Approx(b.offset_term * b.impact_multiplier * b.beta));
    }
}

TEST_CASE("monotone in each factor")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
        double adv = u(rng), det = u(rng), imp = u(rng);
        double lo = u(rng), hi = u(rng);
        if (lo > hi) std::swap(lo, hi);
        violations += score(hi, det, imp) < score(lo, det, imp);
        violations += score(adv, lo, imp) < score(adv, hi, imp);
        violations += score(adv, det, hi) < score(adv, det, lo);
    }
    CHECK(violations == 0);
}

TEST_CASE("bands partition [0,10]")
{
    for (int i = 0; i <= 10'000; ++i) {
        const double s = i / 1000.0;
        const RiskBand b = classify_band(s, kDefaults);
        const RiskBand expected = s <= 3.0 ? RiskBand::Low : (s > 7.0 ? RiskBand::High : RiskBand::Medium);
        REQUIRE(b == expected);
    }
}

TEST_CASE("ADV is symmetric under joint permutation of weights and ratings")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> lvl(0, 2);
    for (int i = 0; i < 500; ++i) {
        WeightProfile p;
        double a = u(rng), b = u(rng), c = u(rng);
        const double sum = a + b + c;
        p.adv_weights = {a / sum, b / sum, c / sum};
        const std::array<RiskLevel, 3> r{static_cast<RiskLevel>(lvl(rng)),
                                         static_cast<RiskLevel>(lvl(rng)),
                                         static_cast<RiskLevel>(lvl(rng))};
        const double base = compute_adv({r[0], r[1], r[2]}, p);
        REQUIRE(base >= p.level_values[0] - 1e-12);
        REQUIRE(base <= p.level_values[2] + 1e-12);

        std::array<int, 3> perm{0, 1, 2};
        do {
            WeightProfile q = p;
            q.adv_weights = {p.adv_weights[perm[0]], p.adv_weights[perm[1]], p.adv_weights[perm[2]]};
            const double permuted = compute_adv({r[perm[0]], r[perm[1]], r[perm[2]]}, q);
            REQUIRE(permuted == doctest::Approx(base).epsilon(1e-12));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST_CASE("IMP = 0.5 lower band is exactly adv - det <= -0.2")
{
    // (d + 1)(1.5)(2.5) <= 3  <=>  d <= -0.2
    CHECK(score(0.3, 0.5, 0.5) == doctest::Approx(3.0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const double adv = u(rng), det = u(rng);
        const double d = adv - det;
        if (std::abs(d + 0.2) < 1e-9) continue;
        mismatches += (classify_band(score(adv, det, 0.5), kDefaults) == RiskBand::Low) != (d <= -0.2);
    }
    CHECK(mismatches == 0);
}
