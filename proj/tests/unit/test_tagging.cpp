#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "snar/errors.hpp"
#include "snar/simulate.hpp"
#include "snar/special.hpp"
#include "snar/tagging.hpp"

using namespace snar;

namespace {

const InnovationFamily kNormal = InnovationFamily::make(InnovationKind::Normal, 1.0);

std::size_t zeros(const TagResult& t) { return t.s_hat.size() - t.bubble_count(); }

}  // namespace

TEST(Residuals, HandValues) {
    const std::vector<double> a{0.0, 1.0};
    EXPECT_EQ(residuals_r(a, 2.0), std::vector<double>{1.0});
    const std::vector<double> b{-2.0, 1.0};
    EXPECT_EQ(residuals_r(b, 1.0), std::vector<double>{-1.0});
}

TEST(Residuals, EqualInnovationInBubbleState) {
    const SnarParams t0 = validate_params(1.2, 0.9, 1.0);
    const SimulatedPath path = simulate(t0, 1000, kNormal, 3);
    const auto r = residuals_r(path.y, t0.phi());
    for (std::size_t t = 1; t < path.y.size(); ++t) {
        if (path.s[t] == 1) EXPECT_NEAR(r[t - 1], path.eps[t], 1e-13 * (1.0 + std::fabs(path.y[t])));
    }
}

TEST(MethodNames, RoundTrip) {
    for (TagMethod m : {TagMethod::RBT1, TagMethod::RBT2, TagMethod::RBT3, TagMethod::RBT4, TagMethod::NBT}) {
        EXPECT_EQ(parse_tag_method(to_string(m)), m);
    }
    EXPECT_EQ(parse_tag_method("rbt3"), TagMethod::RBT3);
    EXPECT_THROW(parse_tag_method("rbt5"), DomainError);
}

TEST(Rule1, TagsExactCountWithDistinctResiduals) {
    for (double p : {0.5, 0.77, 0.9}) {
        const SnarParams th = validate_params(1.0, p, 1.0);
        const SimulatedPath path = simulate(th, 333, kNormal, 8);
        const TagResult t = rbt_tag(path.y, th, 1);
        ASSERT_EQ(t.s_hat.size(), 333u);
        EXPECT_EQ(zeros(t), static_cast<std::size_t>(std::ceil((1 - p) * 333)));
        for (std::size_t i = 0; i < t.s_hat.size(); ++i) EXPECT_EQ(t.s_hat[i] == 0, t.r_hat[i] <= t.threshold[i]);
    }
}

TEST(Rule2, HandExample) {
    const std::vector<double> y{2.0, 0.5};
    const TagResult t = rbt_tag(y, validate_params(1.0, 0.9, 1.0), 2);
    EXPECT_EQ(t.r_hat[0], -1.5);
    EXPECT_EQ(t.s_hat[0], 0);
    EXPECT_EQ(t.threshold[0], -1.0);
}

TEST(Rule2, IsLikelihoodComparison) {
    const SnarParams th = validate_params(1.1, 0.8, 2.0);
    const SimulatedPath path = simulate(th, 2000, InnovationFamily::make(InnovationKind::Normal, std::sqrt(2.0)), 5);
    const TagResult t = rbt_tag(path.y, th, 2);
    const double sd = std::sqrt(2.0);
    for (std::size_t i = 0; i < t.s_hat.size(); ++i) {
        const double m = th.phi() * std::fabs(path.y[i]);
        const bool null_more_likely = normal_pdf((t.r_hat[i] + m) / sd) > normal_pdf(t.r_hat[i] / sd);
        EXPECT_EQ(t.s_hat[i] == 0, null_more_likely) << i;
    }
}

TEST(Rule3, ZeroLagThresholdIsNormalQuantile) {
    const std::vector<double> y{0.0, 0.3};
    const SnarParams th = validate_params(1.0, 0.9, 4.0);
    const TagResult t = rbt_tag(y, th, 3);
    EXPECT_NEAR(t.threshold[0], 2.0 * normal_quantile(0.1), 1e-9);
}

TEST(Rule3, ThresholdIsMixtureQuantile) {
    const SnarParams th = validate_params(1.2, 0.7, 1.0);
    const SimulatedPath path = simulate(th, 300, kNormal, 6);
    const TagResult t = rbt_tag(path.y, th, 3);
    for (std::size_t i = 0; i < t.s_hat.size(); ++i) {
        const double c = t.threshold[i];
        const double m = th.phi() * std::fabs(path.y[i]);
        const double mix = th.p() * normal_cdf(c) + (1 - th.p()) * normal_cdf(c + m);
        EXPECT_NEAR(mix, 1 - th.p(), 1e-9);
    }
}

TEST(Rule4, CoincidesWithRule2AtEvenOdds) {
    const SnarParams th = validate_params(1.3, 0.5, 1.0);
    const SimulatedPath path = simulate(th, 1500, kNormal, 9);
    EXPECT_EQ(rbt_tag(path.y, th, 2).s_hat, rbt_tag(path.y, th, 4).s_hat);
}

TEST(Rule4, ReversedFlagInvertsDecision) {
    const SnarParams th = validate_params(1.3, 0.8, 1.0);
    const SimulatedPath path = simulate(th, 500, kNormal, 10);
    const TagResult a = rbt_tag(path.y, th, 4);
    const TagResult b = rbt_tag(path.y, th, 4, {.rule4_reversed = true});
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.s_hat.size(); ++i) same += a.s_hat[i] == b.s_hat[i];
    EXPECT_LT(same, 5u);
}

TEST(RbtTag, CalibratedCounts) {
    const SnarParams th = validate_params(1.0, 0.9, 1.0);
    const SimulatedPath path = simulate(th, 200, kNormal, 11);
    for (int rule : {2, 3, 4}) {
        const TagResult t = rbt_tag(path.y, th, rule, {.null_count = 37});
        EXPECT_EQ(zeros(t), 37u) << rule;
    }
    EXPECT_THROW(rbt_tag(path.y, th, 2, {.null_count = 500}), DomainError);
    EXPECT_THROW(rbt_tag(path.y, th, 5), DomainError);
}

TEST(Nbt, InfiniteThresholds) {
    const SimulatedPath path = simulate(validate_params(1.0, 0.9, 1.0), 100, kNormal, 12);
    const TagResult all0 = nbt_tag(path.y, INFINITY);
    const TagResult all1 = nbt_tag(path.y, -INFINITY);
    EXPECT_EQ(all0.bubble_count(), 0u);
    EXPECT_EQ(all1.bubble_count(), 100u);
    EXPECT_TRUE(all0.r_hat.empty());
}

TEST(Nbt, Monotone) {
    const SimulatedPath path = simulate(validate_params(1.2, 0.9, 1.0), 500, kNormal, 13);
    const TagResult lo = nbt_tag(path.y, -0.5);
    const TagResult hi = nbt_tag(path.y, 1.5);
    for (std::size_t i = 0; i < lo.s_hat.size(); ++i) EXPECT_LE(hi.s_hat[i], lo.s_hat[i]);
}

TEST(Nbt, CalibrationOnGrid) {
    std::vector<double> v(100);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i + 1);
    const double c = calibrate_nbt_threshold(v, 0.10);
    EXPECT_EQ(c, 90.0);
    std::vector<double> y{0.0};
    y.insert(y.end(), v.begin(), v.end());
    EXPECT_EQ(nbt_tag(y, c).bubble_count(), 10u);
    EXPECT_EQ(calibrate_nbt_threshold(v, 1.0 - 1e-12), 1.0);
    const std::vector<double> ties(50, 3.0);
    std::vector<double> ty{0.0};
    ty.insert(ty.end(), ties.begin(), ties.end());
    EXPECT_EQ(nbt_tag(ty, calibrate_nbt_threshold(ties, 0.3)).bubble_count(), 0u);
    EXPECT_THROW(calibrate_nbt_threshold(v, 0.0), DomainError);
    EXPECT_THROW(calibrate_nbt_threshold(std::vector<double>{}, 0.5), DomainError);
}

TEST(TagAll, SharesRuleOneFraction) {
    const SnarParams th = validate_params(1.0, 0.9, 1.0);
    const SimulatedPath path = simulate(th, 200, kNormal, 14);
    const std::vector<TagMethod> methods{TagMethod::RBT1, TagMethod::RBT2, TagMethod::RBT3, TagMethod::RBT4,
                                         TagMethod::NBT};
    const auto tags = tag_all(path.y, th, methods);
    ASSERT_EQ(tags.size(), 5u);
    for (const TagResult& t : tags) EXPECT_EQ(t.bubble_count(), tags[0].bubble_count()) << to_string(t.method);
    const auto raw = tag_all(path.y, th, methods, {.calibrate_all = false});
    EXPECT_EQ(raw[1].s_hat, rbt_tag(path.y, th, 2).s_hat);
}

TEST(Excursions, Examples) {
    const std::vector<std::uint8_t> a{0, 1, 1, 1, 0};
    const auto e = excursions(a);
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e[0].start, 1u);
    EXPECT_EQ(e[0].end, 4u);
    EXPECT_EQ(e[0].duration, 4u);
    EXPECT_TRUE(excursions(std::vector<std::uint8_t>(10, 1)).empty());
    EXPECT_TRUE(excursions(std::vector<std::uint8_t>{0, 0, 0}).empty());
    EXPECT_TRUE(excursions(a, 5).empty());
}

TEST(Excursions, SpliceGivesUnion) {
    std::mt19937_64 gen(3);
    std::bernoulli_distribution b(0.8);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::uint8_t> x(60);
        std::vector<std::uint8_t> y(70);
        for (auto& v : x) v = b(gen);
        for (auto& v : y) v = b(gen);
        x.back() = 0;
        y.front() = 0;
        std::vector<std::uint8_t> joined(x);
        joined.insert(joined.end(), y.begin() + 1, y.end());
        auto expected = excursions(x);
        for (Excursion e : excursions(y)) {
            e.start += x.size() - 1;
            e.end += x.size() - 1;
            expected.push_back(e);
        }
        const auto got = excursions(joined);
        ASSERT_EQ(got.size(), expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].start, expected[i].start);
            EXPECT_EQ(got[i].end, expected[i].end);
            EXPECT_EQ(got[i].duration, expected[i].duration);
            if (i > 0) EXPECT_GT(got[i].start, got[i - 1].end - 1);
        }
    }
}

TEST(TagMetrics, Examples) {
    const std::vector<std::uint8_t> s{1, 1, 0, 1};
    const std::vector<std::uint8_t> h{1, 0, 0, 1};
    const TagMetrics m = tag_metrics(h, s);
    EXPECT_DOUBLE_EQ(m.P, 0.75);
    EXPECT_DOUBLE_EQ(*m.P0, 1.0);
    EXPECT_DOUBLE_EQ(*m.P1, 2.0 / 3.0);
    const TagMetrics same = tag_metrics(s, s);
    EXPECT_EQ(same.P, 1.0);
    EXPECT_EQ(*same.P0, 1.0);
    EXPECT_EQ(*same.P1, 1.0);
    const std::vector<std::uint8_t> ones(4, 1);
    EXPECT_FALSE(tag_metrics(h, ones).P0.has_value());
    EXPECT_THROW(tag_metrics(h, std::vector<std::uint8_t>{1}), DomainError);
}

TEST(Proposition, ResidualIdentitySmallScale) {
    const PropositionCheck c =
        check_proposition(PropositionKind::Residual, validate_params(1.2, 0.9, 1.0), kNormal, 5, -3.0, 200'000, 21);
    EXPECT_GE(c.events, 200u);
    EXPECT_LT(std::fabs(c.lhs - c.rhs), 3.0 * c.mc_se);
}

TEST(Proposition, NullSideUnboundThreshold) {
    const PropositionCheck c = check_proposition(PropositionKind::Null, validate_params(1.2, 0.9, 1.0), kNormal, 5,
                                                 -INFINITY, 50'000, 22);
    EXPECT_EQ(c.lhs, 1.0);
    EXPECT_EQ(c.rhs, 1.0);
}

TEST(Proposition, NullSideGrowsWithDuration) {
    double prev = -1.0;
    for (std::size_t k : {1u, 5u, 10u, 20u}) {
        const PropositionCheck c =
            check_proposition(PropositionKind::Null, validate_params(1.2, 0.9, 1.0), kNormal, k, 5.0, 100'000, 23);
        EXPECT_GT(c.rhs, prev) << "k=" << k;
        prev = c.rhs;
    }
    EXPECT_GT(prev, 0.9);
}

TEST(Proposition, TooFewEvents) {
    EXPECT_THROW(check_proposition(PropositionKind::Residual, validate_params(1.2, 0.9, 1.0), kNormal, 10, -3.0, 500, 24),
                 InsufficientEventsError);
}
