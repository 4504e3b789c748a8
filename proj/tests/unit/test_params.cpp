#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "snar/errors.hpp"
#include "snar/innovation.hpp"
#include "snar/moments.hpp"
#include "snar/params.hpp"
#include "snar/random.hpp"

using namespace snar;

namespace {

const InnovationKind kAllKinds[] = {InnovationKind::Normal, InnovationKind::Laplace, InnovationKind::StudentT5};

// Composite Simpson rule on [a, b] with m (even) panels.
template <class F>
double simpson(F f, double a, double b, int m) {
    const double h = (b - a) / m;
    double s = f(a) + f(b);
    for (int i = 1; i < m; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST(ValidateParams, AcceptsBubbleSetting) {
    const SnarParams t = validate_params(1.025, 0.977, 36.0);
    EXPECT_EQ(t.phi(), 1.025);
    EXPECT_EQ(t.p(), 0.977);
    EXPECT_EQ(t.sigma2(), 36.0);
}

TEST(ValidateParams, RejectsUnitProbability) { EXPECT_THROW(validate_params(1.0, 1.0, 1.0), DomainError); }

TEST(ValidateParams, AcceptsDegenerateNoiseModel) { EXPECT_NO_THROW(validate_params(0.0, 0.0, 1.0)); }

TEST(ValidateParams, RejectsBadInputs) {
    EXPECT_THROW(validate_params(1.0, -0.1, 1.0), DomainError);
    EXPECT_THROW(validate_params(1.0, 0.5, 0.0), DomainError);
    EXPECT_THROW(validate_params(NAN, 0.5, 1.0), DomainError);
    EXPECT_THROW(validate_params(1.0, 0.5, INFINITY), DomainError);
}

TEST(Innovation, DensityAtZero) {
    EXPECT_NEAR(innovation_density(InnovationFamily::make(InnovationKind::Normal), 0.0), 0.3989422804014327, 1e-15);
    EXPECT_NEAR(innovation_density(InnovationFamily::make(InnovationKind::Laplace), 0.0), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(innovation_density(InnovationFamily::make(InnovationKind::StudentT5), 0.0),
                8.0 / (3.0 * std::numbers::pi * std::sqrt(3.0)), 1e-14);
}

TEST(Innovation, ParseNames) {
    EXPECT_EQ(parse_innovation_kind("Normal"), InnovationKind::Normal);
    EXPECT_EQ(parse_innovation_kind("laplace"), InnovationKind::Laplace);
    EXPECT_EQ(parse_innovation_kind("st5"), InnovationKind::StudentT5);
    EXPECT_EQ(parse_innovation_kind("t5"), InnovationKind::StudentT5);
    EXPECT_THROW(parse_innovation_kind("cauchy"), DomainError);
}

TEST(Innovation, DensityIntegratesToCdf) {
    for (InnovationKind k : kAllKinds) {
        const InnovationFamily f = InnovationFamily::make(k, 1.7);
        for (double x : {-4.0, -1.3, -0.2, 0.5, 2.2, 5.0}) {
            // Laplace has a kink at 0, so split the range there.
            const double lo = -60.0;
            const double mid = std::min(x, 0.0);
            double integral = simpson([&](double u) { return innovation_density(f, u); }, lo, mid, 20000);
            if (x > 0.0) integral += simpson([&](double u) { return innovation_density(f, u); }, 0.0, x, 2000);
            EXPECT_NEAR(innovation_cdf(f, x), integral, 2e-7) << to_string(k) << " x=" << x;
        }
    }
}

TEST(Innovation, UnitVarianceMoments) {
    // u = tan(v) maps the real line onto (-pi/2, pi/2) and keeps the t5 tails bounded.
    const double edge = std::acos(0.0) - 1e-9;
    for (InnovationKind k : kAllKinds) {
        const InnovationFamily f = InnovationFamily::make(k, 1.0);
        const auto moment = [&](int power) {
            const auto g = [&](double v) {
                const double u = std::tan(v);
                const double c = std::cos(v);
                return std::pow(u, power) * innovation_density(f, u) / (c * c);
            };
            return simpson(g, -edge, 0.0, 200000) + simpson(g, 0.0, edge, 200000);
        };
        EXPECT_NEAR(moment(2), 1.0, 1e-7) << to_string(k);
        EXPECT_NEAR(moment(4), f.kurtosis(), 1e-5) << to_string(k);
    }
}

TEST(Innovation, SampleMomentsOfDraws) {
    for (InnovationKind k : kAllKinds) {
        const InnovationFamily f = InnovationFamily::make(k, 1.0);
        Rng rng(12345);
        const int n = 1'000'000;
        double s = 0.0;
        double ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double e = f.sample(rng);
            s += e;
            ss += e * e;
        }
        const double mean = s / n;
        const double var = ss / n - mean * mean;
        EXPECT_LT(std::fabs(mean), 0.005) << to_string(k);
        EXPECT_GE(var, 0.99) << to_string(k);
        EXPECT_LE(var, 1.01) << to_string(k);
    }
}

TEST(Innovation, QuantileInvertsCdf) {
    for (InnovationKind k : kAllKinds) {
        const InnovationFamily f = InnovationFamily::make(k, 1.0);
        for (double x = -10.0; x <= 10.0; x += 0.25) {
            const double u = innovation_cdf(f, x);
            if (u <= 0.0 || u >= 1.0) continue;
            // Above the median u itself is rounded to a spacing of 2^-53, which moves x by
            // about 2^-53 / density(x); the tolerance widens only by that amount.
            const double tol = x <= 0.0 ? 1e-8 : std::max(1e-8, 0x1.0p-53 / innovation_density(f, x));
            EXPECT_NEAR(innovation_quantile(f, u), x, tol) << to_string(k) << " x=" << x;
        }
        EXPECT_THROW(innovation_quantile(f, 0.0), DomainError);
        EXPECT_THROW(innovation_quantile(f, 1.0), DomainError);
    }
}

TEST(Moments, SecondMoment) {
    EXPECT_DOUBLE_EQ(*second_moment(validate_params(1.0, 0.9, 1.0)), 10.0);
    EXPECT_DOUBLE_EQ(*second_moment(validate_params(0.0, 0.5, 2.0)), 2.0);
    EXPECT_FALSE(second_moment(validate_params(1.2, 0.9, 1.0)).has_value());
}

TEST(Moments, Kurtosis) {
    EXPECT_DOUBLE_EQ(*kurtosis(validate_params(2.0, 0.0, 1.0), 3.0), 3.0);
    EXPECT_DOUBLE_EQ(*kurtosis(validate_params(1.0, 0.5, 1.0), 3.0), 4.5);
    const double k = *kurtosis(validate_params(1.0, 0.9, 1.0), 3.0);
    EXPECT_GT(k, 3.0);
    EXPECT_FALSE(kurtosis(validate_params(1.2, 0.9, 1.0), 3.0).has_value());
}

TEST(Moments, NormalKurtosisMatchesClosedForm) {
    // For normal innovations the general expression reduces to 3 (1 - p^2 phi^4) / (1 - p phi^4).
    for (double phi : {0.5, 0.9, 1.0, 1.05}) {
        for (double p : {0.1, 0.5, 0.8}) {
            if (p * std::pow(phi, 4) >= 1.0) continue;
            const double expected = 3.0 * (1.0 - p * p * std::pow(phi, 4)) / (1.0 - p * std::pow(phi, 4));
            EXPECT_NEAR(*kurtosis(validate_params(phi, p, 1.0), 3.0), expected, 1e-12);
        }
    }
}
