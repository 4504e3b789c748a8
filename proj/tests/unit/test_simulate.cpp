#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "snar/errors.hpp"
#include "snar/io.hpp"
#include "snar/moments.hpp"
#include "snar/simulate.hpp"

using namespace snar;

namespace {

const InnovationFamily kNormal = InnovationFamily::make(InnovationKind::Normal, 1.0);

// Raw (uncentred) moments; the moment formulas are stated for E y^2 and E y^4 / (E y^2)^2.
struct Sample {
    double mean = 0.0;
    double m2 = 0.0;
    double kurt = 0.0;
};

Sample moments_of(const std::vector<double>& v) {
    long double s = 0.0;
    long double m2 = 0.0;
    long double m4 = 0.0;
    for (double x : v) {
        const long double x2 = static_cast<long double>(x) * x;
        s += x;
        m2 += x2;
        m4 += x2 * x2;
    }
    s /= v.size();
    m2 /= v.size();
    m4 /= v.size();
    return {static_cast<double>(s), static_cast<double>(m2), static_cast<double>(m4 / (m2 * m2))};
}

}  // namespace

TEST(Simulate, RecursionHoldsBitForBit) {
    for (InnovationKind k : {InnovationKind::Normal, InnovationKind::Laplace, InnovationKind::StudentT5}) {
        const SnarParams theta = validate_params(1.05, 0.977, 36.0);
        const SimulatedPath path = simulate(theta, 2000, InnovationFamily::make(k, 6.0), 99);
        ASSERT_EQ(path.y.size(), 2001u);
        for (std::size_t t = 1; t < path.y.size(); ++t) {
            ASSERT_EQ(path.y[t], path.s[t] * theta.phi() * std::fabs(path.y[t - 1]) + path.eps[t]) << "t=" << t;
        }
    }
}

TEST(Simulate, Reproducible) {
    const SnarParams theta = validate_params(1.0, 0.9, 1.0);
    SimulationOptions opt;
    opt.y0 = 0.5;
    opt.burn_in = 17;
    const SimulatedPath a = simulate(theta, 300, kNormal, 5, opt);
    const SimulatedPath b = simulate(theta, 300, kNormal, 5, opt);
    EXPECT_EQ(a.y, b.y);
    EXPECT_EQ(a.s, b.s);
    EXPECT_EQ(a.eps, b.eps);
    const SimulatedPath c = simulate(theta, 300, kNormal, 6, opt);
    EXPECT_NE(a.y, c.y);
}

TEST(Simulate, ZeroPhiGivesNoise) {
    const SimulatedPath path = simulate(validate_params(0.0, 0.9, 1.0), 500, kNormal, 3);
    for (std::size_t t = 1; t < path.y.size(); ++t) EXPECT_EQ(path.y[t], path.eps[t]);
}

TEST(Simulate, RejectsMismatchedScale) {
    EXPECT_THROW(simulate(validate_params(1.0, 0.9, 4.0), 10, kNormal, 1), DomainError);
    EXPECT_THROW(simulate(validate_params(1.0, 0.9, 1.0), 0, kNormal, 1), DomainError);
}

TEST(Simulate, SecondMomentMatchesFormula) {
    const SnarParams theta = validate_params(1.0, 0.9, 1.0);
    const SimulatedPath path = simulate(theta, 1'000'000, kNormal, 2024);
    const Sample m = moments_of(path.y);
    EXPECT_NEAR(m.m2 / *second_moment(theta), 1.0, 0.05);
}

TEST(Simulate, KurtosisMatchesFormula) {
    const SnarParams theta = validate_params(1.0, 0.5, 1.0);
    const SimulatedPath path = simulate(theta, 10'000'000, kNormal, 77);
    const Sample m = moments_of(path.y);
    EXPECT_NEAR(m.kurt / *kurtosis(theta, 3.0), 1.0, 0.10);
}

TEST(Simulate, HeavyTailedKurtosisMatchesFormula) {
    const SnarParams theta = validate_params(1.0, 0.9, 1.0);
    const double expected = *kurtosis(theta, 3.0);
    EXPECT_GT(expected, 3.0);
    const SimulatedPath path = simulate(theta, 10'000'000, kNormal, 78);
    EXPECT_NEAR(moments_of(path.y).kurt / expected, 1.0, 0.10);
}

TEST(Simulate, BubblePathsShowExcursions) {
    const SnarParams theta = validate_params(1.05, 0.977, 36.0);
    const InnovationFamily f = InnovationFamily::make(InnovationKind::Normal, 6.0);
    int hits = 0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) {
        const SimulatedPath path = simulate(theta, 400, f, 1000 + s);
        hits += *std::max_element(path.y.begin(), path.y.end()) > 5.0 * 6.0;
    }
    EXPECT_GT(hits, 0.9 * seeds);
}

TEST(SimulateAux, Definition) {
    const SnarParams theta = validate_params(1.2, 0.9, 1.0);
    const AuxBubblePath zero = simulate_aux(theta, 0, kNormal, 4);
    ASSERT_EQ(zero.z.size(), 1u);
    const AuxBubblePath a = simulate_aux(theta, 30, kNormal, 4);
    ASSERT_EQ(a.z.size(), 31u);
    EXPECT_EQ(a.z[0], zero.z[0]);

    const AuxBubblePath noise = simulate_aux(validate_params(0.0, 0.9, 1.0), 30, kNormal, 4);
    EXPECT_EQ(noise.z[0], a.z[0]);
    // With phi = 0 the auxiliary path is the innovation sequence itself, so
    // z_t - phi |z_{t-1}| of the explosive path recovers it.
    for (std::size_t t = 1; t < a.z.size(); ++t) EXPECT_NEAR(a.z[t] - 1.2 * std::fabs(a.z[t - 1]), noise.z[t], 1e-9 * (1 + std::fabs(a.z[t])));
}

TEST(SimulateAux, MeanGrowsWithHorizon) {
    const SnarParams theta = validate_params(1.2, 0.9, 1.0);
    std::vector<double> mean(51, 0.0);
    const int seeds = 10000;
    for (int s = 0; s < seeds; ++s) {
        const AuxBubblePath a = simulate_aux(theta, 50, kNormal, 500 + s);
        for (std::size_t k = 0; k <= 50; ++k) mean[k] += a.z[k] / seeds;
    }
    for (std::size_t k = 6; k <= 50; ++k) EXPECT_GT(mean[k], mean[k - 1]) << "k=" << k;
    EXPECT_GT(mean[50], 1000.0);
}

TEST(Simulate, CsvRoundTripIsExact) {
    const SimulatedPath path = simulate(validate_params(1.05, 0.977, 36.0), 373, InnovationFamily::make(InnovationKind::Normal, 6.0), 7);
    std::stringstream csv;
    write_path_csv(csv, path);
    const std::string text = csv.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,y,s,eps");
    const ObservedSeries back = read_series(csv, "y");
    EXPECT_EQ(back.values, path.y);
}
