#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "snar/errors.hpp"
#include "snar/likelihood.hpp"
#include "snar/qmle.hpp"
#include "snar/simulate.hpp"

using namespace snar;

namespace {

const InnovationFamily kNormal = InnovationFamily::make(InnovationKind::Normal, 1.0);

std::vector<double> path_of(double phi, double p, double s2, std::size_t n, std::uint64_t seed,
                            InnovationKind kind = InnovationKind::Normal) {
    return simulate(validate_params(phi, p, s2), n, InnovationFamily::make(kind, std::sqrt(s2)), seed).y;
}

}  // namespace

TEST(ParamSpace, Validation) {
    EXPECT_THROW(ParamSpace::make({{-1.0, 1.0}}, {0.1, 0.9}, {0.1, 10.0}), DomainError);
    EXPECT_THROW(ParamSpace::make({{0.1, 2.0}}, {0.0, 0.9}, {0.1, 10.0}), DomainError);
    EXPECT_THROW(ParamSpace::make({{0.1, 2.0}}, {0.1, 0.9}, {0.0, 10.0}), DomainError);
    EXPECT_THROW(ParamSpace::make({{2.0, 0.1}}, {0.1, 0.9}, {0.1, 10.0}), DomainError);
    const ParamSpace d = ParamSpace::default_space();
    ASSERT_EQ(d.phi_regions().size(), 1u);
    EXPECT_EQ(d.phi_regions()[0].lower, 0.05);
    EXPECT_EQ(d.phi_regions()[0].upper, 3.0);
    EXPECT_EQ(d.p().lower, 0.01);
    EXPECT_EQ(d.p().upper, 0.999);
    EXPECT_EQ(d.sigma2().lower, 1e-6);
    EXPECT_EQ(d.sigma2().upper, 1e6);
    EXPECT_EQ(ParamSpace::default_space(true).phi_regions().size(), 2u);
}

TEST(Fit, RecoversCaseOne) {
    const std::vector<double> y = path_of(1.0, 0.9, 1.0, 800, 31);
    const FitResult f = fit(y);
    EXPECT_TRUE(f.converged);
    EXPECT_EQ(f.n, 800u);
    EXPECT_LT(std::fabs(f.theta_hat.phi() - 1.0), 0.06);
    EXPECT_LT(std::fabs(f.theta_hat.p() - 0.9), 0.06);
    EXPECT_LT(std::fabs(f.theta_hat.sigma2() - 1.0), 0.2);
    EXPECT_TRUE(f.warnings.empty());
    EXPECT_TRUE(f.se.allFinite());
}

TEST(Fit, RecoversBubbleSetting) {
    const std::vector<double> y = path_of(1.05, 0.977, 36.0, 2000, 8);
    const FitResult f = fit(y);
    EXPECT_NEAR(f.theta_hat.phi(), 1.05, 0.03);
    EXPECT_NEAR(f.theta_hat.p(), 0.977, 0.02);
    EXPECT_NEAR(f.theta_hat.sigma2(), 36.0, 8.0);
}

TEST(Fit, MinimizerIsStationaryAtInteriorOptimum) {
    const std::vector<double> y = path_of(1.2, 0.9, 1.0, 1500, 41, InnovationKind::StudentT5);
    const FitResult f = fit(y);
    ASSERT_FALSE(f.at_boundary);
    const Vec3 g = score(f.theta_hat, y);
    // Projected gradient tolerance of the minimizer, scaled by the objective.
    EXPECT_LT(g.norm(), 1e-6 * (1.0 + std::fabs(f.neg_loglik)));
}

TEST(Fit, BeatsTheTruthOnTheSample) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const std::vector<double> y = path_of(std::sqrt(10.0 / 9.0), 0.9, 1.0, 400, seed, InnovationKind::Laplace);
        const FitResult f = fit(y);
        EXPECT_LE(f.neg_loglik, neg_quasi_loglik(validate_params(std::sqrt(10.0 / 9.0), 0.9, 1.0), y) + 1e-9);
    }
}

TEST(Fit, NoiseGivesSmallMeanCoefficient) {
    const std::vector<double> y = path_of(0.0, 0.5, 1.0, 1000, 17);
    const FitResult f = fit(y);
    EXPECT_LT(f.theta_hat.p() * f.theta_hat.phi(), 0.15);
}

TEST(Fit, TooShortThrows) {
    const std::vector<double> y(10, 1.0);
    EXPECT_THROW(fit(y), DegenerateError);
}

TEST(Fit, NegativeRegionAllowed) {
    const std::vector<double> y = path_of(1.0, 0.9, 1.0, 600, 23);
    const FitResult pos = fit(y);
    const FitResult both = fit(y, ParamSpace::default_space(true));
    EXPECT_GT(both.theta_hat.phi(), 0.0);
    EXPECT_NEAR(both.neg_loglik, pos.neg_loglik, 1e-8 * std::fabs(pos.neg_loglik));
}

TEST(Fit, BoundaryIsFlagged) {
    // A tight box around a wrong value forces phi onto its upper bound.
    const std::vector<double> y = path_of(1.0, 0.9, 1.0, 800, 3);
    const ParamSpace tight = ParamSpace::make({{0.5, 0.8}}, {0.01, 0.999}, {1e-6, 1e6});
    const FitResult f = fit(y, tight);
    EXPECT_TRUE(f.at_boundary);
    EXPECT_NE(std::find(f.warnings.begin(), f.warnings.end(), "boundary:phi"), f.warnings.end());
}

TEST(Identification, TruthMinimisesPopulationObjective) {
    const SnarParams t0 = validate_params(1.0, 0.9, 1.0);
    const std::vector<double> y = path_of(1.0, 0.9, 1.0, 100'000, 55);
    const double n = static_cast<double>(y.size() - 1);
    const double at_truth = neg_quasi_loglik(t0, y) / n;
    for (double dphi : {-0.2, -0.1, 0.0, 0.1, 0.2}) {
        for (double dp : {-0.2, -0.1, 0.0, 0.05}) {
            for (double ds : {0.5, 1.0, 1.5}) {
                const SnarParams t = validate_params(1.0 + dphi, 0.9 + dp, ds);
                EXPECT_LE(at_truth, neg_quasi_loglik(t, y) / n + 1e-3);
            }
        }
    }
}

TEST(Sandwich, SymmetricPositiveSemidefinite) {
    const std::vector<double> y = path_of(1.0, 0.9, 1.0, 5000, 61);
    const SandwichResult s = sandwich_cov(validate_params(1.0, 0.9, 1.0), y);
    EXPECT_LT((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff(), 1e-8 * s.cov.cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Mat3> es(s.cov);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8 * es.eigenvalues().maxCoeff());
}

TEST(Sandwich, HalvesAgree) {
    const std::vector<double> y = path_of(1.0, 0.9, 1.0, 40'000, 62);
    const std::vector<double> a(y.begin(), y.begin() + 20'001);
    const std::vector<double> b(y.begin() + 20'000, y.end());
    const SnarParams t0 = validate_params(1.0, 0.9, 1.0);
    const Mat3 ca = sandwich_cov(t0, a).cov;
    const Mat3 cb = sandwich_cov(t0, b).cov;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double scale = std::sqrt(ca(i, i) * ca(j, j));
            EXPECT_LT(std::fabs(ca(i, j) - cb(i, j)), 0.25 * std::max(std::fabs(ca(i, j)), 0.2 * scale))
                << i << "," << j;
        }
    }
}

TEST(Sandwich, AsdScaleMatchesReference) {
    // Long path at the truth; sqrt(n cov_11) / sqrt(800) against the n = 800 ASD of 0.0183.
    const std::vector<double> y = path_of(1.0, 0.9, 1.0, 200'000, 63);
    const SandwichResult s = sandwich_cov(validate_params(1.0, 0.9, 1.0), y);
    const double unit = std::sqrt(200'000.0 * s.cov(0, 0));
    EXPECT_NEAR(unit / std::sqrt(800.0), 0.0183, 0.15 * 0.0183);
}

TEST(Sandwich, SingularGuard) {
    const std::vector<double> y(50, 0.0);
    EXPECT_THROW(sandwich_cov(validate_params(1.0, 0.5, 1.0), y), SingularMatrixError);
}

TEST(CiPDelta, DegenerateWhenNoVariance) {
    const auto [lo, hi] = ci_p_delta(0.3, 0.0, 100, 0.05);
    EXPECT_DOUBLE_EQ(lo, 0.3);
    EXPECT_DOUBLE_EQ(hi, 0.3);
}

TEST(CiPDelta, LogitInterval) {
    // Oracle: g(p) = log((1 - p) / p) has |g'(p)| = 1 / (p (1 - p)).
    const double p = 0.5;
    const double lambda = 1.0;
    const double n = 100.0;
    const double z = 1.959963984540054;
    const double half = z * lambda / (std::sqrt(n) * p * (1 - p));
    const double g = std::log((1 - p) / p);
    const double lo = 1.0 / (1.0 + std::exp(g + half));
    const double hi = 1.0 / (1.0 + std::exp(g - half));
    const auto [a, b] = ci_p_delta(p, lambda, 100, 0.05);
    EXPECT_NEAR(a, lo, 1e-12);
    EXPECT_NEAR(b, hi, 1e-12);
    EXPECT_NEAR(a, 0.3134615, 1e-7);
    EXPECT_NEAR(b, 0.6865385, 1e-7);
}

TEST(CiPDelta, AlwaysInsideUnitInterval) {
    const double z = 2.5758293035489004;
    for (double p : {0.001, 0.2, 0.9, 0.999}) {
        for (double lambda : {0.1, 1.0, 50.0}) {
            const auto [a, b] = ci_p_delta(p, lambda, 20, 0.01);
            EXPECT_GE(a, 0.0);
            EXPECT_LE(b, 1.0);
            EXPECT_LE(a, p);
            EXPECT_GE(b, p);
            // Strictly inside whenever the logit endpoints are representable without saturating.
            const double half = z * lambda / (std::sqrt(20.0) * p * (1 - p));
            if (std::fabs(std::log((1 - p) / p)) + half < 30.0) {
                EXPECT_GT(a, 0.0);
                EXPECT_LT(b, 1.0);
            }
        }
    }
}

TEST(CiWald, Symmetric) {
    const auto [a, b] = ci_wald(1.0, 0.1, 0.05);
    EXPECT_NEAR(a, 1.0 - 0.1959963984540054, 1e-12);
    EXPECT_NEAR(b, 1.0 + 0.1959963984540054, 1e-12);
}
