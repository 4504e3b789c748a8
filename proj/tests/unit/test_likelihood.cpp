#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "snar/errors.hpp"
#include "snar/likelihood.hpp"

using namespace snar;

namespace {

struct Instance {
    SnarParams theta;
    std::vector<double> y;
};

Instance random_instance(std::mt19937_64& gen, std::size_t len) {
    std::uniform_real_distribution<double> phi(0.2, 2.0);
    std::uniform_real_distribution<double> p(0.05, 0.95);
    std::uniform_real_distribution<double> s2(0.2, 5.0);
    std::normal_distribution<double> z(0.0, 2.0);
    Instance out{validate_params(phi(gen), p(gen), s2(gen)), {}};
    for (std::size_t i = 0; i < len; ++i) out.y.push_back(z(gen));
    return out;
}

Vec3 fd_gradient(const SnarParams& t, const std::vector<double>& y, double h) {
    const QuasiLikelihood ql(y);
    const Vec3 x = as_vector(t);
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
        Vec3 a = x;
        Vec3 b = x;
        const double step = h * std::max(1.0, std::fabs(x(i)));
        a(i) += step;
        b(i) -= step;
        g(i) = (ql.value(a) - ql.value(b)) / (2 * step);
    }
    return g;
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(NegQuasiLoglik, HandValues) {
    const std::vector<double> y1{0.0, 1.0};
    EXPECT_DOUBLE_EQ(neg_quasi_loglik(validate_params(1.0, 0.5, 1.0), y1), 1.0);
    const std::vector<double> y2{1.0, 0.0};
    EXPECT_NEAR(neg_quasi_loglik(validate_params(1.0, 0.5, 1.0), y2), std::log(1.25) + 0.25 / 1.25, 1e-15);
    const std::vector<double> y3{0.0, 0.0};
    EXPECT_DOUBLE_EQ(neg_quasi_loglik(validate_params(1.0, 0.5, 4.0), y3), std::log(4.0));
}

TEST(NegQuasiLoglik, TooShort) {
    const std::vector<double> y{1.0};
    EXPECT_THROW(neg_quasi_loglik(validate_params(1.0, 0.5, 1.0), y), DegenerateError);
}

TEST(NegQuasiLoglik, DependsOnLagOnlyThroughAbsoluteValue) {
    std::mt19937_64 gen(9);
    for (int rep = 0; rep < 20; ++rep) {
        const Instance in = random_instance(gen, 2);
        const std::vector<double> flipped{-in.y[0], in.y[1]};
        EXPECT_EQ(neg_quasi_loglik(in.theta, in.y), neg_quasi_loglik(in.theta, flipped));
    }
}

TEST(Score, ZeroSeriesKillsPhiAndP) {
    const std::vector<double> y(20, 0.0);
    const Vec3 g = score(validate_params(1.3, 0.4, 2.0), y);
    EXPECT_EQ(g(kPhi), 0.0);
    EXPECT_EQ(g(kP), 0.0);
}

TEST(Score, HandValueAtZeroLag) {
    const std::vector<double> y{0.0, 1.0};
    const Vec3 g = score(validate_params(1.0, 0.5, 1.0), y);
    EXPECT_DOUBLE_EQ(g(kPhi), 0.0);
    EXPECT_DOUBLE_EQ(g(kP), 0.0);
    EXPECT_DOUBLE_EQ(g(kSigma2), 0.0);
}

TEST(Score, MatchesFiniteDifferences) {
    std::mt19937_64 gen(101);
    const Instance in{validate_params(1.1, 0.8, 2.0), random_instance(gen, 51).y};
    const Vec3 g = score(in.theta, in.y);
    const Vec3 fd = fd_gradient(in.theta, in.y, 1e-6);
    EXPECT_LT(rel_err(g, fd), 1e-6);
}

TEST(Score, MatchesFiniteDifferencesOnRandomInstances) {
    std::mt19937_64 gen(202);
    for (int rep = 0; rep < 100; ++rep) {
        const Instance in = random_instance(gen, 51);
        EXPECT_LT(rel_err(score(in.theta, in.y), fd_gradient(in.theta, in.y, 1e-6)), 1e-6) << "rep " << rep;
    }
}

TEST(Hessian, MatchesFiniteDifferencesOfScore) {
    std::mt19937_64 gen(303);
    for (int rep = 0; rep < 100; ++rep) {
        const Instance in = random_instance(gen, 51);
        const Mat3 h = hessian(in.theta, in.y);
        const QuasiLikelihood ql(in.y);
        const Vec3 x = as_vector(in.theta);
        Mat3 fd;
        for (int j = 0; j < 3; ++j) {
            const double step = 1e-5 * std::max(1.0, std::fabs(x(j)));
            Vec3 a = x;
            Vec3 b = x;
            a(j) += step;
            b(j) -= step;
            Vec3 ga;
            Vec3 gb;
            ql.value_and_gradient(a, ga);
            ql.value_and_gradient(b, gb);
            fd.col(j) = (ga - gb) / (2 * step);
        }
        EXPECT_LT(rel_err(h, fd), 1e-4) << "rep " << rep;
        EXPECT_EQ((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Hessian, ZeroSeriesOnlySigmaBlock) {
    // Every lag is zero; only the final value, which is never a lag, is nonzero.
    std::vector<double> z(30, 0.0);
    z.back() = 1.5;
    const double s2 = 2.0;
    const Mat3 h = hessian(validate_params(1.3, 0.4, s2), z);
    double expected = 0.0;
    for (std::size_t t = 1; t < z.size(); ++t) expected += 2 * z[t] * z[t] / std::pow(s2, 3) - 1 / (s2 * s2);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i == kSigma2 && j == kSigma2) {
                EXPECT_NEAR(h(i, j), expected, 1e-12);
            } else {
                EXPECT_EQ(h(i, j), 0.0);
            }
        }
    }
}

TEST(QuasiLikelihood, TermsSumToTotal) {
    std::mt19937_64 gen(404);
    const Instance in = random_instance(gen, 40);
    const QuasiLikelihood ql(in.y);
    const Vec3 x = as_vector(in.theta);
    double total = 0.0;
    Vec3 grad = Vec3::Zero();
    Mat3 hess = Mat3::Zero();
    for (std::size_t t = 1; t <= ql.n(); ++t) {
        total += ql.term(x, t);
        grad += ql.term_gradient(x, t);
        hess += ql.term_hessian(x, t);
    }
    Vec3 g;
    EXPECT_NEAR(ql.value_and_gradient(x, g), total, 1e-10);
    EXPECT_LT((g - grad).norm(), 1e-10);
    EXPECT_LT((ql.hessian(x) - hess).norm(), 1e-9);
}
