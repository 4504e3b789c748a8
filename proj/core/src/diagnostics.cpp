#include "snar/diagnostics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "snar/errors.hpp"
#include "snar/likelihood.hpp"
#include "snar/special.hpp"

namespace snar {

namespace {

constexpr double kConditionGuard = 1e12;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool in_weight(double a_prev, double a) { return a_prev <= a; }

// Inverse of a symmetric matrix through its eigendecomposition, refused when ill-conditioned.
Eigen::MatrixXd guarded_inverse(const Eigen::MatrixXd& m, const char* what) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd abs_ev = eig.eigenvalues().cwiseAbs();
    if (!(abs_ev.minCoeff() > 0.0) || abs_ev.maxCoeff() / abs_ev.minCoeff() > kConditionGuard) {
        throw SingularMatrixError(std::string(what) + " is numerically singular");
    }
    return eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

std::string_view to_string(TuningMode mode) {
    switch (mode) {
        case TuningMode::Q90: return "q90";
        case TuningMode::Q95: return "q95";
        case TuningMode::Auto: return "auto";
    }
    return "q95";
}

TuningMode parse_tuning_mode(std::string_view name) {
    const std::string s = lower(name);
    if (s == "q90") return TuningMode::Q90;
    if (s == "q95") return TuningMode::Q95;
    if (s == "auto") return TuningMode::Auto;
    throw DomainError("unknown tuning mode: " + std::string(name));
}

double abs_order_statistic(std::span<const double> v, double q) {
    if (v.empty()) throw DomainError("order statistic of an empty sequence");
    if (!(q > 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in (0, 1]");
    std::vector<double> a(v.size());
    std::transform(v.begin(), v.end(), a.begin(), [](double x) { return std::fabs(x); });
    auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(a.size())));
    k = std::clamp<std::size_t>(k, 1, a.size());
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k - 1), a.end());
    return a[k - 1];
}

double select_tuning(std::span<const double> y, const SnarParams& theta_hat, TuningMode mode) {
    switch (mode) {
        case TuningMode::Q90: return abs_order_statistic(y, 0.90);
        case TuningMode::Q95: return abs_order_statistic(y, 0.95);
        case TuningMode::Auto: {
            const double phi2 = theta_hat.phi() * theta_hat.phi();
            if (theta_hat.p() * phi2 * phi2 < 1.0) return std::numeric_limits<double>::infinity();
            return abs_order_statistic(y, 0.95);
        }
    }
    return abs_order_statistic(y, 0.95);
}

double select_tuning(std::span<const double> y, const FitResult& fit, TuningMode mode) {
    return select_tuning(y, fit.theta_hat, mode);
}

std::vector<double> weighted_residuals(std::span<const double> y, const SnarParams& theta_hat, double a) {
    if (!(a > 0.0)) throw DomainError("tuning parameter a must be positive");
    const double m = theta_hat.p() * theta_hat.phi();
    std::vector<double> eta;
    eta.reserve(y.size() > 0 ? y.size() - 1 : 0);
    for (std::size_t t = 1; t < y.size(); ++t) {
        const double a_prev = std::fabs(y[t - 1]);
        eta.push_back(in_weight(a_prev, a) ? y[t] - m * a_prev : 0.0);
    }
    return eta;
}

Eigen::VectorXd sample_acf(std::span<const double> eta, int M) {
    const std::size_t n = eta.size();
    if (M < 1 || 4 * static_cast<std::size_t>(M) >= n) {
        throw DomainError("lag depth M must satisfy 1 <= M < n/4");
    }
    double mean = 0.0;
    for (double v : eta) mean += v;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double v : eta) denom += (v - mean) * (v - mean);
    if (!(denom > 0.0)) throw DegenerateError("weighted residuals have zero variance");

    Eigen::VectorXd rho(M);
    for (int k = 1; k <= M; ++k) {
        double num = 0.0;
        for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
            num += (eta[t] - mean) * (eta[t - static_cast<std::size_t>(k)] - mean);
        }
        rho[k - 1] = num / denom;
    }
    return rho;
}

Eigen::MatrixXd rho_covariance(std::span<const double> y, const SnarParams& theta_hat, double a, int M,
                               const RhoCovarianceOptions& options) {
    const std::vector<double> eta = weighted_residuals(y, theta_hat, a);
    const std::size_t n = eta.size();
    if (M < 1 || n <= 10 * static_cast<std::size_t>(M)) {
        throw DomainError("rho covariance requires n > 10 M");
    }
    const double nd = static_cast<double>(n);
    const auto Ms = static_cast<std::size_t>(M);

    double mean = 0.0;
    for (double v : eta) mean += v;
    mean /= nd;
    double var = 0.0;
    for (double v : eta) var += (v - mean) * (v - mean);
    var /= nd;
    if (!(var > 0.0)) throw DegenerateError("weighted residuals have zero variance");

    const QuasiLikelihood ql(y);
    const Vec3 theta = as_vector(theta_hat);
    const Mat3 j_inv = guarded_inverse(ql.hessian(theta) / nd, "average Hessian J_hat");

    // u_k = -(1/n) sum_{t>k} eta_{t-k} |y_{t-1}| 1{|y_{t-1}| <= a}; eta index t-1 holds time t.
    Eigen::VectorXd u = Eigen::VectorXd::Zero(M);
    if (!options.zero_parameter_block) {
        for (std::size_t k = 1; k <= Ms; ++k) {
            double s = 0.0;
            for (std::size_t t = k + 1; t <= n; ++t) {
                const double a_prev = std::fabs(y[t - 1]);
                if (in_weight(a_prev, a)) s += eta[t - k - 1] * a_prev;
            }
            u[static_cast<Eigen::Index>(k - 1)] = -s / nd;
        }
    }
    const Vec3 mean_grad(theta_hat.p(), theta_hat.phi(), 0.0);

    Eigen::MatrixXd U(M, M + 3);
    U.leftCols(M).setIdentity();
    U.rightCols(3) = (u / var) * mean_grad.transpose();

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(M + 3, M + 3);
    Eigen::VectorXd v(M + 3);
    for (std::size_t t = Ms + 1; t <= n; ++t) {
        const double et = eta[t - 1] - mean;
        for (std::size_t k = 1; k <= Ms; ++k) {
            v[static_cast<Eigen::Index>(k - 1)] = et * (eta[t - k - 1] - mean) / var;
        }
        v.tail(3) = -j_inv * ql.term_gradient(theta, t);
        G.selfadjointView<Eigen::Lower>().rankUpdate(v);
    }
    G = G.selfadjointView<Eigen::Lower>();
    G /= nd;

    Eigen::MatrixXd cov = U * G * U.transpose();
    cov = 0.5 * (cov + cov.transpose());
    return cov;
}

DiagnosticReport q_statistic(std::span<const double> y, const SnarParams& theta_hat, int M, double a) {
    const std::vector<double> eta = weighted_residuals(y, theta_hat, a);
    DiagnosticReport r;
    r.a = a;
    r.M = M;
    r.df = M;
    r.rho_hat = sample_acf(eta, M);
    r.cov_rho = rho_covariance(y, theta_hat, a, M);
    const Eigen::MatrixXd inv = guarded_inverse(r.cov_rho, "covariance of rho_hat");
    const double n = static_cast<double>(eta.size());
    r.Q = std::max(0.0, n * r.rho_hat.dot(inv * r.rho_hat));
    r.p_value = chi_square_sf(r.Q, M);
    return r;
}

DiagnosticReport q_statistic(std::span<const double> y, const FitResult& fit, int M, TuningMode mode) {
    return q_statistic(y, fit.theta_hat, M, select_tuning(y, fit, mode));
}

}  // namespace snar
