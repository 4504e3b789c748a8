#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "snar/params.hpp"
#include "snar/qmle.hpp"

namespace snar {

/// Choice of the self-weighting threshold a.
enum class TuningMode { Q90, Q95, Auto };

std::string_view to_string(TuningMode mode);

/// Accepts "q90", "q95", "auto" (case-insensitive); throws DomainError otherwise.
TuningMode parse_tuning_mode(std::string_view name);

/// k-th smallest of |v| with k = ceil(q * size). Throws DomainError for empty input or q outside (0, 1].
double abs_order_statistic(std::span<const double> v, double q);

/// Q90 / Q95: order statistic of |y| over every value of `y`.
/// Auto: +inf when p * phi^4 < 1, otherwise the Q95 value.
double select_tuning(std::span<const double> y, const SnarParams& theta_hat, TuningMode mode);
double select_tuning(std::span<const double> y, const FitResult& fit, TuningMode mode);

/// eta_t = (y_t - p phi |y_{t-1}|) * 1{|y_{t-1}| <= a} for t = 1..n (index t-1 in the result).
/// a = +inf disables the weight. Throws DomainError unless a > 0.
std::vector<double> weighted_residuals(std::span<const double> y, const SnarParams& theta_hat, double a);

/// Sample autocorrelations at lags 1..M around the sample mean.
/// Throws DomainError unless 1 <= M < n / 4 and DegenerateError when the series is constant.
Eigen::VectorXd sample_acf(std::span<const double> eta, int M);

struct RhoCovarianceOptions {
    /// Force u_k = 0, dropping the correction for estimated parameters.
    bool zero_parameter_block = false;
};

/// Estimated asymptotic covariance U G U' of sqrt(n) * rho_hat.
/// Throws DomainError unless n > 10 M, SingularMatrixError when J_hat or the result is ill-conditioned.
Eigen::MatrixXd rho_covariance(std::span<const double> y, const SnarParams& theta_hat, double a, int M,
                               const RhoCovarianceOptions& options = {});

struct DiagnosticReport {
    double a = 0.0;
    int M = 0;
    Eigen::VectorXd rho_hat;
    Eigen::MatrixXd cov_rho;
    double Q = 0.0;
    int df = 0;
    double p_value = 1.0;
};

/// Portmanteau statistic Q_M = n rho' (U G U')^{-1} rho, compared with chi-square(M).
DiagnosticReport q_statistic(std::span<const double> y, const SnarParams& theta_hat, int M, double a);
DiagnosticReport q_statistic(std::span<const double> y, const FitResult& fit, int M, TuningMode mode);

}  // namespace snar
