#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "snar/qmle.hpp"

namespace snar {

/// x_t = b0 + b1 t + y_t with t = 1..n; y holds the residual series.
struct DetrendResult {
    double b0 = 0.0;
    double b1 = 0.0;
    std::vector<double> y;
};

/// Ordinary least squares of x on (1, t). Throws DegenerateError if n < 3.
DetrendResult detrend(std::span<const double> x);

/// x_t - b0 - b1 t for t = 1..n.
std::vector<double> remove_trend(std::span<const double> x, double b0, double b1);

struct JointDetrendOptions {
    double tol = 1e-8;
    int max_rounds = 50;
    /// Starting intercepts b0_ols + k * sd(y_ols). The OLS intercept absorbs the positive
    /// mean of y, so lower starts are tried as well; the best quasi-likelihood wins.
    std::vector<double> b0_offsets = {0.0, -0.5, -1.0, -2.0};
};

struct JointDetrendResult {
    DetrendResult trend;
    FitResult fit;
    int rounds = 0;  ///< rounds used by the selected start
    bool converged = false;
};

/// Alternates a QMLE fit of the detrended series with an OLS refit of
/// x_t - p phi |y_{t-1}| on (1, t) over t = 2..n until both trend coefficients move
/// less than tol (relative to 1 + |b|) or max_rounds is reached. One alternation runs
/// per starting intercept; the result with the smallest quasi-likelihood is returned.
/// Throws OptimizationError if every start fails.
JointDetrendResult joint_detrend_fit(std::span<const double> x, const ParamSpace& space = ParamSpace::default_space(),
                                     const FitConfig& config = {}, const JointDetrendOptions& options = {});

}  // namespace snar
