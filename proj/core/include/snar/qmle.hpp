#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "snar/likelihood.hpp"
#include "snar/optimizer.hpp"
#include "snar/params.hpp"

namespace snar {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double v) const noexcept { return v >= lower && v <= upper; }
    double width() const noexcept { return upper - lower; }
};

/// Compact parameter box. phi may range over one or two intervals, none containing 0.
class ParamSpace {
public:
    /// Throws DomainError unless every interval is finite with lower < upper, no phi
    /// interval contains 0, the p interval lies inside (0, 1) and sigma2 inside (0, inf).
    static ParamSpace make(std::vector<Interval> phi_regions, Interval p, Interval sigma2);

    /// phi in [0.05, 3] (plus [-3, -0.05] when allow_negative_phi), p in [0.01, 0.999],
    /// sigma2 in [1e-6, 1e6].
    static ParamSpace default_space(bool allow_negative_phi = false);

    const std::vector<Interval>& phi_regions() const noexcept { return phi_; }
    const Interval& p() const noexcept { return p_; }
    const Interval& sigma2() const noexcept { return sigma2_; }

    bool contains(const SnarParams& theta) const noexcept;

private:
    ParamSpace(std::vector<Interval> phi, Interval p, Interval sigma2)
        : phi_(std::move(phi)), p_(p), sigma2_(sigma2) {}

    std::vector<Interval> phi_;
    Interval p_;
    Interval sigma2_;
};

struct FitConfig {
    /// Starting points per phi region: a moment-based seed plus (n_starts - 1) perturbations.
    int n_starts = 5;
    MinimizeOptions minimizer;
    /// A component closer than boundary_tol * width to a bound raises a boundary warning.
    double boundary_tol = 1e-4;
};

struct SandwichResult {
    Mat3 I_hat;  ///< (1/n) sum of score outer products
    Mat3 J_hat;  ///< (1/n) sum of term Hessians
    Mat3 cov;    ///< J^-1 I J^-1 / n
};

struct FitResult {
    explicit FitResult(SnarParams theta) : theta_hat(theta) {}

    SnarParams theta_hat;
    double neg_loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    Mat3 cov = Mat3::Constant(std::numeric_limits<double>::quiet_NaN());
    Vec3 se = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
    Mat3 I_hat = Mat3::Constant(std::numeric_limits<double>::quiet_NaN());
    Mat3 J_hat = Mat3::Constant(std::numeric_limits<double>::quiet_NaN());
    std::size_t n = 0;
    bool at_boundary = false;
    /// e.g. "boundary:p", "singular_hessian", "covariance_at_boundary".
    std::vector<std::string> warnings;
};

/// Quasi-maximum likelihood estimate over `space` with multi-start box-constrained
/// quasi-Newton minimization and sandwich covariance at the optimum.
/// Throws DegenerateError if n < 10 and OptimizationError if no start converges.
FitResult fit(std::span<const double> y, const ParamSpace& space = ParamSpace::default_space(),
              const FitConfig& config = {});

/// Moment-based starting values: p*phi from the regression of y_t on |y_{t-1}|, then
/// p(1-p)phi^2 and sigma2 from the regression of squared residuals on y_{t-1}^2.
Vec3 moment_start(std::span<const double> y);

/// Throws SingularMatrixError when cond(J_hat) exceeds 1e12.
SandwichResult sandwich_cov(const SnarParams& theta_hat, std::span<const double> y);

/// 100(1 - alpha)% interval for p from the delta method on g(p) = log((1 - p) / p),
/// with lambda_p = sqrt(n * cov_pp). Returned as (lower, upper) inside (0, 1).
std::pair<double, double> ci_p_delta(double p_hat, double lambda_p, std::size_t n, double alpha);

/// Wald interval theta_i +/- z_{1-alpha/2} * se_i.
std::pair<double, double> ci_wald(double estimate, double se, double alpha);

}  // namespace snar
