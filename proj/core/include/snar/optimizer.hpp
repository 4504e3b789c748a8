#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace snar {

/// Box constraints lower <= x <= upper. Coordinates flagged `log_scale` are
/// mapped through log before the interior transform (they must have lower > 0).
struct Bounds {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::vector<bool> log_scale;
};

struct MinimizeOptions {
    /// Converged when ||projected gradient|| < grad_tol * (1 + |f|).
    double grad_tol = 1e-8;
    /// Iterations stop once ||x_{k+1} - x_k|| < step_tol * (1 + ||x_k||).
    double step_tol = 1e-10;
    int max_iterations = 500;
};

struct MinimizeResult {
    Eigen::VectorXd x;
    double f = 0.0;
    Eigen::VectorXd gradient;
    double projected_grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    /// True when the quasi-Newton phase failed and the simplex fallback ran.
    bool used_simplex = false;
};

/// Objective returning f(x) and, when `grad` is non-null, writing the gradient.
using ValueGradientFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;
using HessianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd& x)>;

/// Minimizes f over a box.
///
/// Phase 1 runs BFGS on unconstrained coordinates u with x = lower + (upper - lower) * logistic(u)
/// (on log(x) for log-scale coordinates), so iterates stay strictly inside the box. If the
/// line search cannot make progress, a Nelder-Mead simplex continues from the current point.
/// Phase 2, when a Hessian is supplied, polishes with projected Newton steps in the original
/// coordinates; coordinates whose gradient pushes against a bound are pinned to it.
MinimizeResult minimize_box(const ValueGradientFn& f, const HessianFn& hessian, const Eigen::VectorXd& x0,
                            const Bounds& bounds, const MinimizeOptions& options = {});

/// Gradient with components zeroed where x sits on a bound and the gradient points outward.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& grad, const Bounds& bounds);

}  // namespace snar
