#include "snar/qmle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "snar/errors.hpp"
#include "snar/special.hpp"

namespace snar {

namespace {

constexpr double kConditionGuard = 1e12;

void check_interval(const Interval& iv, const char* name) {
    if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper) || !(iv.lower < iv.upper)) {
        throw DomainError(std::string(name) + " bounds must be finite with lower < upper");
    }
}

double clamp_inside(double v, const Interval& iv, double margin = 1e-3) {
    const double m = margin * iv.width();
    return std::clamp(v, iv.lower + m, iv.upper - m);
}

double clamp_inside_log(double v, const Interval& iv) {
    const double lo = std::log(iv.lower);
    const double hi = std::log(iv.upper);
    const double m = 1e-3 * (hi - lo);
    const double lv = std::log(std::max(v, iv.lower));
    return std::exp(std::clamp(lv, lo + m, hi - m));
}

std::vector<Vec3> starting_points(std::span<const double> y, const Interval& phi_region, const ParamSpace& space,
                                  int n_starts) {
    const Vec3 mom = moment_start(y);
    const double sign = phi_region.upper < 0.0 ? -1.0 : 1.0;
    const double pphi = std::fabs(mom[kPhi] * mom[kP]);
    const double s2 = mom[kSigma2];
    double resid_var = 0.0;
    for (std::size_t t = 1; t < y.size(); ++t) {
        const double e = y[t] - pphi * std::fabs(y[t - 1]);
        resid_var += e * e;
    }
    resid_var /= static_cast<double>(y.size() - 1);

    std::vector<Vec3> raw = {
        mom,
        Vec3(pphi / 0.5, 0.5, s2),
        Vec3(pphi / 0.9, 0.9, resid_var),
        Vec3(pphi / 0.97, 0.97, s2),
        Vec3(mom[kPhi] * 0.8, 0.5 * (mom[kP] + 0.5), resid_var),
    };
    for (int i = static_cast<int>(raw.size()); i < n_starts; ++i) {
        const double f = 0.6 + 0.1 * (i % 9);
        raw.emplace_back(mom[kPhi] * f, std::fmod(0.13 * i + mom[kP], 1.0), s2 * (0.5 + 0.25 * (i % 5)));
    }
    raw.resize(static_cast<std::size_t>(std::max(1, n_starts)));

    std::vector<Vec3> out;
    out.reserve(raw.size());
    for (const Vec3& r : raw) {
        Vec3 v;
        v[kPhi] = clamp_inside(sign * std::fabs(r[kPhi]), phi_region);
        v[kP] = clamp_inside(r[kP], space.p());
        v[kSigma2] = clamp_inside_log(r[kSigma2], space.sigma2());
        out.push_back(v);
    }
    return out;
}

bool near_bound(double v, const Interval& iv, double tol) {
    const double m = tol * iv.width();
    return v - iv.lower <= m || iv.upper - v <= m;
}

bool near_bound_log(double v, const Interval& iv, double tol) {
    const double lo = std::log(iv.lower);
    const double hi = std::log(iv.upper);
    const double lv = std::log(v);
    const double m = tol * (hi - lo);
    return lv - lo <= m || hi - lv <= m;
}

}  // namespace

ParamSpace ParamSpace::make(std::vector<Interval> phi_regions, Interval p, Interval sigma2) {
    if (phi_regions.empty() || phi_regions.size() > 2) {
        throw DomainError("phi bounds must be one or two intervals");
    }
    for (const Interval& iv : phi_regions) {
        check_interval(iv, "phi");
        if (iv.lower <= 0.0 && iv.upper >= 0.0) {
            throw DomainError("phi bounds must exclude 0");
        }
    }
    check_interval(p, "p");
    check_interval(sigma2, "sigma2");
    if (p.lower <= 0.0 || p.upper >= 1.0) {
        throw DomainError("p bounds must lie inside (0, 1)");
    }
    if (sigma2.lower <= 0.0) {
        throw DomainError("sigma2 bounds must lie inside (0, inf)");
    }
    return ParamSpace(std::move(phi_regions), p, sigma2);
}

ParamSpace ParamSpace::default_space(bool allow_negative_phi) {
    std::vector<Interval> phi = {{0.05, 3.0}};
    if (allow_negative_phi) phi.push_back({-3.0, -0.05});
    return make(std::move(phi), {0.01, 0.999}, {1e-6, 1e6});
}

bool ParamSpace::contains(const SnarParams& theta) const noexcept {
    const bool phi_ok = std::any_of(phi_.begin(), phi_.end(), [&](const Interval& iv) { return iv.contains(theta.phi()); });
    return phi_ok && p_.contains(theta.p()) && sigma2_.contains(theta.sigma2());
}

Vec3 moment_start(std::span<const double> y) {
    const std::size_t n = y.size() - 1;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t t = 1; t <= n; ++t) {
        const double a = std::fabs(y[t - 1]);
        sxy += y[t] * a;
        sxx += a * a;
    }
    const double b = sxx > 0.0 ? sxy / sxx : 0.0;

    // Regress e_t^2 on (1, y_{t-1}^2).
    double m_x = 0.0;
    double m_e = 0.0;
    for (std::size_t t = 1; t <= n; ++t) {
        const double a2 = y[t - 1] * y[t - 1];
        const double e = y[t] - b * std::fabs(y[t - 1]);
        m_x += a2;
        m_e += e * e;
    }
    m_x /= static_cast<double>(n);
    m_e /= static_cast<double>(n);
    double cxx = 0.0;
    double cxe = 0.0;
    for (std::size_t t = 1; t <= n; ++t) {
        const double a2 = y[t - 1] * y[t - 1];
        const double e = y[t] - b * std::fabs(y[t - 1]);
        cxx += (a2 - m_x) * (a2 - m_x);
        cxe += (a2 - m_x) * (e * e - m_e);
    }
    double slope = cxx > 0.0 ? cxe / cxx : 0.0;
    slope = std::max(slope, 0.0);
    double intercept = m_e - slope * m_x;
    // A tiny intercept leaves the optimizer far from the likelihood's bulk.
    intercept = std::max(intercept, 0.1 * m_e);
    if (!(intercept > 0.0)) intercept = 1e-6;

    double p = 0.5;
    if (b * b + slope > 0.0) p = b * b / (b * b + slope);
    p = std::clamp(p, 0.05, 0.98);
    const double phi = b / p;
    return {phi, p, intercept};
}

FitResult fit(std::span<const double> y, const ParamSpace& space, const FitConfig& config) {
    if (y.size() < 11) {
        throw DegenerateError("fit requires n >= 10 observations after y_0");
    }
    const QuasiLikelihood ql(y);

    const ValueGradientFn objective = [&ql](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        const Vec3 theta(x[0], x[1], x[2]);
        if (grad == nullptr) return ql.value(theta);
        Vec3 g;
        const double v = ql.value_and_gradient(theta, g);
        *grad = g;
        return v;
    };
    const HessianFn hess = [&ql](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        return ql.hessian(Vec3(x[0], x[1], x[2]));
    };

    bool have_best = false;
    MinimizeResult best;
    Interval best_region;
    for (const Interval& region : space.phi_regions()) {
        Bounds bounds;
        bounds.lower = Eigen::Vector3d(region.lower, space.p().lower, space.sigma2().lower);
        bounds.upper = Eigen::Vector3d(region.upper, space.p().upper, space.sigma2().upper);
        bounds.log_scale = {false, false, true};
        for (const Vec3& start : starting_points(y, region, space, config.n_starts)) {
            MinimizeResult r = minimize_box(objective, hess, start, bounds, config.minimizer);
            if (!r.converged) continue;
            if (!have_best || r.f < best.f) {
                best = std::move(r);
                best_region = region;
                have_best = true;
            }
        }
    }
    if (!have_best) {
        throw OptimizationError("no starting point converged");
    }

    FitResult result(validate_params(best.x[0], best.x[1], best.x[2]));
    result.neg_loglik = best.f;
    result.converged = best.converged;
    result.iterations = best.iterations;
    result.n = ql.n();

    const double tol = config.boundary_tol;
    if (near_bound(best.x[0], best_region, tol)) result.warnings.emplace_back("boundary:phi");
    if (near_bound(best.x[1], space.p(), tol)) result.warnings.emplace_back("boundary:p");
    if (near_bound_log(best.x[2], space.sigma2(), tol)) result.warnings.emplace_back("boundary:sigma2");
    result.at_boundary = !result.warnings.empty();

    try {
        const SandwichResult sw = sandwich_cov(result.theta_hat, y);
        result.I_hat = sw.I_hat;
        result.J_hat = sw.J_hat;
        result.cov = sw.cov;
        result.se = sw.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
        if (result.at_boundary) result.warnings.emplace_back("covariance_at_boundary");
    } catch (const SingularMatrixError&) {
        result.warnings.emplace_back("singular_hessian");
    }
    return result;
}

SandwichResult sandwich_cov(const SnarParams& theta_hat, std::span<const double> y) {
    const QuasiLikelihood ql(y);
    const Vec3 theta = as_vector(theta_hat);
    const double n = static_cast<double>(ql.n());

    Mat3 info = Mat3::Zero();
    Mat3 hess = Mat3::Zero();
    for (std::size_t t = 1; t <= ql.n(); ++t) {
        const Vec3 g = ql.term_gradient(theta, t);
        info += g * g.transpose();
        hess += ql.term_hessian(theta, t);
    }
    SandwichResult out;
    out.I_hat = info / n;
    out.J_hat = hess / n;

    const Eigen::SelfAdjointEigenSolver<Mat3> eig(out.J_hat);
    const Vec3 abs_ev = eig.eigenvalues().cwiseAbs();
    if (!(abs_ev.minCoeff() > 0.0) || abs_ev.maxCoeff() / abs_ev.minCoeff() > kConditionGuard) {
        throw SingularMatrixError("average Hessian J_hat is numerically singular");
    }
    const Mat3 j_inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                       eig.eigenvectors().transpose();
    const Mat3 cov = j_inv * out.I_hat * j_inv / n;
    out.cov = 0.5 * (cov + cov.transpose());
    return out;
}

std::pair<double, double> ci_p_delta(double p_hat, double lambda_p, std::size_t n, double alpha) {
    if (!(p_hat > 0.0 && p_hat < 1.0)) throw DomainError("p_hat must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(lambda_p >= 0.0) || !std::isfinite(lambda_p)) throw DomainError("lambda_p must be finite and >= 0");
    if (n == 0) throw DomainError("n must be positive");

    const double g = std::log((1.0 - p_hat) / p_hat);
    const double z = normal_quantile(alpha / 2.0);  // lower alpha/2 quantile (negative)
    const double h = lambda_p * z / (std::sqrt(static_cast<double>(n)) * p_hat * (1.0 - p_hat));
    const double e1 = 1.0 / (1.0 + std::exp(g - h));
    const double e2 = 1.0 / (1.0 + std::exp(g + h));
    return {std::min(e1, e2), std::max(e1, e2)};
}

std::pair<double, double> ci_wald(double estimate, double se, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    const double z = normal_quantile(1.0 - alpha / 2.0);
    return {estimate - z * se, estimate + z * se};
}

}  // namespace snar
