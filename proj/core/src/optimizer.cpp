#include "snar/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

#include "snar/errors.hpp"

namespace snar {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double u) {
    return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

// sigma(u) * (1 - sigma(u)) without cancellation.
double logistic_slope(double u) {
    const double e = std::exp(-std::fabs(u));
    return e / ((1.0 + e) * (1.0 + e));
}

// Interior reparametrization x(u) of the box.
class BoxTransform {
public:
    explicit BoxTransform(const Bounds& b) : b_(b) {
        const auto n = b.lower.size();
        lo_.resize(n);
        width_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (is_log(i)) {
                lo_[i] = std::log(b.lower[i]);
                width_[i] = std::log(b.upper[i]) - lo_[i];
            } else {
                lo_[i] = b.lower[i];
                width_[i] = b.upper[i] - b.lower[i];
            }
        }
    }

    VectorXd to_x(const VectorXd& u) const {
        VectorXd x(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const double v = lo_[i] + width_[i] * logistic(u[i]);
            x[i] = std::clamp(is_log(i) ? std::exp(v) : v, b_.lower[i], b_.upper[i]);
        }
        return x;
    }

    // dx_i / du_i.
    VectorXd jacobian(const VectorXd& u, const VectorXd& x) const {
        VectorXd j(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const double d = width_[i] * logistic_slope(u[i]);
            j[i] = is_log(i) ? x[i] * d : d;
        }
        return j;
    }

    VectorXd to_u(const VectorXd& x) const {
        VectorXd u(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double v = is_log(i) ? std::log(x[i]) : x[i];
            const double s = std::clamp((v - lo_[i]) / width_[i], 1e-9, 1.0 - 1e-9);
            u[i] = std::log(s / (1.0 - s));
        }
        return u;
    }

private:
    bool is_log(Eigen::Index i) const {
        return static_cast<std::size_t>(i) < b_.log_scale.size() && b_.log_scale[static_cast<std::size_t>(i)];
    }

    const Bounds& b_;
    VectorXd lo_;
    VectorXd width_;
};

// Objective evaluation that maps thrown domain errors and NaNs to +inf.
double safe_eval(const ValueGradientFn& f, const VectorXd& x, VectorXd* grad) {
    try {
        const double v = f(x, grad);
        if (!std::isfinite(v)) return kInf;
        if (grad != nullptr && !grad->allFinite()) return kInf;
        return v;
    } catch (const DomainError&) {
        return kInf;
    }
}

struct PhaseResult {
    VectorXd u;
    int iterations = 0;
    bool line_search_failed = false;
};

PhaseResult run_bfgs(const ValueGradientFn& f, const BoxTransform& tr, VectorXd u, const MinimizeOptions& opt) {
    const auto n = u.size();
    PhaseResult res;
    VectorXd x = tr.to_x(u);
    VectorXd gx(n);
    double fx = safe_eval(f, x, &gx);
    if (!std::isfinite(fx)) {
        res.u = u;
        res.line_search_failed = true;
        return res;
    }
    VectorXd g = gx.cwiseProduct(tr.jacobian(u, x));
    MatrixXd hinv = MatrixXd::Identity(n, n);
    bool scaled = false;

    for (int it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it + 1;
        if (g.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + std::fabs(fx))) break;

        VectorXd d = -hinv * g;
        if (d.dot(g) >= 0.0) {
            hinv.setIdentity();
            d = -g;
        }
        // Keep steepest-descent steps short until the inverse Hessian has been scaled.
        const double max_step = scaled ? 10.0 : 0.25;
        const double dmax = d.lpNorm<Eigen::Infinity>();
        double alpha = dmax > max_step ? max_step / dmax : 1.0;

        const double slope = g.dot(d);
        VectorXd u_new;
        VectorXd x_new;
        VectorXd gx_new(n);
        double f_new = kInf;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            u_new = u + alpha * d;
            x_new = tr.to_x(u_new);
            f_new = safe_eval(f, x_new, &gx_new);
            if (f_new <= fx + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            res.line_search_failed = (fx - f_new) < 0.0 || !std::isfinite(f_new);
            break;
        }

        const VectorXd g_new = gx_new.cwiseProduct(tr.jacobian(u_new, x_new));
        const VectorXd s = u_new - u;
        const VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            if (!scaled) {
                hinv *= sy / yv.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const MatrixXd eye = MatrixXd::Identity(n, n);
            hinv = (eye - rho * s * yv.transpose()) * hinv * (eye - rho * yv * s.transpose()) +
                   rho * s * s.transpose();
        }

        const bool small_step = (x_new - x).norm() < opt.step_tol * (1.0 + x.norm());
        const bool flat = std::fabs(fx - f_new) <= 1e-15 * (1.0 + std::fabs(fx));
        u = u_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if (small_step || flat) break;
    }
    res.u = u;
    return res;
}

PhaseResult run_simplex(const ValueGradientFn& f, const BoxTransform& tr, const VectorXd& u0, int max_iter) {
    const auto n = u0.size();
    std::vector<VectorXd> pts(static_cast<std::size_t>(n + 1), u0);
    std::vector<double> vals(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)][i] += 0.5;
    auto eval = [&](const VectorXd& u) { return safe_eval(f, tr.to_x(u), nullptr); };
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = eval(pts[i]);

    PhaseResult res;
    std::vector<std::size_t> order(pts.size());
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];

        double size = 0.0;
        for (const auto& p : pts) size = std::max(size, (p - pts[best]).lpNorm<Eigen::Infinity>());
        if (std::fabs(vals[worst] - vals[best]) <= 1e-14 * (1.0 + std::fabs(vals[best])) && size < 1e-9) break;

        VectorXd centroid = VectorXd::Zero(n);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i != worst) centroid += pts[i];
        }
        centroid /= static_cast<double>(n);

        const VectorXd refl = centroid + (centroid - pts[worst]);
        const double f_refl = eval(refl);
        if (f_refl < vals[best]) {
            const VectorXd expd = centroid + 2.0 * (centroid - pts[worst]);
            const double f_exp = eval(expd);
            if (f_exp < f_refl) {
                pts[worst] = expd;
                vals[worst] = f_exp;
            } else {
                pts[worst] = refl;
                vals[worst] = f_refl;
            }
        } else if (f_refl < vals[second]) {
            pts[worst] = refl;
            vals[worst] = f_refl;
        } else {
            const VectorXd contr = centroid + 0.5 * (pts[worst] - centroid);
            const double f_con = eval(contr);
            if (f_con < vals[worst]) {
                pts[worst] = contr;
                vals[worst] = f_con;
            } else {
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    if (i == best) continue;
                    pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
                    vals[i] = eval(pts[i]);
                }
            }
        }
    }
    const auto best_it = std::min_element(vals.begin(), vals.end());
    res.u = pts[static_cast<std::size_t>(best_it - vals.begin())];
    return res;
}

VectorXd clamp_to(const VectorXd& x, const Bounds& b) {
    return x.cwiseMax(b.lower).cwiseMin(b.upper);
}

struct PolishResult {
    VectorXd x;
    int iterations = 0;
};

PolishResult run_projected_newton(const ValueGradientFn& f, const HessianFn& hessian, VectorXd x,
                                  const Bounds& b, const MinimizeOptions& opt) {
    const auto n = x.size();
    PolishResult res;
    VectorXd g(n);
    double fx = safe_eval(f, x, &g);
    for (int it = 0; it < 100 && std::isfinite(fx); ++it) {
        res.iterations = it + 1;

        // Pin coordinates that sit next to a bound and are pushed against it.
        std::vector<bool> active(static_cast<std::size_t>(n), false);
        bool snapped = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double eps = 1e-7 * (b.upper[i] - b.lower[i]);
            if (x[i] - b.lower[i] <= eps && g[i] > 0.0) {
                active[static_cast<std::size_t>(i)] = true;
                snapped |= x[i] != b.lower[i];
                x[i] = b.lower[i];
            } else if (b.upper[i] - x[i] <= eps && g[i] < 0.0) {
                active[static_cast<std::size_t>(i)] = true;
                snapped |= x[i] != b.upper[i];
                x[i] = b.upper[i];
            }
        }
        if (snapped) {
            const double f_snap = safe_eval(f, x, &g);
            if (!std::isfinite(f_snap)) break;
            fx = f_snap;
        }

        const VectorXd pg = projected_gradient(x, g, b);
        if (pg.norm() < opt.grad_tol * (1.0 + std::fabs(fx))) break;

        std::vector<Eigen::Index> free_idx;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!active[static_cast<std::size_t>(i)]) free_idx.push_back(i);
        }
        if (free_idx.empty()) break;
        const auto m = static_cast<Eigen::Index>(free_idx.size());

        const MatrixXd h = hessian(x);
        MatrixXd hff(m, m);
        VectorXd gf(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            gf[r] = g[free_idx[static_cast<std::size_t>(r)]];
            for (Eigen::Index c = 0; c < m; ++c) {
                hff(r, c) = h(free_idx[static_cast<std::size_t>(r)], free_idx[static_cast<std::size_t>(c)]);
            }
        }
        VectorXd df;
        Eigen::LLT<MatrixXd> llt(hff);
        if (llt.info() == Eigen::Success) {
            df = llt.solve(-gf);
        }
        if (df.size() != m || !df.allFinite() || df.dot(gf) >= 0.0) {
            const double scale = std::max(1.0, hff.diagonal().cwiseAbs().maxCoeff());
            df = -gf / scale;
        }
        VectorXd d = VectorXd::Zero(n);
        for (Eigen::Index r = 0; r < m; ++r) d[free_idx[static_cast<std::size_t>(r)]] = df[r];

        double alpha = 1.0;
        bool accepted = false;
        VectorXd x_new;
        VectorXd g_new(n);
        double f_new = kInf;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = clamp_to(x + alpha * d, b);
            f_new = safe_eval(f, x_new, &g_new);
            if (f_new <= fx + 1e-4 * g.dot(x_new - x)) {
                accepted = true;
                break;
            }
            // Near the optimum the decrease falls below the resolution of f; fall back to the gradient.
            if (std::fabs(f_new - fx) <= 1e-12 * (1.0 + std::fabs(fx)) &&
                projected_gradient(x_new, g_new, b).norm() < pg.norm()) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
        const bool small_step = (x_new - x).norm() < opt.step_tol * (1.0 + x.norm());
        x = x_new;
        fx = f_new;
        g = g_new;
        if (small_step) break;
    }
    res.x = x;
    return res;
}

}  // namespace

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& grad, const Bounds& bounds) {
    VectorXd pg = grad;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if ((x[i] <= bounds.lower[i] && grad[i] > 0.0) || (x[i] >= bounds.upper[i] && grad[i] < 0.0)) {
            pg[i] = 0.0;
        }
    }
    return pg;
}

MinimizeResult minimize_box(const ValueGradientFn& f, const HessianFn& hessian, const Eigen::VectorXd& x0,
                            const Bounds& bounds, const MinimizeOptions& options) {
    const auto n = x0.size();
    if (bounds.lower.size() != n || bounds.upper.size() != n) {
        throw DomainError("bounds dimension does not match the starting point");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(bounds.lower[i] < bounds.upper[i]) || !std::isfinite(bounds.lower[i]) ||
            !std::isfinite(bounds.upper[i])) {
            throw DomainError("bounds must be finite with lower < upper");
        }
    }

    const BoxTransform tr(bounds);
    MinimizeResult out;

    PhaseResult phase = run_bfgs(f, tr, tr.to_u(x0), options);
    out.iterations = phase.iterations;
    if (phase.line_search_failed) {
        const PhaseResult nm = run_simplex(f, tr, phase.u, 200 * static_cast<int>(n * n));
        out.iterations += nm.iterations;
        out.used_simplex = true;
        phase.u = nm.u;
    }
    VectorXd x = tr.to_x(phase.u);

    if (hessian) {
        const PolishResult pol = run_projected_newton(f, hessian, x, bounds, options);
        out.iterations += pol.iterations;
        x = pol.x;
    }

    VectorXd g(n);
    const double fx = safe_eval(f, x, &g);
    out.x = x;
    out.f = fx;
    out.gradient = g;
    if (std::isfinite(fx)) {
        out.projected_grad_norm = projected_gradient(x, g, bounds).norm();
        out.converged = out.projected_grad_norm < options.grad_tol * (1.0 + std::fabs(fx));
    } else {
        out.projected_grad_norm = kInf;
        out.converged = false;
    }
    return out;
}

}  // namespace snar
