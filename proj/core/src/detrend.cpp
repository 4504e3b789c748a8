#include "snar/detrend.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "snar/errors.hpp"

namespace snar {

namespace {

// OLS of v_t on (1, t) over t = first..last (1-based, inclusive).
std::pair<double, double> ols_line(std::span<const double> v, std::size_t first) {
    const std::size_t m = v.size();
    double t_mean = 0.0;
    double v_mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        t_mean += static_cast<double>(first + i);
        v_mean += v[i];
    }
    t_mean /= static_cast<double>(m);
    v_mean /= static_cast<double>(m);
    double stt = 0.0;
    double stv = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dt = static_cast<double>(first + i) - t_mean;
        stt += dt * dt;
        stv += dt * (v[i] - v_mean);
    }
    const double b1 = stv / stt;
    return {v_mean - b1 * t_mean, b1};
}

}  // namespace

std::vector<double> remove_trend(std::span<const double> x, double b0, double b1) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - b0 - b1 * static_cast<double>(i + 1);
    return y;
}

DetrendResult detrend(std::span<const double> x) {
    if (x.size() < 3) throw DegenerateError("detrending needs at least 3 observations");
    DetrendResult r;
    std::tie(r.b0, r.b1) = ols_line(x, 1);
    r.y = remove_trend(x, r.b0, r.b1);
    return r;
}

namespace {

JointDetrendResult alternate(std::span<const double> x, DetrendResult trend, const ParamSpace& space,
                             const FitConfig& config, const JointDetrendOptions& options) {
    FitResult current = fit(trend.y, space, config);
    int rounds = 0;
    bool converged = false;
    std::vector<double> w(x.size() - 1);
    while (rounds < options.max_rounds) {
        ++rounds;
        const double m = current.theta_hat.p() * current.theta_hat.phi();
        for (std::size_t i = 1; i < x.size(); ++i) w[i - 1] = x[i] - m * std::fabs(trend.y[i - 1]);
        const auto [b0, b1] = ols_line(w, 2);
        const bool small = std::fabs(b0 - trend.b0) < options.tol * (1.0 + std::fabs(trend.b0)) &&
                           std::fabs(b1 - trend.b1) < options.tol * (1.0 + std::fabs(trend.b1));
        trend.b0 = b0;
        trend.b1 = b1;
        trend.y = remove_trend(x, b0, b1);
        current = fit(trend.y, space, config);
        if (small) {
            converged = true;
            break;
        }
    }
    return {std::move(trend), std::move(current), rounds, converged};
}

}  // namespace

JointDetrendResult joint_detrend_fit(std::span<const double> x, const ParamSpace& space, const FitConfig& config,
                                     const JointDetrendOptions& options) {
    const DetrendResult ols = detrend(x);
    double ss = 0.0;
    for (double v : ols.y) ss += v * v;
    const double sd = std::sqrt(ss / static_cast<double>(ols.y.size()));

    std::optional<JointDetrendResult> best;
    std::string last_error = "no starting intercepts";
    for (double k : options.b0_offsets) {
        DetrendResult start{ols.b0 + k * sd, ols.b1, remove_trend(x, ols.b0 + k * sd, ols.b1)};
        try {
            JointDetrendResult r = alternate(x, std::move(start), space, config, options);
            if (!best || r.fit.neg_loglik < best->fit.neg_loglik) best.emplace(std::move(r));
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    if (!best) throw OptimizationError("joint detrending failed: " + last_error);
    return std::move(*best);
}

}  // namespace snar
