#include "snar/montecarlo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/LU>

#include "format.hpp"
#include "json.hpp"
#include "snar/errors.hpp"
#include "snar/special.hpp"

namespace snar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed streams. Replication r of sample size n uses derive_seed(master, n, r) in every
// study, so studies sharing a master seed and n see the same simulated paths.
constexpr std::uint64_t kAsdStream = 0xA5D0000000000000ULL;
constexpr std::uint64_t kArStream = 0xA100000000000000ULL;
constexpr std::uint64_t kTheoryStream = 0x7E00000000000000ULL;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

void check_failures(std::size_t failures, std::size_t reps, const char* what) {
    if (static_cast<double>(failures) > kMaxFailureFraction * static_cast<double>(reps)) {
        throw StudyError(std::string(what) + ": " + std::to_string(failures) + " of " + std::to_string(reps) +
                         " replications failed (limit 1%)");
    }
}

SimulatedPath simulate_rep(const StudyConfig& c, std::size_t n, std::size_t rep) {
    SimulationOptions opts;
    opts.burn_in = c.burn_in;
    return simulate(c.theta0, n, c.family, derive_seed(c.master_seed, n, rep), opts);
}

std::vector<double> simulate_ar1(double coef, const InnovationFamily& family, std::size_t n, std::size_t burn_in,
                                 std::uint64_t seed) {
    Rng rng(seed);
    double v = 0.0;
    for (std::size_t t = 0; t < burn_in; ++t) v = coef * v + family.sample(rng);
    std::vector<double> y(n + 1);
    y[0] = v;
    for (std::size_t t = 1; t <= n; ++t) y[t] = coef * y[t - 1] + family.sample(rng);
    return y;
}

std::optional<Vec3> fit_rep(const StudyConfig& c, std::span<const double> y) {
    try {
        return as_vector(fit(y, c.space, c.fit).theta_hat);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::string csv_num(double v) { return detail::fmt17(v); }

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

}  // namespace

std::string_view to_string(StudyKind kind) {
    switch (kind) {
        case StudyKind::Estimation: return "estimation";
        case StudyKind::Normality: return "normality";
        case StudyKind::Size: return "size";
        case StudyKind::Tagging: return "tagging";
    }
    return "estimation";
}

StudyKind parse_study_kind(std::string_view name) {
    const std::string s = lower(name);
    if (s == "estimation") return StudyKind::Estimation;
    if (s == "normality") return StudyKind::Normality;
    if (s == "size") return StudyKind::Size;
    if (s == "tagging") return StudyKind::Tagging;
    throw DomainError("unknown study kind: " + std::string(name));
}

void StudyConfig::use_full_scale() {
    reps = 1000;
    asd_reps = 2000;
}

void StudyConfig::validate() const {
    if (reps < 1) throw DomainError("reps must be at least 1");
    if (n_list.empty()) throw DomainError("n list must not be empty");
    for (std::size_t n : n_list) {
        if (n < 50) throw DomainError("every sample size must be at least 50");
    }
    if (bins < 1) throw DomainError("bins must be at least 1");
    if (asd_reps < 1 || asd_length < 50) throw DomainError("ASD needs reps >= 1 and length >= 50");
    for (int m : M_list) {
        if (m < 1) throw DomainError("M must be at least 1");
    }
    for (double a : alphas) {
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
    }
    if (methods.empty()) throw DomainError("tagging method list must not be empty");
}

std::string StudyConfig::canonical() const {
    std::ostringstream os;
    os << "kind=" << to_string(kind) << "\n"
       << "phi=" << csv_num(theta0.phi()) << "\np=" << csv_num(theta0.p()) << "\nsigma2=" << csv_num(theta0.sigma2())
       << "\ninnovation=" << to_string(family.kind()) << "\nn=" << join_sizes(n_list) << "\nreps=" << reps
       << "\nseed=" << master_seed << "\nburn_in=" << burn_in << "\n";
    os << "phi_bounds=";
    for (const Interval& iv : space.phi_regions()) os << "[" << csv_num(iv.lower) << "," << csv_num(iv.upper) << "]";
    os << "\np_bounds=[" << csv_num(space.p().lower) << "," << csv_num(space.p().upper) << "]"
       << "\nsigma2_bounds=[" << csv_num(space.sigma2().lower) << "," << csv_num(space.sigma2().upper) << "]"
       << "\nn_starts=" << fit.n_starts << "\nasd_reps=" << asd_reps << "\nasd_length=" << asd_length
       << "\nasd_at=" << (asd_at == AsdAt::Theta0 ? "theta0" : "theta_hat") << "\nbins=" << bins << "\nM=";
    for (std::size_t i = 0; i < M_list.size(); ++i) os << (i ? "," : "") << M_list[i];
    os << "\ntuning=" << to_string(tuning) << "\nalphas=";
    for (std::size_t i = 0; i < alphas.size(); ++i) os << (i ? "," : "") << csv_num(alphas[i]);
    os << "\ndgp=" << (dgp == SizeDgp::Snar ? "snar" : "ar1") << "\nar_coef=" << csv_num(ar_coef) << "\nmethods=";
    for (std::size_t i = 0; i < methods.size(); ++i) os << (i ? "," : "") << to_string(methods[i]);
    os << "\ncalibrate_all=" << calibrate_all << "\nrule4_reversed=" << rule4_reversed << "\n";
    return os.str();
}

AsdResult run_asd(const SnarParams& theta0, const InnovationFamily& family, std::size_t target_n,
                  std::uint64_t master_seed, const AsdOptions& options) {
    if (target_n == 0) throw DomainError("target_n must be positive");
    if (options.reps == 0) throw DomainError("ASD needs at least one replication");
    const auto per_rep = parallel_map(options.reps, options.workers, [&](std::size_t r) -> std::optional<Vec3> {
        SimulationOptions sim;
        sim.burn_in = options.burn_in;
        const SimulatedPath path =
            simulate(theta0, options.length, family, derive_seed(master_seed, kAsdStream + options.length, r), sim);
        try {
            const SnarParams at = options.at == AsdAt::Theta0 ? theta0 : fit(path.y).theta_hat;
            const SandwichResult sw = sandwich_cov(at, path.y);
            return (sw.cov.diagonal() * static_cast<double>(path.n())).cwiseMax(0.0).cwiseSqrt().eval();
        } catch (const Error&) {
            return std::nullopt;
        }
    });
    AsdResult out;
    for (const auto& v : per_rep) {
        if (v) {
            out.unit += *v;
            ++out.used;
        } else {
            ++out.skipped;
        }
    }
    if (out.used == 0) throw StudyError("every ASD replication failed");
    out.unit /= static_cast<double>(out.used);
    out.asd = out.unit / std::sqrt(static_cast<double>(target_n));
    return out;
}

TheoreticalInfo theoretical_information(const SnarParams& theta0, const InnovationFamily& family,
                                        std::size_t path_length, std::uint64_t seed) {
    const SimulatedPath path = simulate(theta0, path_length, family, derive_seed(seed, kTheoryStream, 0));
    const double phi = theta0.phi();
    const double p = theta0.p();
    const double s2 = theta0.sigma2();
    const double pq = p * (1.0 - p);
    const double k3 = family.third_moment();
    const double k4 = family.fourth_moment();
    const Vec3 mean_grad(p, phi, 0.0);
    const Mat3 D = mean_grad * mean_grad.transpose();

    Mat3 I = Mat3::Zero();
    Mat3 J = Mat3::Zero();
    for (std::size_t t = 1; t <= path.n(); ++t) {
        const double a = std::fabs(path.y[t - 1]);
        const double a2 = a * a;
        const double q = pq * phi * phi * a2 + s2;
        const Vec3 dq(2.0 * pq * phi * a2, (1.0 - 2.0 * p) * phi * phi * a2, 1.0);
        const Mat3 A = dq * dq.transpose();
        const Mat3 B = dq * mean_grad.transpose() + mean_grad * dq.transpose();
        // E[e^4] - q^2 and E[e^3] for e = (s - p) phi a + eps given y_{t-1}
        const double excess4 = pq * (1.0 - 2.0 * p) * (1.0 - 2.0 * p) * phi * phi * phi * phi * a2 * a2 +
                               4.0 * s2 * pq * phi * phi * a2 + (k4 - s2 * s2);
        const double m3 = pq * (1.0 - 2.0 * p) * phi * phi * phi * a2 * a + k3;
        J += A / (q * q) + (2.0 * a2 / q) * D;
        I += (excess4 / (q * q * q * q)) * A + (4.0 * a2 / q) * D + (2.0 * a * m3 / (q * q * q)) * B;
    }
    const double n = static_cast<double>(path.n());
    TheoreticalInfo out;
    out.I = I / n;
    out.J = J / n;
    const Mat3 j_inv = out.J.inverse();
    out.unit_sd = (j_inv * out.I * j_inv).diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

EstimationStudy run_estimation_study(const StudyConfig& config) {
    config.validate();
    EstimationStudy out;
    AsdOptions asd_opts;
    asd_opts.reps = config.asd_reps;
    asd_opts.length = config.asd_length;
    asd_opts.at = config.asd_at;
    asd_opts.workers = config.workers;
    asd_opts.burn_in = config.burn_in;
    out.asd_unit = run_asd(config.theta0, config.family, 1, config.master_seed, asd_opts);

    const Vec3 theta0 = as_vector(config.theta0);
    static const char* const kNames[3] = {"phi", "p", "sigma2"};
    for (std::size_t n : config.n_list) {
        const auto fits = parallel_map(config.reps, config.workers, [&](std::size_t r) {
            const SimulatedPath path = simulate_rep(config, n, r);
            return fit_rep(config, path.y);
        });
        std::vector<Vec3> est;
        for (const auto& f : fits) {
            if (f) est.push_back(*f);
        }
        const std::size_t failures = config.reps - est.size();
        check_failures(failures, config.reps, "estimation study");
        out.failures.push_back(failures);

        Vec3 mean = Vec3::Zero();
        for (const Vec3& e : est) mean += e;
        mean /= static_cast<double>(est.size());
        Vec3 ss = Vec3::Zero();
        for (const Vec3& e : est) ss += (e - mean).cwiseAbs2();
        for (int i = 0; i < 3; ++i) {
            EstimationRow row;
            row.n = n;
            row.parameter = kNames[i];
            row.bias = mean[i] - theta0[i];
            row.esd = est.size() > 1 ? std::sqrt(ss[i] / static_cast<double>(est.size() - 1)) : kNaN;
            row.asd = out.asd_unit.unit[i] / std::sqrt(static_cast<double>(n));
            out.rows.push_back(row);
        }
        out.estimates.push_back(std::move(est));
    }
    return out;
}

double ks_distance_normal(std::vector<double> values) {
    if (values.empty()) throw DomainError("KS distance of an empty sample");
    std::sort(values.begin(), values.end());
    const double m = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double F = normal_cdf(values[i]);
        d = std::max({d, static_cast<double>(i + 1) / m - F, F - static_cast<double>(i) / m});
    }
    return d;
}

NormalityStudy run_normality_study(const StudyConfig& config) {
    StudyConfig single = config;
    single.n_list = {config.n_list.front()};
    const EstimationStudy est = run_estimation_study(single);

    NormalityStudy out;
    out.n = single.n_list.front();
    out.failures = est.failures.front();
    const double root_n = std::sqrt(static_cast<double>(out.n));
    out.asd = est.asd_unit.unit[kPhi] / root_n;
    for (const Vec3& e : est.estimates.front()) out.root_n_err.push_back(root_n * (e[kPhi] - config.theta0.phi()));

    const auto [lo_it, hi_it] = std::minmax_element(out.root_n_err.begin(), out.root_n_err.end());
    const double lo = *lo_it;
    const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
    const auto bins = static_cast<std::size_t>(config.bins);
    const double width = (hi - lo) / static_cast<double>(bins);
    out.counts.assign(bins, 0);
    for (std::size_t b = 0; b <= bins; ++b) out.bin_edges.push_back(lo + width * static_cast<double>(b));
    out.bin_edges.back() = hi;
    for (double v : out.root_n_err) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        out.counts[std::min(b, bins - 1)] += 1;
    }
    const double scale = est.asd_unit.unit[kPhi];
    const double m = static_cast<double>(out.root_n_err.size());
    for (std::size_t b = 0; b < bins; ++b) {
        out.overlay.push_back(m * (normal_cdf(out.bin_edges[b + 1] / scale) - normal_cdf(out.bin_edges[b] / scale)));
    }
    std::vector<double> z;
    z.reserve(out.root_n_err.size());
    for (double v : out.root_n_err) z.push_back(v / scale);
    out.ks = ks_distance_normal(std::move(z));
    return out;
}

SizeStudy run_size_study(const StudyConfig& config) {
    config.validate();
    SizeStudy out;
    for (std::size_t n : config.n_list) {
        const auto pvals = parallel_map(config.reps, config.workers, [&](std::size_t r) -> std::optional<std::vector<double>> {
            std::vector<double> y;
            if (config.dgp == SizeDgp::Snar) {
                y = simulate_rep(config, n, r).y;
            } else {
                y = simulate_ar1(config.ar_coef, config.family, n, config.burn_in,
                                 derive_seed(config.master_seed, kArStream + n, r));
            }
            try {
                const FitResult f = fit(y, config.space, config.fit);
                std::vector<double> pv;
                for (int M : config.M_list) pv.push_back(q_statistic(y, f, M, config.tuning).p_value);
                return pv;
            } catch (const Error&) {
                return std::nullopt;
            }
        });
        std::size_t used = 0;
        for (const auto& v : pvals) used += v.has_value();
        const std::size_t failures = config.reps - used;
        check_failures(failures, config.reps, "size study");
        out.failures.push_back(failures);
        for (std::size_t j = 0; j < config.M_list.size(); ++j) {
            for (double alpha : config.alphas) {
                std::size_t rejected = 0;
                for (const auto& v : pvals) {
                    if (v && (*v)[j] < alpha) ++rejected;
                }
                out.rows.push_back({n, config.M_list[j], alpha,
                                    used > 0 ? static_cast<double>(rejected) / static_cast<double>(used) : kNaN, used});
            }
        }
    }
    return out;
}

TaggingStudy run_tagging_study(const StudyConfig& config) {
    config.validate();
    TaggingStudy out;
    const std::size_t nm = config.methods.size();
    for (std::size_t n : config.n_list) {
        const auto per_rep = parallel_map(config.reps, config.workers, [&](std::size_t r) -> std::optional<std::vector<TagMetrics>> {
            const SimulatedPath path = simulate_rep(config, n, r);
            std::optional<FitResult> f;
            try {
                f.emplace(fit(path.y, config.space, config.fit));
            } catch (const Error&) {
                return std::nullopt;
            }
            const std::span<const std::uint8_t> truth(path.s.data() + 1, n);
            const TagAllOptions opts{config.calibrate_all, config.rule4_reversed};
            std::vector<TagMetrics> metrics;
            for (const TagResult& res : tag_all(path.y, f->theta_hat, config.methods, opts)) {
                metrics.push_back(tag_metrics(res.s_hat, truth));
            }
            return metrics;
        });
        std::size_t used = 0;
        for (const auto& v : per_rep) used += v.has_value();
        const std::size_t failures = config.reps - used;
        check_failures(failures, config.reps, "tagging study");
        out.failures.push_back(failures);

        for (std::size_t j = 0; j < nm; ++j) {
            double sP = 0.0;
            double sP0 = 0.0;
            double sP1 = 0.0;
            std::size_t c0 = 0;
            std::size_t c1 = 0;
            for (const auto& v : per_rep) {
                if (!v) continue;
                const TagMetrics& m = (*v)[j];
                sP += m.P;
                if (m.P0) {
                    sP0 += *m.P0;
                    ++c0;
                }
                if (m.P1) {
                    sP1 += *m.P1;
                    ++c1;
                }
            }
            TaggingRow row;
            row.n = n;
            row.method = config.methods[j];
            row.P = used > 0 ? 100.0 * sP / static_cast<double>(used) : kNaN;
            row.P0 = c0 > 0 ? 100.0 * sP0 / static_cast<double>(c0) : kNaN;
            row.P1 = c1 > 0 ? 100.0 * sP1 / static_cast<double>(c1) : kNaN;
            row.undefined_P0 = used - c0;
            row.undefined_P1 = used - c1;
            out.rows.push_back(row);
        }
    }
    return out;
}

void write_estimation_csv(std::ostream& out, const EstimationStudy& study) {
    out << "n,parameter,bias,esd,asd\n";
    for (const EstimationRow& r : study.rows) {
        out << r.n << ',' << r.parameter << ',' << csv_num(r.bias) << ',' << csv_num(r.esd) << ',' << csv_num(r.asd)
            << '\n';
    }
}

void write_normality_csv(std::ostream& out, const NormalityStudy& study) {
    out << "bin_lower,bin_upper,count,normal_expected\n";
    for (std::size_t b = 0; b < study.counts.size(); ++b) {
        out << csv_num(study.bin_edges[b]) << ',' << csv_num(study.bin_edges[b + 1]) << ',' << study.counts[b] << ','
            << csv_num(study.overlay[b]) << '\n';
    }
}

void write_size_csv(std::ostream& out, const SizeStudy& study) {
    out << "n,M,alpha,rejection_rate,used\n";
    for (const SizeRow& r : study.rows) {
        out << r.n << ',' << r.M << ',' << csv_num(r.alpha) << ',' << csv_num(r.rejection_rate) << ',' << r.used
            << '\n';
    }
}

void write_tagging_csv(std::ostream& out, const TaggingStudy& study) {
    out << "n,method,P,P0,P1,undefined_P0,undefined_P1\n";
    for (const TaggingRow& r : study.rows) {
        out << r.n << ',' << to_string(r.method) << ',' << csv_num(r.P) << ',' << csv_num(r.P0) << ','
            << csv_num(r.P1) << ',' << r.undefined_P0 << ',' << r.undefined_P1 << '\n';
    }
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

StudyManifest make_manifest(const StudyConfig& config, const std::vector<std::size_t>& failures,
                            double wall_seconds, std::vector<std::string> outputs) {
    StudyManifest m;
    m.kind = std::string(to_string(config.kind));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.canonical())));
    m.config_hash = buf;
    m.master_seed = config.master_seed;
    m.failures = failures;
    m.wall_seconds = wall_seconds;
    m.outputs = std::move(outputs);
    return m;
}

std::string manifest_json(const StudyManifest& manifest) {
    nlohmann::ordered_json j;
    j["kind"] = manifest.kind;
    j["config_hash"] = manifest.config_hash;
    j["master_seed"] = manifest.master_seed;
    j["failures"] = manifest.failures;
    j["wall_seconds"] = manifest.wall_seconds;
    j["outputs"] = manifest.outputs;
    return j.dump(2) + "\n";
}

}  // namespace snar
