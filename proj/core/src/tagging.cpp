#include "snar/tagging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "snar/errors.hpp"
#include "snar/parallel.hpp"
#include "snar/special.hpp"

namespace snar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMinEvents = 200;
constexpr std::size_t kChunk = 8192;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

double mixture_cdf(double r, double p, double sigma, double b) {
    return p * normal_cdf(r / sigma) + (1.0 - p) * normal_cdf((r + b) / sigma);
}

// Smallest r with p Phi(r / sigma) + (1 - p) Phi((r + b) / sigma) > level.
double rule3_threshold(double p, double sigma, double b, double level) {
    const auto mixture = [&](double r) { return mixture_cdf(r, p, sigma, b); };
    double lo = -20.0 * sigma - std::max(b, 0.0);
    double hi = 20.0 * sigma + std::max(-b, 0.0);
    const double target = level;
    for (int i = 0; i < 400 && hi - lo > 1e-10; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mixture(mid) > target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

// Scores order times from most to least null-like; the top `null_count` are tagged 0.
TagResult calibrated_tag(TagResult out, std::span<const double> y, const SnarParams& theta, int rule,
                         const RbtOptions& options) {
    const std::size_t n = out.r_hat.size();
    const std::size_t k = *options.null_count;
    if (k > n) throw DomainError("null_count exceeds the series length");
    const double p = theta.p();
    const double sigma2 = theta.sigma2();
    const double sigma = std::sqrt(sigma2);
    const double log_ratio = std::log((1.0 - p) / p);
    const double sign = options.rule4_reversed ? -1.0 : 1.0;

    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double b = theta.phi() * std::fabs(y[i]);
        const double r = out.r_hat[i];
        switch (rule) {
            case 1: score[i] = -r; break;
            case 2: score[i] = -(r + 0.5 * b); break;
            case 3: score[i] = -mixture_cdf(r, p, sigma, b); break;
            default: score[i] = sign * (log_ratio - b * (2.0 * r + b) / (2.0 * sigma2)); break;
        }
    }
    double cut = kInf;
    if (k > 0) {
        std::vector<double> sorted = score;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                         std::greater<>());
        cut = sorted[k - 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double b = theta.phi() * std::fabs(y[i]);
        out.s_hat[i] = score[i] >= cut ? 0 : 1;
        switch (rule) {
            case 1: out.threshold[i] = -cut; break;
            case 2: out.threshold[i] = -0.5 * b - cut; break;
            case 3:
                out.threshold[i] = std::isfinite(cut) ? rule3_threshold(p, sigma, b, std::clamp(-cut, 0.0, 1.0)) : -kInf;
                break;
            default:
                if (b != 0.0 && !options.rule4_reversed) {
                    out.threshold[i] = (2.0 * sigma2 * (log_ratio - cut) - b * b) / (2.0 * b);
                } else {
                    out.threshold[i] = std::numeric_limits<double>::quiet_NaN();
                }
                break;
        }
    }
    return out;
}

struct Counts {
    std::size_t trials = 0;
    std::size_t hits = 0;
};

Counts conditional_chunk(PropositionKind kind, const SnarParams& params, const InnovationFamily& family,
                         std::size_t k, double c, std::size_t paths, std::size_t warmup, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t T = warmup + k;
    std::vector<std::uint8_t> s(T + 1, 0);
    std::vector<double> y(T + 1, 0.0);
    Counts out;
    for (std::size_t i = 0; i < paths; ++i) {
        for (std::size_t t = 1; t <= T; ++t) {
            s[t] = rng.bernoulli(params.p()) ? 1 : 0;
            const double e = family.sample(rng);
            y[t] = (s[t] != 0 ? params.phi() * std::fabs(y[t - 1]) : 0.0) + e;
        }
        if (s[T - k] != 0) continue;
        bool match = true;
        if (kind == PropositionKind::Residual) {
            for (std::size_t t = T - k + 1; t < T && match; ++t) match = s[t] != 0;
            match = match && s[T] == 0;
        } else {
            for (std::size_t t = T - k + 1; t <= T && match; ++t) match = s[t] != 0;
        }
        if (!match) continue;
        ++out.trials;
        if (kind == PropositionKind::Residual) {
            if (y[T] - params.phi() * std::fabs(y[T - 1]) <= c) ++out.hits;
        } else if (y[T] > c) {
            ++out.hits;
        }
    }
    return out;
}

Counts aux_chunk(PropositionKind kind, const SnarParams& params, const InnovationFamily& family, std::size_t k,
                 double c, std::size_t paths, std::uint64_t seed) {
    Rng rng(seed);
    Counts out;
    for (std::size_t i = 0; i < paths; ++i) {
        double z = family.sample(rng);
        for (std::size_t j = 1; j <= k; ++j) z = params.phi() * std::fabs(z) + family.sample(rng);
        ++out.trials;
        if (kind == PropositionKind::Residual ? z >= -c : z > c) ++out.hits;
    }
    return out;
}

}  // namespace

std::string_view to_string(TagMethod method) {
    switch (method) {
        case TagMethod::RBT1: return "RBT1";
        case TagMethod::RBT2: return "RBT2";
        case TagMethod::RBT3: return "RBT3";
        case TagMethod::RBT4: return "RBT4";
        case TagMethod::NBT: return "NBT";
    }
    return "RBT1";
}

TagMethod parse_tag_method(std::string_view name) {
    const std::string s = lower(name);
    if (s == "rbt1") return TagMethod::RBT1;
    if (s == "rbt2") return TagMethod::RBT2;
    if (s == "rbt3") return TagMethod::RBT3;
    if (s == "rbt4") return TagMethod::RBT4;
    if (s == "nbt") return TagMethod::NBT;
    throw DomainError("unknown tagging method: " + std::string(name));
}

std::size_t TagResult::bubble_count() const noexcept {
    return static_cast<std::size_t>(std::count(s_hat.begin(), s_hat.end(), std::uint8_t{1}));
}

std::vector<double> residuals_r(std::span<const double> y, double phi_hat) {
    std::vector<double> r;
    r.reserve(y.empty() ? 0 : y.size() - 1);
    for (std::size_t t = 1; t < y.size(); ++t) r.push_back(y[t] - phi_hat * std::fabs(y[t - 1]));
    return r;
}

TagResult rbt_tag(std::span<const double> y, const SnarParams& theta_hat, int rule, const RbtOptions& options) {
    if (rule < 1 || rule > 4) throw DomainError("tagging rule must be 1, 2, 3 or 4");
    const double p = theta_hat.p();
    if (!(p > 0.0 && p < 1.0)) throw DomainError("tagging requires 0 < p < 1");
    const double phi = theta_hat.phi();
    const double sigma2 = theta_hat.sigma2();
    const double sigma = std::sqrt(sigma2);

    TagResult out;
    out.method = static_cast<TagMethod>(rule - 1);
    out.r_hat = residuals_r(y, phi);
    const std::size_t n = out.r_hat.size();
    out.s_hat.assign(n, 1);
    out.threshold.assign(n, 0.0);
    if (n == 0) return out;

    if (rule == 1 && !options.null_count) {
        std::vector<double> sorted = out.r_hat;
        auto k = static_cast<std::size_t>(std::ceil((1.0 - p) * static_cast<double>(n)));
        k = std::clamp<std::size_t>(k, 1, n);
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
        const double c = sorted[k - 1];
        for (std::size_t i = 0; i < n; ++i) {
            out.threshold[i] = c;
            if (out.r_hat[i] <= c) out.s_hat[i] = 0;
        }
        return out;
    }

    const double log_ratio = std::log((1.0 - p) / p);
    if (options.null_count) return calibrated_tag(std::move(out), y, theta_hat, rule, options);
    for (std::size_t i = 0; i < n; ++i) {
        const double b = phi * std::fabs(y[i]);
        const double r = out.r_hat[i];
        bool null_state = false;
        switch (rule) {
            case 2:
                out.threshold[i] = -0.5 * b;
                null_state = r < -0.5 * b;
                break;
            case 3:
                out.threshold[i] = rule3_threshold(p, sigma, b, 1.0 - p);
                null_state = r <= out.threshold[i];
                break;
            default: {
                // log posterior odds of s_t = 0 against s_t = 1
                const double log_null = log_ratio - (r + b) * (r + b) / (2.0 * sigma2);
                const double log_bubble = -r * r / (2.0 * sigma2);
                null_state = options.rule4_reversed ? log_null < log_bubble : log_bubble < log_null;
                if (b != 0.0) {
                    out.threshold[i] = (2.0 * sigma2 * log_ratio - b * b) / (2.0 * b);
                } else {
                    out.threshold[i] = log_ratio > 0.0 ? kInf : -kInf;
                }
                break;
            }
        }
        if (null_state) out.s_hat[i] = 0;
    }
    return out;
}

TagResult nbt_tag(std::span<const double> y, double c) {
    TagResult out;
    out.method = TagMethod::NBT;
    const std::size_t n = y.empty() ? 0 : y.size() - 1;
    out.s_hat.resize(n);
    out.threshold.assign(n, c);
    for (std::size_t t = 1; t <= n; ++t) out.s_hat[t - 1] = y[t] > c ? 1 : 0;
    return out;
}

double calibrate_nbt_threshold(std::span<const double> values, double target_ratio) {
    if (!(target_ratio > 0.0 && target_ratio < 1.0)) throw DomainError("target ratio must lie in (0, 1)");
    if (values.empty()) throw DomainError("cannot calibrate on an empty series");
    std::vector<double> sorted(values.begin(), values.end());
    const std::size_t n = sorted.size();
    auto k = static_cast<std::size_t>(std::ceil((1.0 - target_ratio) * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
    return sorted[k - 1];
}

std::vector<TagResult> tag_all(std::span<const double> y, const SnarParams& theta_hat,
                               std::span<const TagMethod> methods, const TagAllOptions& options) {
    const std::size_t n = y.empty() ? 0 : y.size() - 1;
    RbtOptions base;
    base.rule4_reversed = options.rule4_reversed;
    const TagResult rule1 = rbt_tag(y, theta_hat, 1, base);
    const std::size_t bubbles = rule1.bubble_count();
    std::vector<TagResult> out;
    out.reserve(methods.size());
    for (TagMethod m : methods) {
        if (m == TagMethod::RBT1) {
            out.push_back(rule1);
        } else if (m == TagMethod::NBT) {
            const double ratio = static_cast<double>(bubbles) / static_cast<double>(n);
            const double c = ratio <= 0.0   ? std::numeric_limits<double>::infinity()
                             : ratio >= 1.0 ? -std::numeric_limits<double>::infinity()
                                            : calibrate_nbt_threshold(y.subspan(1), ratio);
            out.push_back(nbt_tag(y, c));
        } else {
            RbtOptions opts = base;
            if (options.calibrate_all) opts.null_count = n - bubbles;
            out.push_back(rbt_tag(y, theta_hat, static_cast<int>(m) + 1, opts));
        }
    }
    return out;
}

std::vector<Excursion> excursions(std::span<const std::uint8_t> s, std::size_t min_duration) {
    std::vector<Excursion> out;
    std::size_t i = 0;
    while (i + 1 < s.size()) {
        if (s[i] == 0 && s[i + 1] != 0) {
            std::size_t j = i + 1;
            while (j < s.size() && s[j] != 0) ++j;
            if (j == s.size()) break;  // no terminating null state
            const Excursion e{i + 1, j, j - i};
            if (e.duration >= min_duration) out.push_back(e);
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

TagMetrics tag_metrics(std::span<const std::uint8_t> s_hat, std::span<const std::uint8_t> s_true) {
    if (s_hat.size() != s_true.size()) throw DomainError("state sequences differ in length");
    if (s_hat.empty()) throw DomainError("empty state sequence");
    std::size_t correct = 0;
    std::size_t n0 = 0;
    std::size_t c0 = 0;
    std::size_t n1 = 0;
    std::size_t c1 = 0;
    for (std::size_t i = 0; i < s_hat.size(); ++i) {
        const bool truth = s_true[i] != 0;
        const bool ok = (s_hat[i] != 0) == truth;
        correct += ok;
        if (truth) {
            ++n1;
            c1 += ok;
        } else {
            ++n0;
            c0 += ok;
        }
    }
    TagMetrics m;
    m.P = static_cast<double>(correct) / static_cast<double>(s_hat.size());
    if (n0 > 0) m.P0 = static_cast<double>(c0) / static_cast<double>(n0);
    if (n1 > 0) m.P1 = static_cast<double>(c1) / static_cast<double>(n1);
    return m;
}

PropositionCheck check_proposition(PropositionKind kind, const SnarParams& params, const InnovationFamily& family,
                                   std::size_t k, double threshold, std::size_t reps, std::uint64_t seed,
                                   const PropositionOptions& options) {
    if (k < 1) throw DomainError("k must be at least 1");
    if (std::isnan(threshold)) throw DomainError("threshold must not be NaN");
    const std::size_t warmup = std::max<std::size_t>(options.warmup, 1);
    const std::size_t chunks = (reps + kChunk - 1) / kChunk;
    const auto chunk_size = [&](std::size_t c) { return std::min(kChunk, reps - c * kChunk); };

    const auto lhs_parts = parallel_map(chunks, options.workers, [&](std::size_t c) {
        return conditional_chunk(kind, params, family, k, threshold, chunk_size(c), warmup, derive_seed(seed, 0, c));
    });
    const auto rhs_parts = parallel_map(chunks, options.workers, [&](std::size_t c) {
        return aux_chunk(kind, params, family, k, threshold, chunk_size(c), derive_seed(seed, 1, c));
    });
    Counts lhs;
    Counts rhs;
    for (const Counts& c : lhs_parts) {
        lhs.trials += c.trials;
        lhs.hits += c.hits;
    }
    for (const Counts& c : rhs_parts) {
        rhs.trials += c.trials;
        rhs.hits += c.hits;
    }
    if (lhs.trials < kMinEvents) {
        throw InsufficientEventsError("only " + std::to_string(lhs.trials) + " conditioning events; need " +
                                      std::to_string(kMinEvents));
    }
    PropositionCheck out;
    out.events = lhs.trials;
    out.aux_paths = rhs.trials;
    const double n1 = static_cast<double>(lhs.trials);
    const double n2 = static_cast<double>(rhs.trials);
    out.lhs = static_cast<double>(lhs.hits) / n1;
    out.rhs = static_cast<double>(rhs.hits) / n2;
    const double pooled = static_cast<double>(lhs.hits + rhs.hits) / (n1 + n2);
    out.mc_se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
    return out;
}

}  // namespace snar
