#include "snar/innovation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "snar/errors.hpp"
#include "snar/special.hpp"

namespace snar {

namespace {

// Laplace with unit variance has scale b = 1/sqrt(2).
constexpr double kLaplaceB = 1.0 / std::numbers::sqrt2;

// Standardized t_5: x = t * sqrt(3/5) with t ~ t_5.
const double kT5ToStd = std::sqrt(3.0 / 5.0);
const double kT5Norm = 8.0 / (3.0 * std::numbers::pi * std::sqrt(3.0));

double laplace_cdf_std(double x) {
    return x < 0.0 ? 0.5 * std::exp(x / kLaplaceB) : 1.0 - 0.5 * std::exp(-x / kLaplaceB);
}

double laplace_quantile_std(double u) {
    return u < 0.5 ? kLaplaceB * std::log(2.0 * u) : -kLaplaceB * std::log(2.0 * (1.0 - u));
}

double t5_density_std(double x) {
    const double r = 1.0 + x * x / 3.0;
    return kT5Norm / (r * r * r);
}

// Closed form of the t_5 CDF. For t < 0 the angle beta = atan(sqrt(5)/|t|)
// keeps the lower tail free of the 1/2 - 1/2 cancellation.
double t5_cdf_raw(double t) {
    const double beta = std::atan2(std::sqrt(5.0), std::fabs(t));
    const double sb = std::sin(beta);
    const double cb = std::cos(beta);
    const double lower = (beta - sb * cb * (1.0 + (2.0 / 3.0) * sb * sb)) / std::numbers::pi;
    return t < 0.0 ? lower : 1.0 - lower;
}

double t5_cdf_std(double x) { return t5_cdf_raw(x / kT5ToStd); }

double t5_quantile_std(double u) {
    // Bracket then Newton with bisection safeguard on the standardized scale.
    double lo = -1.0;
    double hi = 1.0;
    while (t5_cdf_std(lo) > u) lo *= 2.0;
    while (t5_cdf_std(hi) < u) hi *= 2.0;
    double x = std::clamp(normal_quantile(u), lo, hi);
    for (int i = 0; i < 200; ++i) {
        const double f = t5_cdf_std(x) - u;
        if (f == 0.0) break;
        if (f > 0.0) hi = x; else lo = x;
        double next = x - f / t5_density_std(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) <= 1e-15 * (1.0 + std::fabs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

}  // namespace

std::string_view to_string(InnovationKind kind) {
    switch (kind) {
        case InnovationKind::Normal: return "normal";
        case InnovationKind::Laplace: return "laplace";
        case InnovationKind::StudentT5: return "st5";
    }
    return "unknown";
}

InnovationKind parse_innovation_kind(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "normal" || lower == "gaussian") return InnovationKind::Normal;
    if (lower == "laplace") return InnovationKind::Laplace;
    if (lower == "st5" || lower == "t5" || lower == "studentt5") return InnovationKind::StudentT5;
    throw DomainError("unknown innovation family: " + std::string(name));
}

InnovationFamily InnovationFamily::make(InnovationKind kind, double scale) {
    if (!std::isfinite(scale) || scale <= 0.0) {
        throw DomainError("innovation scale must be finite and positive");
    }
    return InnovationFamily(kind, scale);
}

double InnovationFamily::kurtosis() const noexcept {
    switch (kind_) {
        case InnovationKind::Normal: return 3.0;
        case InnovationKind::Laplace: return 6.0;
        case InnovationKind::StudentT5: return 9.0;
    }
    return 3.0;
}

double InnovationFamily::sample(Rng& rng) const {
    switch (kind_) {
        case InnovationKind::Normal:
            return scale_ * rng.normal();
        case InnovationKind::Laplace:
            return scale_ * laplace_quantile_std(rng.uniform());
        case InnovationKind::StudentT5: {
            const double z = rng.normal();
            double chi2 = 0.0;
            for (int i = 0; i < 5; ++i) {
                const double g = rng.normal();
                chi2 += g * g;
            }
            // z / sqrt(chi2 / 5) * sqrt(3 / 5)
            return scale_ * z * std::sqrt(3.0 / chi2);
        }
    }
    return 0.0;
}

double innovation_density(const InnovationFamily& family, double x) {
    const double z = x / family.scale();
    double base = 0.0;
    switch (family.kind()) {
        case InnovationKind::Normal: base = normal_pdf(z); break;
        case InnovationKind::Laplace: base = std::exp(-std::fabs(z) / kLaplaceB) / std::numbers::sqrt2; break;
        case InnovationKind::StudentT5: base = t5_density_std(z); break;
    }
    return base / family.scale();
}

double innovation_cdf(const InnovationFamily& family, double x) {
    const double z = x / family.scale();
    switch (family.kind()) {
        case InnovationKind::Normal: return normal_cdf(z);
        case InnovationKind::Laplace: return laplace_cdf_std(z);
        case InnovationKind::StudentT5: return t5_cdf_std(z);
    }
    return 0.0;
}

double innovation_quantile(const InnovationFamily& family, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("quantile level must lie in (0, 1)");
    }
    double z = 0.0;
    switch (family.kind()) {
        case InnovationKind::Normal: z = normal_quantile(u); break;
        case InnovationKind::Laplace: z = laplace_quantile_std(u); break;
        case InnovationKind::StudentT5: z = t5_quantile_std(u); break;
    }
    return family.scale() * z;
}

}  // namespace snar
