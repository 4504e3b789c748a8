#pragma once

#include <string_view>

#include "snar/random.hpp"

namespace snar {

enum class InnovationKind { Normal, Laplace, StudentT5 };

std::string_view to_string(InnovationKind kind);

/// Accepts "normal", "laplace", "st5" / "t5" (case-insensitive); throws DomainError otherwise.
InnovationKind parse_innovation_kind(std::string_view name);

/// Zero-mean innovation law: a unit-variance base distribution scaled by `scale`,
/// so Var(eps) = scale^2. The StudentT5 base is t_5 multiplied by sqrt(3/5).
class InnovationFamily {
public:
    /// Throws DomainError unless scale is finite and positive.
    static InnovationFamily make(InnovationKind kind, double scale = 1.0);

    InnovationKind kind() const noexcept { return kind_; }
    double scale() const noexcept { return scale_; }
    double variance() const noexcept { return scale_ * scale_; }

    /// E[eps^4] / Var(eps)^2 : 3 (normal), 6 (Laplace), 9 (standardized t_5).
    double kurtosis() const noexcept;
    double third_moment() const noexcept { return 0.0; }
    double fourth_moment() const noexcept { return kurtosis() * variance() * variance(); }

    double sample(Rng& rng) const;

private:
    InnovationFamily(InnovationKind kind, double scale) noexcept : kind_(kind), scale_(scale) {}

    InnovationKind kind_;
    double scale_;
};

double innovation_density(const InnovationFamily& family, double x);
double innovation_cdf(const InnovationFamily& family, double x);

/// Throws DomainError unless 0 < u < 1.
double innovation_quantile(const InnovationFamily& family, double u);

}  // namespace snar
