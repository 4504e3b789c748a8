#pragma once

namespace snar {

double normal_pdf(double x);
double normal_cdf(double x);

/// Inverse of the standard normal CDF; throws DomainError unless 0 < u < 1.
double normal_quantile(double u);

/// Regularized lower and upper incomplete gamma functions P(a, x), Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Upper tail probability of a chi-square variable with df degrees of freedom.
/// Throws DomainError for x < 0 or df < 1.
double chi_square_sf(double x, int df);

}  // namespace snar
