#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "snar/params.hpp"

namespace snar {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Component order used by every vector/matrix in the estimation code.
enum ParamIndex : int { kPhi = 0, kP = 1, kSigma2 = 2 };

inline Vec3 as_vector(const SnarParams& theta) { return {theta.phi(), theta.p(), theta.sigma2()}; }

/// Gaussian quasi-likelihood of the SNAR model on y_0..y_n (constant omitted):
///
///   l_t(theta) = log q_t + (y_t - p phi |y_{t-1}|)^2 / q_t,
///   q_t(theta) = p (1 - p) phi^2 y_{t-1}^2 + sigma2,
///
/// with analytic first and second derivatives. Methods take the raw triple
/// (phi, p, sigma2) so the optimizer can evaluate without re-validating.
class QuasiLikelihood {
public:
    /// Throws DegenerateError when y has fewer than two points (n < 1).
    explicit QuasiLikelihood(std::span<const double> y);

    std::size_t n() const noexcept { return y_.size() - 1; }
    std::span<const double> data() const noexcept { return y_; }

    /// L_n(theta) = sum_{t=1..n} l_t. Throws DomainError if some q_t <= 0.
    double value(const Vec3& theta) const;

    /// Returns L_n and writes its gradient.
    double value_and_gradient(const Vec3& theta, Vec3& grad) const;

    Mat3 hessian(const Vec3& theta) const;

    double term(const Vec3& theta, std::size_t t) const;
    Vec3 term_gradient(const Vec3& theta, std::size_t t) const;
    Mat3 term_hessian(const Vec3& theta, std::size_t t) const;

private:
    std::span<const double> y_;
};

double neg_quasi_loglik(const SnarParams& theta, std::span<const double> y);
Vec3 score(const SnarParams& theta, std::span<const double> y);
Mat3 hessian(const SnarParams& theta, std::span<const double> y);

}  // namespace snar
