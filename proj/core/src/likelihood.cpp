#include "snar/likelihood.hpp"

#include <cmath>

#include "snar/errors.hpp"

namespace snar {

namespace {

struct TermParts {
    double a;   // |y_{t-1}|
    double a2;  // y_{t-1}^2
    double e;   // y_t - p phi |y_{t-1}|
    double q;   // conditional variance
    Vec3 dq;    // dq/dtheta
    Vec3 mean_grad;  // d(p phi)/dtheta = (p, phi, 0)
};

inline TermParts parts(const Vec3& theta, double y_prev, double y_cur) {
    const double phi = theta[kPhi];
    const double p = theta[kP];
    const double sigma2 = theta[kSigma2];
    TermParts r;
    r.a = std::fabs(y_prev);
    r.a2 = y_prev * y_prev;
    r.e = y_cur - p * phi * r.a;
    r.q = p * (1.0 - p) * phi * phi * r.a2 + sigma2;
    if (!(r.q > 0.0)) {
        throw DomainError("conditional variance q_t must be positive");
    }
    r.dq = Vec3(2.0 * p * (1.0 - p) * phi * r.a2, (1.0 - 2.0 * p) * phi * phi * r.a2, 1.0);
    r.mean_grad = Vec3(p, phi, 0.0);
    return r;
}

inline Vec3 gradient_of(const TermParts& r) {
    const double w = 1.0 / r.q - r.e * r.e / (r.q * r.q);
    return w * r.dq - (2.0 * r.a * r.e / r.q) * r.mean_grad;
}

Mat3 hessian_of(const Vec3& theta, const TermParts& r) {
    const double phi = theta[kPhi];
    const double p = theta[kP];
    const double q = r.q;
    const double q2 = q * q;
    const double e2 = r.e * r.e;

    const double c_d2q = 1.0 / q - e2 / q2;
    const double c_dqdq = 2.0 * e2 / (q2 * q) - 1.0 / q2;
    const double c_cross = 2.0 * r.a * r.e / q2;
    const double c_mm = 2.0 * r.a2 / q;
    const double c_swap = 2.0 * r.a * r.e / q;

    Mat3 d2q = Mat3::Zero();
    d2q(0, 0) = 2.0 * p * (1.0 - p) * r.a2;
    d2q(0, 1) = 2.0 * (1.0 - 2.0 * p) * phi * r.a2;
    d2q(1, 1) = -2.0 * phi * phi * r.a2;

    Mat3 h;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            double v = c_d2q * d2q(i, j) + c_dqdq * r.dq[i] * r.dq[j] +
                       c_cross * (r.dq[i] * r.mean_grad[j] + r.mean_grad[i] * r.dq[j]) +
                       c_mm * r.mean_grad[i] * r.mean_grad[j];
            if (i == 0 && j == 1) v -= c_swap;
            h(i, j) = v;
            h(j, i) = v;
        }
    }
    return h;
}

}  // namespace

QuasiLikelihood::QuasiLikelihood(std::span<const double> y) : y_(y) {
    if (y_.size() < 2) {
        throw DegenerateError("quasi-likelihood needs at least y_0 and y_1");
    }
}

double QuasiLikelihood::term(const Vec3& theta, std::size_t t) const {
    const TermParts r = parts(theta, y_[t - 1], y_[t]);
    return std::log(r.q) + r.e * r.e / r.q;
}

Vec3 QuasiLikelihood::term_gradient(const Vec3& theta, std::size_t t) const {
    return gradient_of(parts(theta, y_[t - 1], y_[t]));
}

Mat3 QuasiLikelihood::term_hessian(const Vec3& theta, std::size_t t) const {
    return hessian_of(theta, parts(theta, y_[t - 1], y_[t]));
}

double QuasiLikelihood::value(const Vec3& theta) const {
    const double phi = theta[kPhi];
    const double p = theta[kP];
    const double sigma2 = theta[kSigma2];
    const double mean_coef = p * phi;
    const double var_coef = p * (1.0 - p) * phi * phi;
    double total = 0.0;
    for (std::size_t t = 1; t < y_.size(); ++t) {
        const double a = std::fabs(y_[t - 1]);
        const double q = var_coef * a * a + sigma2;
        if (!(q > 0.0)) {
            throw DomainError("conditional variance q_t must be positive");
        }
        const double e = y_[t] - mean_coef * a;
        total += std::log(q) + e * e / q;
    }
    return total;
}

double QuasiLikelihood::value_and_gradient(const Vec3& theta, Vec3& grad) const {
    const double phi = theta[kPhi];
    const double p = theta[kP];
    const double sigma2 = theta[kSigma2];
    const double mean_coef = p * phi;
    const double var_coef = p * (1.0 - p) * phi * phi;
    const double dq_phi = 2.0 * p * (1.0 - p) * phi;
    const double dq_p = (1.0 - 2.0 * p) * phi * phi;

    double total = 0.0;
    double g_phi = 0.0;
    double g_p = 0.0;
    double g_s = 0.0;
    for (std::size_t t = 1; t < y_.size(); ++t) {
        const double a = std::fabs(y_[t - 1]);
        const double a2 = a * a;
        const double q = var_coef * a2 + sigma2;
        if (!(q > 0.0)) {
            throw DomainError("conditional variance q_t must be positive");
        }
        const double e = y_[t] - mean_coef * a;
        const double inv_q = 1.0 / q;
        const double w = inv_q - e * e * inv_q * inv_q;
        const double m = 2.0 * a * e * inv_q;
        total += std::log(q) + e * e * inv_q;
        g_phi += w * dq_phi * a2 - m * p;
        g_p += w * dq_p * a2 - m * phi;
        g_s += w;
    }
    grad = Vec3(g_phi, g_p, g_s);
    return total;
}

Mat3 QuasiLikelihood::hessian(const Vec3& theta) const {
    Mat3 h = Mat3::Zero();
    for (std::size_t t = 1; t < y_.size(); ++t) {
        h += hessian_of(theta, parts(theta, y_[t - 1], y_[t]));
    }
    return h;
}

double neg_quasi_loglik(const SnarParams& theta, std::span<const double> y) {
    return QuasiLikelihood(y).value(as_vector(theta));
}

Vec3 score(const SnarParams& theta, std::span<const double> y) {
    Vec3 g;
    QuasiLikelihood(y).value_and_gradient(as_vector(theta), g);
    return g;
}

Mat3 hessian(const SnarParams& theta, std::span<const double> y) {
    return QuasiLikelihood(y).hessian(as_vector(theta));
}

}  // namespace snar
