#pragma once

namespace snar {

/// Parameter triple (phi, p, sigma2) of y_t = s_t * phi * |y_{t-1}| + eps_t,
/// with P(s_t = 1) = p and Var(eps_t) = sigma2.
///
/// Instances are only created through validate_params(), so every live value
/// satisfies 0 <= p < 1, sigma2 > 0 and all fields finite.
class SnarParams {
public:
    double phi() const noexcept { return phi_; }
    double p() const noexcept { return p_; }
    double sigma2() const noexcept { return sigma2_; }

    friend bool operator==(const SnarParams&, const SnarParams&) = default;

private:
    SnarParams(double phi, double p, double sigma2) noexcept : phi_(phi), p_(p), sigma2_(sigma2) {}
    friend SnarParams validate_params(double phi, double p, double sigma2);

    double phi_;
    double p_;
    double sigma2_;
};

/// Throws DomainError if p is outside [0, 1), sigma2 <= 0, or any input is non-finite.
SnarParams validate_params(double phi, double p, double sigma2);

}  // namespace snar
