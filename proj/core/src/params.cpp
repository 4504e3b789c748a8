#include "snar/params.hpp"

#include <cmath>
#include <string>

#include "snar/errors.hpp"

namespace snar {

SnarParams validate_params(double phi, double p, double sigma2) {
    if (!std::isfinite(phi) || !std::isfinite(p) || !std::isfinite(sigma2)) {
        throw DomainError("SNAR parameters must be finite");
    }
    if (p < 0.0 || p >= 1.0) {
        throw DomainError("bubble probability p must lie in [0, 1), got " + std::to_string(p));
    }
    if (sigma2 <= 0.0) {
        throw DomainError("innovation variance sigma2 must be positive, got " + std::to_string(sigma2));
    }
    return SnarParams(phi, p, sigma2);
}

}  // namespace snar
