#include "snar/moments.hpp"

namespace snar {

std::optional<double> second_moment(const SnarParams& params) {
    const double r2 = params.p() * params.phi() * params.phi();
    if (r2 >= 1.0) return std::nullopt;
    return params.sigma2() / (1.0 - r2);
}

std::optional<double> kurtosis(const SnarParams& params, double innovation_kurtosis) {
    const double phi2 = params.phi() * params.phi();
    const double r2 = params.p() * phi2;
    const double r4 = r2 * phi2;
    if (r4 >= 1.0) return std::nullopt;
    return (6.0 * r2 + innovation_kurtosis * (1.0 - r2)) * (1.0 - r2) / (1.0 - r4);
}

}  // namespace snar
