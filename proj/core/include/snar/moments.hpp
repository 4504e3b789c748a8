#pragma once

#include <optional>

#include "snar/params.hpp"

namespace snar {

/// E[y_t^2] = sigma2 / (1 - p phi^2); empty when p phi^2 >= 1 (infinite variance).
std::optional<double> second_moment(const SnarParams& params);

/// Kurtosis of y_t for innovations with zero third moment:
///   {6 p phi^2 + k (1 - p phi^2)} (1 - p phi^2) / (1 - p phi^4),  k = innovation kurtosis.
/// Empty when p phi^4 >= 1.
std::optional<double> kurtosis(const SnarParams& params, double innovation_kurtosis);

}  // namespace snar
