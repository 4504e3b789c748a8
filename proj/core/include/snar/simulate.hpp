#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "snar/innovation.hpp"
#include "snar/params.hpp"

namespace snar {

inline constexpr std::size_t kDefaultBurnIn = 500;

/// One simulated SNAR path with indices 0..n. s[0] and eps[0] are unused (0).
/// For t >= 1, y[t] == s[t] * phi * |y[t-1]| + eps[t] holds bit-for-bit.
struct SimulatedPath {
    std::vector<double> y;
    std::vector<std::uint8_t> s;
    std::vector<double> eps;
    std::uint64_t seed = 0;

    std::size_t n() const noexcept { return y.empty() ? 0 : y.size() - 1; }
};

struct SimulationOptions {
    /// Start value of the recursion before burn-in. Absent means 0.
    std::optional<double> y0;
    std::size_t burn_in = kDefaultBurnIn;
};

/// Simulates y_t = s_t * phi * |y_{t-1}| + eps_t with s_t ~ Bernoulli(p) independent of eps_t.
/// `burn_in` steps are generated and discarded before the n + 1 retained points.
/// Throws DomainError if n == 0 or family.variance() differs from params.sigma2().
SimulatedPath simulate(const SnarParams& params, std::size_t n, const InnovationFamily& family,
                       std::uint64_t seed, const SimulationOptions& options = {});

/// Pure-bubble auxiliary process z_0 = eps_0, z_t = phi * |z_{t-1}| + eps_t.
struct AuxBubblePath {
    std::vector<double> z;
    std::uint64_t seed = 0;
};

AuxBubblePath simulate_aux(const SnarParams& params, std::size_t k, const InnovationFamily& family,
                           std::uint64_t seed);

/// CSV with header `t,y,s,eps`; s and eps are blank at t = 0. Floats use 17 significant digits.
void write_path_csv(std::ostream& out, const SimulatedPath& path);

/// CSV with header `t,z`.
void write_aux_csv(std::ostream& out, const AuxBubblePath& path);

}  // namespace snar
