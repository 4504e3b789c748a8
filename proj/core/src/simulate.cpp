#include "snar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "format.hpp"
#include "snar/errors.hpp"

namespace snar {

namespace {

void check_scale(const SnarParams& params, const InnovationFamily& family) {
    const double v = family.variance();
    if (std::fabs(v - params.sigma2()) > 1e-12 * std::max(1.0, params.sigma2())) {
        throw DomainError("innovation scale^2 must equal sigma2");
    }
}

}  // namespace

SimulatedPath simulate(const SnarParams& params, std::size_t n, const InnovationFamily& family,
                       std::uint64_t seed, const SimulationOptions& options) {
    if (n == 0) {
        throw DomainError("simulate requires n >= 1");
    }
    check_scale(params, family);

    Rng rng(seed);
    const double phi = params.phi();
    const double p = params.p();

    double y = options.y0.value_or(0.0);
    for (std::size_t i = 0; i < options.burn_in; ++i) {
        const bool s = rng.bernoulli(p);
        const double e = family.sample(rng);
        y = (s ? phi * std::fabs(y) : 0.0) + e;
    }

    SimulatedPath path;
    path.seed = seed;
    path.y.resize(n + 1);
    path.s.assign(n + 1, 0);
    path.eps.assign(n + 1, 0.0);
    path.y[0] = y;
    for (std::size_t t = 1; t <= n; ++t) {
        const bool s = rng.bernoulli(p);
        const double e = family.sample(rng);
        path.s[t] = s ? 1 : 0;
        path.eps[t] = e;
        path.y[t] = path.s[t] * phi * std::fabs(path.y[t - 1]) + e;
    }
    return path;
}

AuxBubblePath simulate_aux(const SnarParams& params, std::size_t k, const InnovationFamily& family,
                           std::uint64_t seed) {
    check_scale(params, family);
    Rng rng(seed);
    AuxBubblePath path;
    path.seed = seed;
    path.z.resize(k + 1);
    path.z[0] = family.sample(rng);
    for (std::size_t t = 1; t <= k; ++t) {
        path.z[t] = params.phi() * std::fabs(path.z[t - 1]) + family.sample(rng);
    }
    return path;
}

void write_path_csv(std::ostream& out, const SimulatedPath& path) {
    out << "t,y,s,eps\n";
    for (std::size_t t = 0; t < path.y.size(); ++t) {
        out << t << ',' << detail::fmt17(path.y[t]) << ',';
        if (t > 0) {
            out << static_cast<int>(path.s[t]) << ',' << detail::fmt17(path.eps[t]);
        } else {
            out << ',';
        }
        out << '\n';
    }
}

void write_aux_csv(std::ostream& out, const AuxBubblePath& path) {
    out << "t,z\n";
    for (std::size_t t = 0; t < path.z.size(); ++t) {
        out << t << ',' << detail::fmt17(path.z[t]) << '\n';
    }
}

}  // namespace snar
