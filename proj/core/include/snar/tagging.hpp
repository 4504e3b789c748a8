#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "snar/innovation.hpp"
#include "snar/params.hpp"

namespace snar {

/// RBT1..RBT4: residual-based rules (hard threshold, conditional likelihood,
/// time-varying quantile, Bayes). NBT: threshold on y_t itself.
enum class TagMethod { RBT1, RBT2, RBT3, RBT4, NBT };

std::string_view to_string(TagMethod method);

/// Accepts "rbt1".."rbt4", "nbt" (case-insensitive); throws DomainError otherwise.
TagMethod parse_tag_method(std::string_view name);

/// Entry i of every vector refers to time t = i + 1.
struct TagResult {
    TagMethod method = TagMethod::RBT1;
    std::vector<std::uint8_t> s_hat;  ///< 1 = bubble state
    std::vector<double> threshold;    ///< value of r (or y for NBT) at which the rule flips
    std::vector<double> r_hat;        ///< empty for NBT

    std::size_t bubble_count() const noexcept;
};

/// r_t = y_t - phi |y_{t-1}| for t = 1..n.
std::vector<double> residuals_r(std::span<const double> y, double phi_hat);

struct RbtOptions {
    /// Rule 4 normally tags s_t = 0 when the posterior favours the null state,
    /// p f(r / sigma) < (1 - p) f((r + phi |y_{t-1}|) / sigma). Setting this flag
    /// uses the reversed inequality instead.
    bool rule4_reversed = false;

    /// When set, the rule's threshold level is moved so that exactly this many
    /// times (up to ties) are tagged s_t = 0, keeping the rule's ordering of times:
    /// rule 1 by -r_t, rule 2 by the shift of -phi |y_{t-1}| / 2, rule 3 by the
    /// quantile level of the conditional mixture and rule 4 by the posterior odds.
    std::optional<std::size_t> null_count;
};

/// Residual-based tagging with rule 1..4 under the normal working model.
/// Throws DomainError for rule outside 1..4, p not in (0, 1) or null_count > n.
TagResult rbt_tag(std::span<const double> y, const SnarParams& theta_hat, int rule, const RbtOptions& options = {});

/// s_t = 1 iff y_t > c, for t = 1..n.
TagResult nbt_tag(std::span<const double> y, double c);

/// k-th order statistic of `values` with k = ceil((1 - target_ratio) * size), so that
/// at most a fraction target_ratio of the values exceed it (exactly, absent ties).
/// Throws DomainError unless 0 < target_ratio < 1 and values is non-empty.
double calibrate_nbt_threshold(std::span<const double> values, double target_ratio);

struct TagAllOptions {
    /// Move rules 2 to 4 to rule 1's number of null tags (see RbtOptions::null_count).
    bool calibrate_all = true;
    bool rule4_reversed = false;
};

/// Tags with every method in `methods`, in order. Rule 1 is always computed first;
/// NBT uses the threshold that reproduces rule 1's fraction of bubble tags.
std::vector<TagResult> tag_all(std::span<const double> y, const SnarParams& theta_hat,
                               std::span<const TagMethod> methods, const TagAllOptions& options = {});

/// Positions are indices into the state sequence passed to excursions().
struct Excursion {
    std::size_t start = 0;  ///< first bubble state
    std::size_t end = 0;    ///< terminating null state
    std::size_t duration = 0;
};

/// Every run 0, 1, ..., 1, 0 with at least one 1, with duration = end - start + 1 >= min_duration.
std::vector<Excursion> excursions(std::span<const std::uint8_t> s, std::size_t min_duration = 1);

/// Proportions of correct tags overall (P), among true null states (P0) and
/// among true bubble states (P1). P0 / P1 are empty when their class is absent.
struct TagMetrics {
    double P = 0.0;
    std::optional<double> P0;
    std::optional<double> P1;
};

/// Throws DomainError on length mismatch or empty input.
TagMetrics tag_metrics(std::span<const std::uint8_t> s_hat, std::span<const std::uint8_t> s_true);

enum class PropositionKind {
    Residual,  ///< P(r_t <= c | duration-k excursion ends at t) vs P(z_k >= -c)
    Null,      ///< P(y_t > c | k-th cumulative bubble at t) vs P(z_k > c)
};

struct PropositionCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double mc_se = 0.0;
    std::size_t events = 0;  ///< conditioning events behind lhs
    std::size_t aux_paths = 0;
};

struct PropositionOptions {
    std::size_t warmup = 20;  ///< steps before the conditioning window
    unsigned workers = 1;
};

/// Compares the conditional tagging probability from full SNAR paths with the
/// auxiliary-process probability. `reps` paths are drawn for each side.
/// Throws InsufficientEventsError with fewer than 200 conditioning events.
PropositionCheck check_proposition(PropositionKind kind, const SnarParams& params, const InnovationFamily& family,
                                   std::size_t k, double threshold, std::size_t reps, std::uint64_t seed,
                                   const PropositionOptions& options = {});

}  // namespace snar
