#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snar/diagnostics.hpp"
#include "snar/innovation.hpp"
#include "snar/likelihood.hpp"
#include "snar/parallel.hpp"
#include "snar/params.hpp"
#include "snar/qmle.hpp"
#include "snar/simulate.hpp"
#include "snar/tagging.hpp"

namespace snar {

enum class StudyKind { Estimation, Normality, Size, Tagging };

std::string_view to_string(StudyKind kind);
StudyKind parse_study_kind(std::string_view name);

/// Where the ASD replications evaluate I_hat and J_hat.
enum class AsdAt { Theta0, ThetaHat };

/// Data-generating process of the size study; AR1 gives a misspecified alternative.
enum class SizeDgp { Snar, Ar1 };

struct StudyConfig {
    StudyKind kind = StudyKind::Estimation;
    SnarParams theta0 = validate_params(1.0, 0.9, 1.0);
    InnovationFamily family = InnovationFamily::make(InnovationKind::Normal, 1.0);
    std::vector<std::size_t> n_list = {200, 400, 800};
    std::size_t reps = 500;
    std::uint64_t master_seed = 20240601;
    ParamSpace space = ParamSpace::default_space();
    FitConfig fit;
    unsigned workers = 0;  ///< 0: one per hardware thread
    std::size_t burn_in = kDefaultBurnIn;

    // ASD
    std::size_t asd_reps = 200;
    std::size_t asd_length = 10000;
    AsdAt asd_at = AsdAt::Theta0;

    // normality
    int bins = 30;

    // size
    std::vector<int> M_list = {6};
    TuningMode tuning = TuningMode::Q95;
    std::vector<double> alphas = {0.01, 0.05, 0.10};
    SizeDgp dgp = SizeDgp::Snar;
    double ar_coef = 0.5;

    // tagging
    std::vector<TagMethod> methods = {TagMethod::RBT1, TagMethod::RBT2, TagMethod::RBT3, TagMethod::RBT4,
                                      TagMethod::NBT};
    bool calibrate_all = true;  ///< move every method to Rule 1's tagged fraction
    bool rule4_reversed = false;

    /// Full replication counts: 1000 reps and 2000 ASD paths.
    void use_full_scale();

    /// Throws DomainError unless reps >= 1, every n >= 50, bins >= 1, M >= 1 and alphas in [0, 1].
    void validate() const;

    /// Canonical text form; equal configurations give equal strings.
    std::string canonical() const;
};

/// Drop policy: a study fails when more than 1% of replications fail.
inline constexpr double kMaxFailureFraction = 0.01;

struct AsdOptions {
    std::size_t reps = 200;
    std::size_t length = 10000;
    AsdAt at = AsdAt::Theta0;
    unsigned workers = 0;
    std::size_t burn_in = kDefaultBurnIn;
};

struct AsdResult {
    Vec3 asd = Vec3::Zero();  ///< per-observation scale divided by sqrt(target_n)
    Vec3 unit = Vec3::Zero();  ///< average sqrt(diag(J^-1 I J^-1)) before scaling
    std::size_t used = 0;
    std::size_t skipped = 0;
};

/// Average of sqrt(diag(J^-1 I J^-1)) over `reps` paths of length `length`, divided by sqrt(target_n).
AsdResult run_asd(const SnarParams& theta0, const InnovationFamily& family, std::size_t target_n,
                  std::uint64_t master_seed, const AsdOptions& options = {});

/// Closed-form I and J at theta0 from the known innovation moments, with the
/// expectations over y_{t-1} replaced by averages along one simulated path.
struct TheoreticalInfo {
    Mat3 I;
    Mat3 J;
    Vec3 unit_sd;  ///< sqrt(diag(J^-1 I J^-1))
};

TheoreticalInfo theoretical_information(const SnarParams& theta0, const InnovationFamily& family,
                                        std::size_t path_length, std::uint64_t seed);

struct EstimationRow {
    std::size_t n = 0;
    std::string parameter;
    double bias = 0.0;
    double esd = 0.0;  ///< NaN when fewer than two replications
    double asd = 0.0;
};

struct EstimationStudy {
    std::vector<EstimationRow> rows;
    /// Estimates per n (same order as config.n_list); failed replications removed.
    std::vector<std::vector<Vec3>> estimates;
    std::vector<std::size_t> failures;
    AsdResult asd_unit;  ///< ASD scaled to n = 1
};

/// Throws StudyError when failures exceed the drop policy.
EstimationStudy run_estimation_study(const StudyConfig& config);

struct NormalityStudy {
    std::size_t n = 0;
    double asd = 0.0;                ///< ASD of phi_hat at n
    std::vector<double> root_n_err;  ///< sqrt(n) (phi_hat - phi0)
    std::vector<double> bin_edges;   ///< bins + 1 edges over [min, max]
    std::vector<std::size_t> counts;
    std::vector<double> overlay;  ///< expected count per bin under N(0, n ASD^2)
    double ks = 0.0;              ///< KS distance of root_n_err / (sqrt(n) ASD) from N(0, 1)
    std::size_t failures = 0;
};

/// Uses the first entry of config.n_list.
NormalityStudy run_normality_study(const StudyConfig& config);

/// sup_x |F_m(x) - Phi(x)| for the empirical CDF of `values`.
double ks_distance_normal(std::vector<double> values);

struct SizeRow {
    std::size_t n = 0;
    int M = 0;
    double alpha = 0.0;
    double rejection_rate = 0.0;
    std::size_t used = 0;
};

struct SizeStudy {
    std::vector<SizeRow> rows;
    std::vector<std::size_t> failures;
};

SizeStudy run_size_study(const StudyConfig& config);

struct TaggingRow {
    std::size_t n = 0;
    TagMethod method = TagMethod::RBT1;
    double P = 0.0;   ///< percentage
    double P0 = 0.0;  ///< percentage over replications with null states
    double P1 = 0.0;
    std::size_t undefined_P0 = 0;
    std::size_t undefined_P1 = 0;
};

struct TaggingStudy {
    std::vector<TaggingRow> rows;
    std::vector<std::size_t> failures;
};

TaggingStudy run_tagging_study(const StudyConfig& config);

/// Tables with 17 significant digits.
void write_estimation_csv(std::ostream& out, const EstimationStudy& study);
void write_normality_csv(std::ostream& out, const NormalityStudy& study);
void write_size_csv(std::ostream& out, const SizeStudy& study);
void write_tagging_csv(std::ostream& out, const TaggingStudy& study);

struct StudyManifest {
    std::string kind;
    std::string config_hash;  ///< FNV-1a 64 of StudyConfig::canonical(), hex
    std::uint64_t master_seed = 0;
    std::vector<std::size_t> failures;
    double wall_seconds = 0.0;
    std::vector<std::string> outputs;
};

StudyManifest make_manifest(const StudyConfig& config, const std::vector<std::size_t>& failures,
                            double wall_seconds, std::vector<std::string> outputs);

/// JSON object {kind, config_hash, master_seed, failures, wall_seconds, outputs}.
std::string manifest_json(const StudyManifest& manifest);

std::uint64_t fnv1a64(std::string_view text);

}  // namespace snar
