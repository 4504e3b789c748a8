#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "snar/montecarlo.hpp"

namespace snar {

/// Flat view of an INI file: keys are "section.name".
///
/// Recognised sections and keys:
///   [model]       phi, p, sigma2, innovation (normal | laplace | st5)
///   [bounds]      phi_lower, phi_upper, allow_negative_phi, p_lower, p_upper, sigma2_lower, sigma2_upper
///   [fit]         n_starts, max_iterations, grad_tol
///   [study]       seed, reps, n_list, workers, burn_in, full_scale
///   [asd]         reps, length, at (theta0 | theta_hat)
///   [normality]   bins
///   [diagnostics] M_list, tuning (q90 | q95 | auto), tunings, alphas, dgp (snar | ar1), ar_coef
///   [tagging]     methods, calibrate_all, rule4_reversed, min_duration, highlight_duration
///   [analyze]     value_column, date_column, detrend (none | ols | joint), out_dir
/// Lists are comma separated.
class Config {
public:
    Config() = default;

    /// Throws ParseError on malformed INI text.
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::optional<std::string> get(const std::string& key) const;

    /// Typed lookups return `fallback` when the key is absent and throw DomainError
    /// naming the key when the text does not parse.
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// SNAR_SEED overrides study.seed and SNAR_OUT_DIR overrides analyze.out_dir.
void apply_env_overrides(Config& config);

/// Study settings from [model], [bounds], [fit], [study], [asd], [normality],
/// [diagnostics] and [tagging]; absent keys keep the StudyConfig defaults.
StudyConfig study_config_from(const Config& config, StudyKind kind);

ParamSpace param_space_from(const Config& config);
FitConfig fit_config_from(const Config& config);

enum class DetrendMode { None, Ols, Joint };

/// Accepts "none", "ols", "joint"; throws DomainError otherwise.
DetrendMode parse_detrend_mode(const std::string& name);
std::string to_string(DetrendMode mode);

struct AnalyzeOptions {
    std::string value_column = "y";
    std::optional<std::string> date_column;
    DetrendMode detrend = DetrendMode::None;
    std::vector<int> M_list = {6, 12, 18, 24};
    std::vector<TuningMode> tunings = {TuningMode::Q90, TuningMode::Q95};
    std::size_t min_duration = 18;
    std::size_t highlight_duration = 24;
    bool calibrate_all = true;
    bool rule4_reversed = false;
    ParamSpace space = ParamSpace::default_space();
    FitConfig fit;
};

AnalyzeOptions analyze_options_from(const Config& config);

}  // namespace snar
