#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "snar/config.hpp"
#include "snar/detrend.hpp"
#include "snar/diagnostics.hpp"
#include "snar/io.hpp"
#include "snar/qmle.hpp"
#include "snar/tagging.hpp"

namespace snar {

/// Minimum series length accepted by the fitting commands.
inline constexpr std::size_t kMinFitLength = 20;

struct DiagnosticEntry {
    TuningMode tuning = TuningMode::Q95;
    DiagnosticReport report;
};

struct MethodTags {
    TagResult tags;
    std::vector<Excursion> excursions;  ///< runs of at least min_duration
};

struct AnalysisResult {
    ObservedSeries series;
    DetrendMode detrend_mode = DetrendMode::None;
    double b0 = 0.0;
    double b1 = 0.0;
    int detrend_rounds = 0;
    bool detrend_converged = true;
    std::vector<double> y;  ///< series the model is fitted to
    FitResult fit;
    std::vector<DiagnosticEntry> diagnostics;
    std::vector<MethodTags> methods;  ///< RBT1..RBT4, NBT
    std::string report_json;
    std::vector<std::string> files;  ///< written file names relative to out_dir
};

/// load -> detrend -> fit -> diagnostics -> tagging -> excursions. When out_dir is set,
/// writes report.json, series.csv, tags_<method>.csv and excursions_<method>.csv there.
/// Output depends only on the inputs. Errors are rethrown as PipelineError naming the stage.
AnalysisResult analyze(const std::string& input, const AnalyzeOptions& options,
                       const std::optional<std::string>& out_dir = std::nullopt);

/// Same pipeline on an in-memory series.
AnalysisResult analyze_series(ObservedSeries series, const AnalyzeOptions& options,
                              const std::optional<std::string>& out_dir = std::nullopt);

}  // namespace snar
