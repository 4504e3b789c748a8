#include "snar_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "snar/config.hpp"
#include "snar/errors.hpp"
#include "snar/io.hpp"
#include "snar/montecarlo.hpp"
#include "snar/pipeline.hpp"
#include "snar/report.hpp"
#include "snar/simulate.hpp"

namespace snar::cli {

namespace {

std::string real_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& items) {
    std::ostringstream s;
    for (std::size_t i = 0; i < items.size(); ++i) s << (i ? "," : "") << items[i];
    return s.str();
}

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> config;
};

struct ModelFlags {
    std::optional<double> phi;
    std::optional<double> p;
    std::optional<double> sigma2;
    std::optional<std::string> innovation;

    void add(CLI::App* app) {
        app->add_option("--phi", phi, "autoregressive coefficient");
        app->add_option("--p", p, "bubble-state probability");
        app->add_option("--sigma2", sigma2, "innovation variance");
        app->add_option("--innovation", innovation, "normal | laplace | st5");
    }

    void apply(Config& c) const {
        if (phi) c.set("model.phi", real_text(*phi));
        if (p) c.set("model.p", real_text(*p));
        if (sigma2) c.set("model.sigma2", real_text(*sigma2));
        if (innovation) c.set("model.innovation", *innovation);
    }
};

struct InputFlags {
    std::string input;
    std::optional<std::string> column;
    std::optional<std::string> date_column;
    std::optional<std::string> detrend;
    bool joint = false;

    void add(CLI::App* app) {
        app->add_option("--input", input, "CSV file with a header row")->required();
        app->add_option("--column", column, "value column (default y)");
        app->add_option("--date-column", date_column, "optional date column");
        auto* mode = app->add_option("--detrend", detrend, "none | ols | joint");
        app->add_flag("--joint", joint, "same as --detrend joint")->excludes(mode);
    }

    void apply(Config& c) const {
        if (column) c.set("analyze.value_column", *column);
        if (date_column) c.set("analyze.date_column", *date_column);
        if (detrend) c.set("analyze.detrend", *detrend);
        if (joint) c.set("analyze.detrend", "joint");
    }
};

struct StudyFlags {
    std::optional<std::size_t> reps;
    std::vector<std::size_t> n_list;
    std::optional<unsigned> workers;
    bool full_scale = false;

    void add(CLI::App* app) {
        app->add_option("--reps", reps, "replications per sample size");
        app->add_option("--n", n_list, "sample sizes")->delimiter(',');
        app->add_option("--workers", workers, "worker threads (0: all cores)");
        app->add_flag("--full-scale", full_scale, "full replication counts (1000 reps, 2000 ASD paths)");
    }

    void apply(Config& c) const {
        if (full_scale) c.set("study.full_scale", "true");
        if (reps) c.set("study.reps", std::to_string(*reps));
        if (!n_list.empty()) c.set("study.n_list", join(n_list));
        if (workers) c.set("study.workers", std::to_string(*workers));
    }
};

// Writes to the --out path, or to `fallback` when no path was given.
void emit(const std::optional<std::string>& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
    if (!path) {
        body(fallback);
        return;
    }
    const std::filesystem::path p(*path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + *path);
    body(f);
    if (!f) throw Error("write failed for " + *path);
}

struct Prepared {
    ObservedSeries raw;
    std::vector<double> y;
    FitResult fit;
};

Prepared prepare(const InputFlags& in, const AnalyzeOptions& opts) {
    ObservedSeries raw = load_series(in.input, opts.value_column, opts.date_column);
    if (raw.size() < kMinFitLength) throw DegenerateError("at least " + std::to_string(kMinFitLength) + " values are required");
    if (opts.detrend == DetrendMode::Joint) {
        JointDetrendResult j = joint_detrend_fit(raw.values, opts.space, opts.fit);
        return {std::move(raw), std::move(j.trend.y), std::move(j.fit)};
    }
    std::vector<double> y = opts.detrend == DetrendMode::Ols ? detrend(raw.values).y : raw.values;
    FitResult f = fit(y, opts.space, opts.fit);
    return {std::move(raw), std::move(y), std::move(f)};
}

void run_study(StudyKind kind, const Config& c, const Globals& g, std::ostream& out) {
    const StudyConfig sc = study_config_from(c, kind);
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream table;
    std::vector<std::size_t> failures;
    switch (kind) {
        case StudyKind::Estimation: {
            const EstimationStudy s = run_estimation_study(sc);
            write_estimation_csv(table, s);
            failures = s.failures;
            break;
        }
        case StudyKind::Normality: {
            const NormalityStudy s = run_normality_study(sc);
            write_normality_csv(table, s);
            failures = {s.failures};
            break;
        }
        case StudyKind::Size: {
            const SizeStudy s = run_size_study(sc);
            write_size_csv(table, s);
            failures = s.failures;
            break;
        }
        case StudyKind::Tagging: {
            const TaggingStudy s = run_tagging_study(sc);
            write_tagging_csv(table, s);
            failures = s.failures;
            break;
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!g.out) {
        out << table.str();
        return;
    }
    const std::filesystem::path dir(*g.out);
    std::filesystem::create_directories(dir);
    const std::string name = std::string(to_string(kind)) + ".csv";
    emit((dir / name).string(), out, [&](std::ostream& f) { f << table.str(); });
    const StudyManifest m = make_manifest(sc, failures, secs, {name});
    emit((dir / "manifest.json").string(), out, [&](std::ostream& f) { f << manifest_json(m); });
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic nonlinear autoregression: simulation, estimation, diagnostics and bubble tagging", "snar"};
    app.fallthrough();
    app.require_subcommand(1);

    Globals g;
    app.add_option("--seed", g.seed, "master seed (overrides config and SNAR_SEED)");
    app.add_option("--out", g.out, "output file or directory");
    app.add_option("--config", g.config, "INI configuration file");

    ModelFlags sim_model;
    std::optional<std::size_t> sim_n;
    std::optional<std::size_t> sim_burn;
    auto* sim = app.add_subcommand("simulate", "simulate one path and write it as CSV");
    sim_model.add(sim);
    sim->add_option("--n", sim_n, "number of observations after y_0")->required();
    sim->add_option("--burn-in", sim_burn, "discarded warm-up steps");

    InputFlags fit_in;
    auto* fit_cmd = app.add_subcommand("fit", "quasi-maximum likelihood fit; prints JSON");
    fit_in.add(fit_cmd);

    InputFlags diag_in;
    std::vector<int> diag_M;
    std::vector<std::string> diag_tuning;
    auto* diag = app.add_subcommand("diagnose", "portmanteau p-values of the fitted model");
    diag_in.add(diag);
    diag->add_option("--M", diag_M, "lags (default 6,12,18,24)")->delimiter(',');
    diag->add_option("--tuning", diag_tuning, "q90 | q95 | auto (default q90,q95)")->delimiter(',');
    bool diag_json = false;
    diag->add_flag("--json", diag_json, "print JSON instead of the p-value table");

    InputFlags tag_in;
    std::string tag_method = "rbt1";
    std::optional<std::size_t> tag_min;
    std::optional<std::string> tag_excursions;
    auto* tag = app.add_subcommand("tag", "tag bubble states; writes CSV t,y,r_hat,threshold,s_hat");
    tag_in.add(tag);
    tag->add_option("--method", tag_method, "rbt1 | rbt2 | rbt3 | rbt4 | nbt");
    tag->add_option("--min-duration", tag_min, "minimum excursion duration (default 18)");
    tag->add_option("--excursions", tag_excursions, "also write excursions CSV to this path");

    struct StudyCmd {
        StudyKind kind;
        CLI::App* app;
        ModelFlags model;
        StudyFlags flags;
    };
    std::vector<StudyCmd> studies;
    studies.reserve(4);
    for (const auto& [name, kind, help] :
         {std::tuple{"mc-estimate", StudyKind::Estimation, "bias, ESD and ASD table"},
          std::tuple{"mc-normality", StudyKind::Normality, "histogram of sqrt(n)(phi_hat - phi0)"},
          std::tuple{"mc-size", StudyKind::Size, "empirical size of the portmanteau test"},
          std::tuple{"mc-tagging", StudyKind::Tagging, "tagging accuracy table"}}) {
        studies.push_back({kind, app.add_subcommand(name, help), {}, {}});
        studies.back().model.add(studies.back().app);
        studies.back().flags.add(studies.back().app);
    }

    InputFlags an_in;
    std::optional<std::size_t> an_min;
    auto* an = app.add_subcommand("analyze", "full pipeline; writes report.json and CSV artifacts to --out");
    an_in.add(an);
    an->add_option("--min-duration", an_min, "minimum excursion duration (default 18)");

    try {
        std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
        std::reverse(rev.begin(), rev.end());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        Config c = g.config ? Config::from_file(*g.config) : Config{};
        apply_env_overrides(c);
        if (g.seed) c.set("study.seed", std::to_string(*g.seed));

        if (sim->parsed()) {
            sim_model.apply(c);
            if (sim_burn) c.set("study.burn_in", std::to_string(*sim_burn));
            StudyConfig sc = study_config_from(c, StudyKind::Estimation);
            SimulationOptions so;
            so.burn_in = sc.burn_in;
            const SimulatedPath path = simulate(sc.theta0, *sim_n, sc.family, sc.master_seed, so);
            emit(g.out, out, [&](std::ostream& f) { write_path_csv(f, path); });
            return 0;
        }
        if (fit_cmd->parsed()) {
            fit_in.apply(c);
            const AnalyzeOptions opts = analyze_options_from(c);
            const Prepared pr = prepare(fit_in, opts);
            emit(g.out, out, [&](std::ostream& f) { f << fit_result_json(pr.fit); });
            return 0;
        }
        if (diag->parsed()) {
            diag_in.apply(c);
            if (!diag_M.empty()) c.set("diagnostics.M_list", join(diag_M));
            if (!diag_tuning.empty()) c.set("diagnostics.tunings", join(diag_tuning));
            const AnalyzeOptions opts = analyze_options_from(c);
            const Prepared pr = prepare(diag_in, opts);
            std::vector<DiagnosticEntry> entries;
            for (TuningMode mode : opts.tunings) {
                for (int M : opts.M_list) entries.push_back({mode, q_statistic(pr.y, pr.fit, M, mode)});
            }
            std::ostringstream body;
            if (diag_json) {
                body << "[\n";
                for (std::size_t i = 0; i < entries.size(); ++i) {
                    std::string item = diagnostic_json(entries[i].report);
                    item.pop_back();
                    item.insert(1, "\n  \"tuning\": \"" + std::string(to_string(entries[i].tuning)) + "\",");
                    body << (i ? ",\n" : "") << item;
                }
                body << "\n]\n";
            } else {
                body << "tuning,a,M,Q,df,p_value\n";
                for (const DiagnosticEntry& e : entries) {
                    body << to_string(e.tuning) << ',' << real_text(e.report.a) << ',' << e.report.M << ','
                         << real_text(e.report.Q) << ',' << e.report.df << ',' << real_text(e.report.p_value) << '\n';
                }
            }
            emit(g.out, out, [&](std::ostream& f) { f << body.str(); });
            return 0;
        }
        if (tag->parsed()) {
            tag_in.apply(c);
            if (tag_min) c.set("tagging.min_duration", std::to_string(*tag_min));
            const AnalyzeOptions opts = analyze_options_from(c);
            const TagMethod method = parse_tag_method(tag_method);
            const Prepared pr = prepare(tag_in, opts);
            const std::vector<TagMethod> methods{method};
            const TagResult t = tag_all(pr.y, pr.fit.theta_hat, methods, {opts.calibrate_all, opts.rule4_reversed}).front();
            const std::span<const std::string> dates(pr.raw.dates);
            emit(g.out, out, [&](std::ostream& f) { write_tag_csv(f, pr.y, t, dates); });
            if (tag_excursions) {
                const auto ex = excursions(t.s_hat, opts.min_duration);
                emit(tag_excursions, out, [&](std::ostream& f) { write_excursions_csv(f, ex, dates); });
            }
            return 0;
        }
        for (StudyCmd& s : studies) {
            if (!s.app->parsed()) continue;
            s.model.apply(c);
            s.flags.apply(c);
            run_study(s.kind, c, g, out);
            return 0;
        }
        if (an->parsed()) {
            an_in.apply(c);
            if (an_min) c.set("tagging.min_duration", std::to_string(*an_min));
            if (g.out) c.set("analyze.out_dir", *g.out);
            const AnalyzeOptions opts = analyze_options_from(c);
            const std::string dir = c.get_string("analyze.out_dir", "analysis");
            const AnalysisResult r = analyze(an_in.input, opts, dir);
            out << "wrote " << r.files.size() << " files to " << dir << '\n';
            return 0;
        }
    } catch (const PipelineError& e) {
        err << "error in stage " << e.stage() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    err << app.help();
    return 1;
}

int cli_dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);
    return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace snar::cli
