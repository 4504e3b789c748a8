#include "snar/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "format.hpp"
#include "json_util.hpp"
#include "report_json.hpp"
#include "snar/errors.hpp"
#include "snar/report.hpp"

namespace snar {

namespace {

using detail::Json;
using detail::num;

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
}

std::string lower_name(TagMethod m) {
    std::string s(to_string(m));
    for (char& c : s) c = static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    return s;
}

Json interval(std::pair<double, double> ci) { return Json::array({num(ci.first), num(ci.second)}); }

Json build_report(const AnalysisResult& r, const AnalyzeOptions& o) {
    const std::size_t n = r.y.size();
    Json j;
    Json input;
    input["source"] = r.series.source;
    input["value_column"] = o.value_column;
    input["date_column"] = o.date_column ? Json(*o.date_column) : Json(nullptr);
    input["n"] = n;
    j["input"] = input;

    Json d;
    d["mode"] = to_string(r.detrend_mode);
    d["b0"] = r.detrend_mode == DetrendMode::None ? Json(nullptr) : num(r.b0);
    d["b1"] = r.detrend_mode == DetrendMode::None ? Json(nullptr) : num(r.b1);
    d["rounds"] = r.detrend_rounds;
    d["converged"] = r.detrend_converged;
    j["detrend"] = d;

    j["fit"] = fit_to_json(r.fit);

    Json ci;
    const double alpha = 0.05;
    const Vec3 se = r.fit.se;
    const SnarParams& t = r.fit.theta_hat;
    ci["level"] = 1.0 - alpha;
    ci["phi"] = interval(ci_wald(t.phi(), se(0), alpha));
    ci["p"] = std::isfinite(se(1)) && se(1) > 0.0
                  ? interval(ci_p_delta(t.p(), std::sqrt(static_cast<double>(r.fit.n)) * se(1), r.fit.n, alpha))
                  : Json::array({nullptr, nullptr});
    ci["sigma2"] = interval(ci_wald(t.sigma2(), se(2), alpha));
    j["confidence_intervals"] = ci;

    Json diags = Json::array();
    for (const DiagnosticEntry& e : r.diagnostics) {
        Json item;
        item["tuning"] = std::string(to_string(e.tuning));
        const Json body = diagnostic_to_json(e.report);
        for (const auto& [k, v] : body.items()) item[k] = v;
        diags.push_back(item);
    }
    j["diagnostics"] = diags;

    Json tagging;
    tagging["min_duration"] = o.min_duration;
    tagging["highlight_duration"] = o.highlight_duration;
    tagging["calibrate_all"] = o.calibrate_all;
    Json methods = Json::array();
    for (const MethodTags& m : r.methods) {
        Json item;
        item["method"] = std::string(to_string(m.tags.method));
        item["bubble_count"] = m.tags.bubble_count();
        item["null_count"] = m.tags.s_hat.size() - m.tags.bubble_count();
        Json ex = Json::array();
        for (const Excursion& e : m.excursions) {
            Json x;
            x["start"] = e.start + 1;
            x["end"] = e.end + 1;
            x["duration"] = e.duration;
            x["highlight"] = e.duration >= o.highlight_duration;
            if (r.series.has_dates()) {
                x["start_date"] = r.series.dates[e.start + 1];
                x["end_date"] = r.series.dates[e.end + 1];
            }
            ex.push_back(x);
        }
        item["excursions"] = ex;
        tagging["methods"].push_back(item);
    }
    j["tagging"] = tagging;
    j["files"] = r.files;
    return j;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    body(out);
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

AnalysisResult analyze(const std::string& input, const AnalyzeOptions& options,
                       const std::optional<std::string>& out_dir) {
    ObservedSeries series = stage("load", [&] { return load_series(input, options.value_column, options.date_column); });
    return analyze_series(std::move(series), options, out_dir);
}

AnalysisResult analyze_series(ObservedSeries series, const AnalyzeOptions& options,
                              const std::optional<std::string>& out_dir) {
    stage("load", [&] {
        if (series.size() < kMinFitLength) {
            throw DegenerateError("series has " + std::to_string(series.size()) + " values; at least " +
                                  std::to_string(kMinFitLength) + " are required");
        }
        if (series.has_dates() && series.dates.size() != series.size()) throw DomainError("dates and values differ in length");
        return 0;
    });

    const std::span<const double> x(series.values);
    std::vector<double> y;
    double b0 = 0.0;
    double b1 = 0.0;
    int rounds = 0;
    bool converged = true;
    std::optional<FitResult> fitted;
    stage("detrend", [&] {
        if (options.detrend == DetrendMode::Ols) {
            DetrendResult d = detrend(x);
            b0 = d.b0;
            b1 = d.b1;
            y = std::move(d.y);
        } else if (options.detrend == DetrendMode::Joint) {
            JointDetrendResult j = joint_detrend_fit(x, options.space, options.fit);
            b0 = j.trend.b0;
            b1 = j.trend.b1;
            y = std::move(j.trend.y);
            rounds = j.rounds;
            converged = j.converged;
            fitted.emplace(std::move(j.fit));
        } else {
            y.assign(x.begin(), x.end());
        }
        return 0;
    });
    if (!fitted) fitted.emplace(stage("fit", [&] { return fit(y, options.space, options.fit); }));

    AnalysisResult r{std::move(series), options.detrend, b0, b1, rounds, converged, std::move(y), std::move(*fitted),
                     {}, {}, {}, {}};

    stage("diagnostics", [&] {
        for (TuningMode mode : options.tunings) {
            for (int M : options.M_list) r.diagnostics.push_back({mode, q_statistic(r.y, r.fit, M, mode)});
        }
        return 0;
    });

    stage("tagging", [&] {
        const std::vector<TagMethod> all = {TagMethod::RBT1, TagMethod::RBT2, TagMethod::RBT3, TagMethod::RBT4,
                                            TagMethod::NBT};
        const TagAllOptions opts{options.calibrate_all, options.rule4_reversed};
        for (TagResult& t : tag_all(r.y, r.fit.theta_hat, all, opts)) {
            std::vector<Excursion> ex = excursions(t.s_hat, options.min_duration);
            r.methods.push_back({std::move(t), std::move(ex)});
        }
        return 0;
    });

    if (out_dir) {
        r.files.push_back("report.json");
        r.files.push_back("series.csv");
        for (const MethodTags& m : r.methods) {
            r.files.push_back("tags_" + lower_name(m.tags.method) + ".csv");
            r.files.push_back("excursions_" + lower_name(m.tags.method) + ".csv");
        }
    }
    r.report_json = build_report(r, options).dump(2) + "\n";

    if (out_dir) {
        stage("write", [&] {
            const std::filesystem::path dir(*out_dir);
            std::filesystem::create_directories(dir);
            const std::span<const std::string> dates(r.series.dates);
            write_file(dir / "report.json", [&](std::ostream& out) { out << r.report_json; });
            write_file(dir / "series.csv", [&](std::ostream& out) {
                out << (r.series.has_dates() ? "t,date,x,trend,y\n" : "t,x,trend,y\n");
                for (std::size_t i = 0; i < r.y.size(); ++i) {
                    const double trend = r.series.values[i] - r.y[i];
                    out << i << ',';
                    if (r.series.has_dates()) out << r.series.dates[i] << ',';
                    out << detail::fmt17(r.series.values[i]) << ',' << detail::fmt17(trend) << ','
                        << detail::fmt17(r.y[i]) << '\n';
                }
            });
            for (const MethodTags& m : r.methods) {
                const std::string name = lower_name(m.tags.method);
                write_file(dir / ("tags_" + name + ".csv"), [&](std::ostream& out) { write_tag_csv(out, r.y, m.tags, dates); });
                write_file(dir / ("excursions_" + name + ".csv"),
                           [&](std::ostream& out) { write_excursions_csv(out, m.excursions, dates); });
            }
            return 0;
        });
    }
    return r;
}

}  // namespace snar
