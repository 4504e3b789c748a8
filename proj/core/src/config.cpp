#include "snar/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "snar/errors.hpp"

namespace snar {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& text) {
    throw DomainError("config key " + key + ": cannot parse '" + text + "'");
}

template <class T>
T parse_integer(const std::string& key, const std::string& text) {
    T v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text);
    return v;
}

double parse_real(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (text.empty() || ec != std::errc() || ptr != end) bad_value(key, text);
    return v;
}

Config from_ptree(const boost::property_tree::ptree& tree) {
    Config out;
    for (const auto& [section, node] : tree) {
        if (node.empty()) {
            out.set(section, trim(node.data()));
            continue;
        }
        for (const auto& [name, leaf] : node) out.set(section + "." + name, trim(leaf.data()));
    }
    return out;
}

}  // namespace

Config Config::from_file(const std::string& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        if (e.line() == 0) throw Error("cannot read config " + path + ": " + e.message());
        throw ParseError(path + ": " + e.message(), e.line());
    }
    return from_ptree(tree);
}

Config Config::from_string(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError(e.message(), e.line());
    }
    return from_ptree(tree);
}

std::optional<std::string> Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_real(key, *v) : fallback;
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
    const auto v = get(key);
    return v ? parse_integer<std::size_t>(key, *v) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    return v ? parse_integer<std::uint64_t>(key, *v) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    const std::string s = lower(*v);
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    bad_value(key, *v);
}

std::vector<std::string> Config::get_list(const std::string& key, const std::vector<std::string>& fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<std::string> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void apply_env_overrides(Config& config) {
    if (const char* seed = std::getenv("SNAR_SEED"); seed != nullptr && *seed != '\0') config.set("study.seed", seed);
    if (const char* dir = std::getenv("SNAR_OUT_DIR"); dir != nullptr && *dir != '\0') config.set("analyze.out_dir", dir);
}

ParamSpace param_space_from(const Config& c) {
    const ParamSpace d = ParamSpace::default_space();
    const Interval phi{c.get_double("bounds.phi_lower", d.phi_regions().front().lower),
                       c.get_double("bounds.phi_upper", d.phi_regions().front().upper)};
    std::vector<Interval> regions{phi};
    if (c.get_bool("bounds.allow_negative_phi", false)) regions.push_back({-phi.upper, -phi.lower});
    const Interval p{c.get_double("bounds.p_lower", d.p().lower), c.get_double("bounds.p_upper", d.p().upper)};
    const Interval s2{c.get_double("bounds.sigma2_lower", d.sigma2().lower),
                      c.get_double("bounds.sigma2_upper", d.sigma2().upper)};
    return ParamSpace::make(std::move(regions), p, s2);
}

FitConfig fit_config_from(const Config& c) {
    FitConfig f;
    f.n_starts = static_cast<int>(c.get_size("fit.n_starts", static_cast<std::size_t>(f.n_starts)));
    f.minimizer.max_iterations =
        static_cast<int>(c.get_size("fit.max_iterations", static_cast<std::size_t>(f.minimizer.max_iterations)));
    f.minimizer.grad_tol = c.get_double("fit.grad_tol", f.minimizer.grad_tol);
    return f;
}

StudyConfig study_config_from(const Config& c, StudyKind kind) {
    StudyConfig s;
    s.kind = kind;
    if (c.get_bool("study.full_scale", false)) s.use_full_scale();

    const SnarParams t = s.theta0;
    s.theta0 = validate_params(c.get_double("model.phi", t.phi()), c.get_double("model.p", t.p()),
                               c.get_double("model.sigma2", t.sigma2()));
    const InnovationKind ik = parse_innovation_kind(c.get_string("model.innovation", "normal"));
    s.family = InnovationFamily::make(ik, std::sqrt(s.theta0.sigma2()));
    s.space = param_space_from(c);
    s.fit = fit_config_from(c);

    s.master_seed = c.get_u64("study.seed", s.master_seed);
    s.reps = c.get_size("study.reps", s.reps);
    s.workers = static_cast<unsigned>(c.get_size("study.workers", s.workers));
    s.burn_in = c.get_size("study.burn_in", s.burn_in);
    if (c.has("study.n_list")) {
        s.n_list.clear();
        for (const auto& item : c.get_list("study.n_list", {})) s.n_list.push_back(parse_integer<std::size_t>("study.n_list", item));
    }

    s.asd_reps = c.get_size("asd.reps", s.asd_reps);
    s.asd_length = c.get_size("asd.length", s.asd_length);
    if (const auto at = c.get("asd.at")) {
        const std::string v = lower(*at);
        if (v == "theta0") s.asd_at = AsdAt::Theta0;
        else if (v == "theta_hat") s.asd_at = AsdAt::ThetaHat;
        else bad_value("asd.at", *at);
    }

    s.bins = static_cast<int>(c.get_size("normality.bins", static_cast<std::size_t>(s.bins)));

    if (c.has("diagnostics.M_list")) {
        s.M_list.clear();
        for (const auto& item : c.get_list("diagnostics.M_list", {})) s.M_list.push_back(parse_integer<int>("diagnostics.M_list", item));
    }
    if (const auto t2 = c.get("diagnostics.tuning")) s.tuning = parse_tuning_mode(*t2);
    if (c.has("diagnostics.alphas")) {
        s.alphas.clear();
        for (const auto& item : c.get_list("diagnostics.alphas", {})) s.alphas.push_back(parse_real("diagnostics.alphas", item));
    }
    if (const auto dgp = c.get("diagnostics.dgp")) {
        const std::string v = lower(*dgp);
        if (v == "snar") s.dgp = SizeDgp::Snar;
        else if (v == "ar1") s.dgp = SizeDgp::Ar1;
        else bad_value("diagnostics.dgp", *dgp);
    }
    s.ar_coef = c.get_double("diagnostics.ar_coef", s.ar_coef);

    if (c.has("tagging.methods")) {
        s.methods.clear();
        for (const auto& item : c.get_list("tagging.methods", {})) s.methods.push_back(parse_tag_method(item));
    }
    s.calibrate_all = c.get_bool("tagging.calibrate_all", s.calibrate_all);
    s.rule4_reversed = c.get_bool("tagging.rule4_reversed", s.rule4_reversed);

    s.validate();
    return s;
}

DetrendMode parse_detrend_mode(const std::string& name) {
    const std::string v = lower(trim(name));
    if (v == "none") return DetrendMode::None;
    if (v == "ols") return DetrendMode::Ols;
    if (v == "joint") return DetrendMode::Joint;
    throw DomainError("unknown detrend mode: " + name);
}

std::string to_string(DetrendMode mode) {
    switch (mode) {
        case DetrendMode::None: return "none";
        case DetrendMode::Ols: return "ols";
        case DetrendMode::Joint: return "joint";
    }
    return "none";
}

AnalyzeOptions analyze_options_from(const Config& c) {
    AnalyzeOptions a;
    a.value_column = c.get_string("analyze.value_column", a.value_column);
    if (const auto d = c.get("analyze.date_column"); d && !d->empty()) a.date_column = *d;
    if (const auto d = c.get("analyze.detrend")) a.detrend = parse_detrend_mode(*d);
    if (c.has("diagnostics.M_list")) {
        a.M_list.clear();
        for (const auto& item : c.get_list("diagnostics.M_list", {})) a.M_list.push_back(parse_integer<int>("diagnostics.M_list", item));
    }
    if (c.has("diagnostics.tunings")) {
        a.tunings.clear();
        for (const auto& item : c.get_list("diagnostics.tunings", {})) a.tunings.push_back(parse_tuning_mode(item));
    }
    a.min_duration = c.get_size("tagging.min_duration", a.min_duration);
    a.highlight_duration = c.get_size("tagging.highlight_duration", a.highlight_duration);
    a.calibrate_all = c.get_bool("tagging.calibrate_all", a.calibrate_all);
    a.rule4_reversed = c.get_bool("tagging.rule4_reversed", a.rule4_reversed);
    a.space = param_space_from(c);
    a.fit = fit_config_from(c);
    return a;
}

}  // namespace snar
