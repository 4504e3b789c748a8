#include "snar/report.hpp"

#include <ostream>

#include "format.hpp"
#include "json_util.hpp"
#include "snar/errors.hpp"
#include "report_json.hpp"

namespace snar {

using detail::fmt17;
using detail::Json;
using detail::num;

Json fit_to_json(const FitResult& fit) {
    Json j;
    j["theta_hat"] = {{"phi", fit.theta_hat.phi()}, {"p", fit.theta_hat.p()}, {"sigma2", fit.theta_hat.sigma2()}};
    j["se"] = {{"phi", num(fit.se(0))}, {"p", num(fit.se(1))}, {"sigma2", num(fit.se(2))}};
    j["cov"] = detail::mat(fit.cov);
    j["neg_loglik"] = num(fit.neg_loglik);
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["n"] = fit.n;
    j["at_boundary"] = fit.at_boundary;
    j["warnings"] = fit.warnings;
    return j;
}

Json diagnostic_to_json(const DiagnosticReport& r) {
    Json j;
    j["a"] = num(r.a);
    j["M"] = r.M;
    j["rho_hat"] = detail::vec(r.rho_hat);
    j["Q"] = num(r.Q);
    j["df"] = r.df;
    j["p_value"] = num(r.p_value);
    return j;
}

std::string fit_result_json(const FitResult& fit, int indent) { return fit_to_json(fit).dump(indent) + "\n"; }

std::string diagnostic_json(const DiagnosticReport& report, int indent) {
    return diagnostic_to_json(report).dump(indent) + "\n";
}

void write_tag_csv(std::ostream& out, std::span<const double> y, const TagResult& tags,
                   std::span<const std::string> dates) {
    const std::size_t n = tags.s_hat.size();
    if (y.size() != n + 1) throw DomainError("tag series and y lengths differ");
    const bool with_dates = !dates.empty();
    if (with_dates && dates.size() != y.size()) throw DomainError("dates and y lengths differ");
    out << (with_dates ? "t,date,y,r_hat,threshold,s_hat\n" : "t,y,r_hat,threshold,s_hat\n");
    for (std::size_t i = 0; i < n; ++i) {
        out << i + 1 << ',';
        if (with_dates) out << dates[i + 1] << ',';
        out << fmt17(y[i + 1]) << ',';
        if (!tags.r_hat.empty()) out << fmt17(tags.r_hat[i]);
        out << ',' << fmt17(tags.threshold[i]) << ',' << static_cast<int>(tags.s_hat[i]) << '\n';
    }
}

void write_excursions_csv(std::ostream& out, std::span<const Excursion> list, std::span<const std::string> dates) {
    const bool with_dates = !dates.empty();
    out << (with_dates ? "start,end,duration,start_date,end_date\n" : "start,end,duration\n");
    for (const Excursion& e : list) {
        out << e.start + 1 << ',' << e.end + 1 << ',' << e.duration;
        if (with_dates) {
            if (e.end + 1 >= dates.size()) throw DomainError("excursion outside the dated range");
            out << ',' << dates[e.start + 1] << ',' << dates[e.end + 1];
        }
        out << '\n';
    }
}

}  // namespace snar
