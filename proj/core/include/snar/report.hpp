#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "snar/diagnostics.hpp"
#include "snar/qmle.hpp"
#include "snar/tagging.hpp"

namespace snar {

/// JSON object {theta_hat: {phi, p, sigma2}, se, cov, neg_loglik, converged,
/// iterations, n, at_boundary, warnings}. Non-finite numbers become null.
std::string fit_result_json(const FitResult& fit, int indent = 2);

/// JSON object {a, M, rho_hat, Q, df, p_value}; a is null when infinite.
std::string diagnostic_json(const DiagnosticReport& report, int indent = 2);

/// CSV `t,[date,]y,r_hat,threshold,s_hat` for t = 1..n, where y holds y_0..y_n
/// and dates (if non-empty) has the same length as y. r_hat is blank for NBT.
void write_tag_csv(std::ostream& out, std::span<const double> y, const TagResult& tags,
                   std::span<const std::string> dates = {});

/// CSV `start,end,duration[,start_date,end_date]`. Excursion positions index the
/// state sequence of a TagResult, so position i is reported as t = i + 1.
void write_excursions_csv(std::ostream& out, std::span<const Excursion> list,
                          std::span<const std::string> dates = {});

}  // namespace snar
