#pragma once

#include "json_util.hpp"
#include "snar/diagnostics.hpp"
#include "snar/qmle.hpp"

namespace snar {

detail::Json fit_to_json(const FitResult& fit);
detail::Json diagnostic_to_json(const DiagnosticReport& report);

}  // namespace snar
