#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace snar::detail {

// Shortest round-trippable form is not required; 17 significant digits always round-trips.
inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace snar::detail
