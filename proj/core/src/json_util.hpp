#pragma once

#include <cmath>

#include <Eigen/Core>

#include "json.hpp"

namespace snar::detail {

using Json = nlohmann::ordered_json;

inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class Derived>
Json vec(const Eigen::MatrixBase<Derived>& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
    return out;
}

template <class Derived>
Json mat(const Eigen::MatrixBase<Derived>& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec(m.row(i)));
    return out;
}

}  // namespace snar::detail
