#pragma once

#include <cmath>

#include "orbitk/linalg.hpp"

namespace orbitk {

/// Phase-space point of a two degree of freedom system, coordinate order
/// (q1, q2, p1, p2) matching the linear algebra helpers.
struct State4 {
    double q1 = 0, q2 = 0, p1 = 0, p2 = 0;

    Vec4 vec() const { return {q1, q2, p1, p2}; }
    static State4 from(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

inline bool all_finite(const State4& x) {
    return std::isfinite(x.q1) && std::isfinite(x.q2) &&
           std::isfinite(x.p1) && std::isfinite(x.p2);
}

inline double dist_inf(const State4& x, const State4& y) {
    return norm_inf(sub(x.vec(), y.vec()));
}

inline double norm_inf(const State4& x) { return norm_inf(x.vec()); }

} // namespace orbitk
