#pragma once

// The two-to-one squaring cover of the configuration plane and its
// symplectic lift: q = z^2, p = w / (2 conj(z)). The base reflection
// rho(q,p) = (q1,-q2,-p1,p2) has two lifts sigma1(z,w) = (conj z, -conj w)
// and sigma2(z,w) = (-conj z, conj w), which differ by the deck map -id and
// compose to it. A rho-symmetric orbit whose configuration path winds an odd
// number of times around the origin lifts to a single closed curve over two
// base periods, symmetric for sigma1 and doubly symmetric via sigma2. The
// lift is geometric: samples are re-coordinatized and certified; no
// regularized dynamics is integrated, and the lifted curve keeps base-time
// sample indexing.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "orbitk/errors.hpp"
#include "orbitk/orbit.hpp"
#include "orbitk/state.hpp"
#include "orbitk/systems.hpp"

namespace orbitk {

struct LCPoint {
    std::complex<double> z, w;
};

/// Push a regularized point down the cover: q = z^2, p = w / (2 conj(z)).
inline State4 lc_forward(const LCPoint& p) {
    if (std::abs(p.z) == 0.0) throw OriginError("forward map undefined at z = 0");
    const std::complex<double> q = p.z * p.z;
    const std::complex<double> mom = p.w / (2.0 * std::conj(p.z));
    return {q.real(), q.imag(), mom.real(), mom.imag()};
}

/// Lift one phase point through the chosen square-root branch; the result
/// round-trips through lc_forward to the input within 1e-12 (relative).
inline LCPoint lc_lift_point(const State4& s, int branch = 1) {
    const std::complex<double> q{s.q1, s.q2};
    if (std::abs(q) == 0.0) throw OriginError("lift undefined over q = 0");
    std::complex<double> z = std::sqrt(q);
    if (branch < 0) z = -z;
    const LCPoint out{z, 2.0 * std::conj(z) * std::complex<double>{s.p1, s.p2}};
    if (dist_inf(lc_forward(out), s) > 1e-12 * std::max(1.0, norm_inf(s)))
        throw Error("point lift failed its round-trip check");
    return out;
}

inline LCPoint lc_sigma1(const LCPoint& p) { return {std::conj(p.z), -std::conj(p.w)}; }
inline LCPoint lc_sigma2(const LCPoint& p) { return {-std::conj(p.z), std::conj(p.w)}; }
inline State4 lc_rho(const State4& s) { return {s.q1, -s.q2, -s.p1, s.p2}; }

/// Max residual over samples of the two intertwining identities
/// forward(sigma_i(p)) = rho(forward(p)).
inline double lc_involution_check(const std::vector<LCPoint>& samples) {
    double worst = 0;
    for (const LCPoint& p : samples) {
        const State4 down = lc_rho(lc_forward(p));
        worst = std::max(worst, dist_inf(lc_forward(lc_sigma1(p)), down));
        worst = std::max(worst, dist_inf(lc_forward(lc_sigma2(p)), down));
    }
    return worst;
}

namespace detail {

/// Winding number of the configuration path around the origin, by summed
/// principal argument increments. The samples are treated as one closed
/// loop; steps wide enough to make branch tracking ambiguous and totals far
/// from an integer are hard errors, not guesses.
inline int lc_winding(const std::vector<std::complex<double>>& q) {
    const int n = static_cast<int>(q.size());
    double total = 0;
    for (int k = 0; k < n; ++k) {
        const double d = std::arg(q[(k + 1) % n] / q[k]);
        if (std::fabs(d) >= 1.5707963267948966)
            throw Error("configuration samples too sparse for winding/branch tracking");
        total += d;
    }
    const double turns = total / (2.0 * 3.14159265358979323846);
    const double nearest = std::round(turns);
    if (std::fabs(turns - nearest) > 0.25)
        throw Error("winding number ill-determined from samples");
    return static_cast<int>(nearest);
}

/// The square root of q nearest to the previous tracked root. A pick that is
/// not clearly nearer than its antipode means a missed branch cut.
inline std::complex<double> lc_track_root(const std::complex<double>& q,
                                          const std::complex<double>& prev) {
    const std::complex<double> r = std::sqrt(q);
    const double dplus = std::abs(r - prev), dminus = std::abs(-r - prev);
    const std::complex<double> pick = dplus <= dminus ? r : -r;
    const double dpick = std::min(dplus, dminus), dother = std::max(dplus, dminus);
    if (!(dpick < 0.75 * dother))
        throw Error("branch tracking jump between consecutive samples");
    return pick;
}

inline State4 lc_encode(const LCPoint& p) {
    return {p.z.real(), p.z.imag(), p.w.real(), p.w.imag()};
}

inline LCPoint lc_decode(const State4& s) { return {{s.q1, s.q2}, {s.p1, s.p2}}; }

} // namespace detail

struct LiftReport {
    Orbit orbit; // samples encode (Re z, Im z, Re w, Im w); period = 2x base
    int winding = 0;
    double sigma1_residual = 0, sigma2_residual = 0;
    double closure_residual = 0;
};

/// Lift a rho-symmetric orbit through the cover. The configuration path must
/// avoid the origin and wind an odd number of times around it; the branch is
/// tracked continuously over two base periods, after which the curve closes.
/// Both sigma certificates are measured on the lifted samples by
/// mirrored-time matching. For the lifted curve the certificate slots refer
/// to (sigma1, sigma2), not to system involutions.
inline LiftReport lc_lift_orbit(const Orbit& o, int branch = 1, double tol = 1e-8) {
    if (o.sample_t.size() != o.sample_x.size() || o.sample_t.size() < 8)
        throw Error("orbit carries too few samples to lift");
    if (!(o.period > 0)) throw Error("orbit period must be positive");

    // the cover intertwines exactly one base reflection, so the orbit's
    // certified involution must be that rho
    if (o.certificate.sym_inv < 0)
        throw SymmetryViolated("lift needs a certified reflection symmetry");
    const SystemDef sys = system_by_name(o.system);
    if (o.certificate.sym_inv >= static_cast<int>(sys.involutions.size()))
        throw SymmetryViolated("certificate names a missing involution");
    const Involution& inv = sys.involutions[o.certificate.sym_inv];
    const Vec4 rho_signs{1, -1, -1, 1};
    if (inv.signs != rho_signs)
        throw SymmetryViolated("lift needs the reflection (q1,-q2,-p1,p2), got " + inv.name);

    // one loop of distinct samples; a duplicated closing sample is dropped
    const int m_all = static_cast<int>(o.sample_t.size());
    const bool closed_sample =
        std::fabs(o.sample_t.back() - o.period) <= 1e-12 * o.period &&
        dist_inf(o.sample_x.back(), o.sample_x.front()) <= 1e-9 * std::max(1.0, norm_inf(o.sample_x.front()));
    const int m = closed_sample ? m_all - 1 : m_all;

    std::vector<std::complex<double>> q(m);
    for (int k = 0; k < m; ++k) {
        q[k] = {o.sample_x[k].q1, o.sample_x[k].q2};
        if (std::abs(q[k]) <= 1e-12)
            throw OriginError("configuration path passes through the origin");
    }

    LiftReport rep;
    rep.winding = detail::lc_winding(q);
    if (rep.winding % 2 == 0)
        throw EvenWinding("winding number " + std::to_string(rep.winding) +
                          ": the lift is two disjoint loops");

    // track the root over two traversals of the base loop
    std::vector<double> lt;
    std::vector<State4> lx;
    lt.reserve(2 * m);
    lx.reserve(2 * m);
    std::complex<double> prev = lc_lift_point(o.sample_x[0], branch).z;
    for (int pass = 0; pass < 2; ++pass) {
        for (int k = 0; k < m; ++k) {
            const std::complex<double> z = (pass == 0 && k == 0)
                                               ? prev
                                               : detail::lc_track_root(q[k], prev);
            prev = z;
            const std::complex<double> w =
                2.0 * std::conj(z) * std::complex<double>{o.sample_x[k].p1, o.sample_x[k].p2};
            lt.push_back(pass * o.period + o.sample_t[k]);
            lx.push_back(detail::lc_encode({z, w}));
        }
    }
    const std::complex<double> z_close = detail::lc_track_root(q[0], prev);
    rep.closure_residual = std::abs(z_close - detail::lc_decode(lx[0]).z) /
                           std::max(1.0, std::abs(detail::lc_decode(lx[0]).z));
    if (rep.closure_residual > 1e-9)
        throw Error("odd-winding lift failed to close after two traversals");

    // certificates by mirrored-time matching: sigma1 mirrors t -> -t about
    // the start, sigma2 mirrors about the base period (half the lifted one)
    const double T2 = 2.0 * o.period;
    double scale = 1.0;
    for (const State4& x : lx) scale = std::max(scale, norm_inf(x));
    auto at_time = [&](double t) -> const State4* {
        t = std::fmod(t, T2);
        if (t < 0) t += T2;
        double best = 1e300;
        std::size_t bj = 0;
        auto consider = [&](std::size_t j, double shift) {
            const double d = std::fabs(lt[j] + shift - t);
            if (d < best) {
                best = d;
                bj = j;
            }
        };
        const auto it = std::lower_bound(lt.begin(), lt.end(), t);
        if (it != lt.end()) consider(static_cast<std::size_t>(it - lt.begin()), 0);
        if (it != lt.begin()) consider(static_cast<std::size_t>(it - lt.begin()) - 1, 0);
        consider(0, T2); // the start doubles as the wrap point t = 2T
        consider(lt.size() - 1, -T2);
        if (best <= 1e-9 * o.period) return &lx[bj];
        return nullptr;
    };
    int matched = 0;
    for (std::size_t j = 0; j < lt.size(); ++j) {
        const LCPoint p = detail::lc_decode(lx[j]);
        if (const State4* m1 = at_time(T2 - lt[j])) {
            rep.sigma1_residual =
                std::max(rep.sigma1_residual, dist_inf(detail::lc_encode(lc_sigma1(p)), *m1));
            ++matched;
        }
        if (const State4* m2 = at_time(o.period - lt[j]))
            rep.sigma2_residual =
                std::max(rep.sigma2_residual, dist_inf(detail::lc_encode(lc_sigma2(p)), *m2));
    }
    rep.sigma1_residual /= scale;
    rep.sigma2_residual /= scale;
    if (matched < static_cast<int>(lt.size()) / 2)
        throw Error("lifted sample times are not mirror-symmetric enough to certify");
    if (rep.sigma1_residual > tol)
        throw SymmetryViolated("sigma1 certificate residual " +
                               std::to_string(rep.sigma1_residual));
    if (rep.sigma2_residual > tol)
        throw SymmetryViolated("sigma2 certificate residual " +
                               std::to_string(rep.sigma2_residual));

    rep.orbit.system = o.system;
    rep.orbit.id = o.id + "+lc";
    rep.orbit.initial_state = lx.front();
    rep.orbit.period = T2;
    rep.orbit.energy = o.energy;
    rep.orbit.closure_residual = rep.closure_residual;
    rep.orbit.certificate.sym_inv = 0;
    rep.orbit.certificate.sym_residual = rep.sigma1_residual;
    rep.orbit.certificate.doubly = true;
    rep.orbit.certificate.dsym_inv = 1;
    rep.orbit.certificate.dsym_residual = rep.sigma2_residual;
    rep.orbit.sample_t = std::move(lt);
    rep.orbit.sample_x = std::move(lx);
    return rep;
}

} // namespace orbitk
