#pragma once

// Reduced return maps of reflection-symmetric periodic orbits. At a point of
// the fixed set of a reflection, the energy shell splits into the flow
// direction, a direction tangent to the fixed set, and their symplectic
// complements. Pairing the linearized flow against a frame (e_plus, e_minus)
// adapted to that splitting reduces the 4x4 monodromy to a unit-determinant
// 2x2 matrix with equal diagonal entries. The two half-period maps form a
// couple (A, B); the full-period reductions at the two symmetric points are
// B*A and A*B, which is what ties the two sign invariants of an orbit
// together.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbitk/errors.hpp"
#include "orbitk/flow.hpp"
#include "orbitk/linalg.hpp"
#include "orbitk/orbit.hpp"
#include "orbitk/real_sl2.hpp"
#include "orbitk/state.hpp"
#include "orbitk/systems.hpp"

namespace orbitk {

/// Symplectic frame for the reduced transverse space at a fixed-set point.
/// e_plus is invariant under the reflection and tangent to Fix inside the
/// energy level; e_minus is anti-invariant, transverse to the flow, and
/// normalized so omega(e_plus, e_minus) = 1.
struct ReducedFrame {
    State4 base;
    Vec4 e_plus{}, e_minus{};
    double residual = 0; // worst construction identity defect, relative
};

/// Build the frame at x on Fix(inv). Orientation: e_plus points toward the
/// increasing first chart coordinate (second if the first component is
/// negligible), which pins the frame up to the scaling the invariants do not
/// see. Throws ZeroVectorField at equilibria, TangencyError when the energy
/// level is tangent to the fixed set, SymmetryViolated off the fixed set.
inline ReducedFrame build_reduced_frame(const SystemDef& s, const Involution& inv,
                                        const State4& x, double tol = 1e-9) {
    const double xscale = std::max(1.0, norm_inf(x));
    if (inv.fixed_set_residual(x) > tol * xscale)
        throw SymmetryViolated("build_reduced_frame: base point is off the fixed set of " +
                               inv.name);

    const Vec4 xv = s.vector_field_vec(x.vec());
    const double xnorm = norm2(xv);
    if (xnorm <= 1e-10 * xscale)
        throw ZeroVectorField("build_reduced_frame: equilibrium point");

    const Vec4 g = s.grad(x);
    const double gscale = std::max(1.0, norm2(g));
    const int c0 = inv.chart[0], c1 = inv.chart[1];
    double alpha = g[c1], beta = -g[c0];
    const double tang = std::hypot(alpha, beta);
    if (tang <= 1e-12 * gscale)
        throw TangencyError("build_reduced_frame: energy level tangent to Fix(" + inv.name +
                            ")");
    alpha /= tang;
    beta /= tang;
    if (alpha < 0 || (std::fabs(alpha) <= 1e-14 && beta < 0)) {
        alpha = -alpha;
        beta = -beta;
    }
    Vec4 ep{};
    ep[c0] = alpha;
    ep[c1] = beta;

    // Anti-invariant complement: normal coordinate axes, with the flow
    // direction projected out. Zeroing the chart components of the field
    // first keeps the result exactly anti-invariant.
    const auto nn = inv.normal_indices();
    Vec4 xm{};
    xm[nn[0]] = xv[nn[0]];
    xm[nn[1]] = xv[nn[1]];
    const double xmnorm = norm2(xm);
    if (xmnorm <= 1e-10 * xscale)
        throw ZeroVectorField("build_reduced_frame: field has no transverse component");
    const Vec4 xhat = scale(xm, 1.0 / xmnorm);

    const int pick = std::fabs(xhat[nn[0]]) <= std::fabs(xhat[nn[1]]) ? nn[0] : nn[1];
    Vec4 w{};
    w[pick] = 1.0;
    w = sub(w, scale(xhat, dot(w, xhat)));

    const double pairing = omega(ep, w);
    if (std::fabs(pairing) <= 1e-12 * norm2(w))
        throw TangencyError("build_reduced_frame: degenerate symplectic pairing");
    const Vec4 em = scale(w, 1.0 / pairing);

    ReducedFrame f;
    f.base = x;
    f.e_plus = ep;
    f.e_minus = em;
    const double r_fix = inv.fixed_set_residual(x) / xscale;
    const double r_plus = std::fabs(dot(g, ep)) / gscale;
    const double r_minus = std::fabs(dot(g, em)) / (gscale * norm2(em));
    const double r_omega = std::fabs(omega(ep, em) - 1.0);
    f.residual = std::max(std::max(r_fix, r_omega), std::max(r_plus, r_minus));
    return f;
}

/// Express the action of M on the reduced transverse space in the given
/// frames. Both frame vectors are omega-orthogonal to the flow direction, so
/// the pairing is insensitive to components along it. The determinant is
/// polished to exactly 1 when within tol of it; larger deviations are a hard
/// error rather than something to normalize away.
inline RealSL2 reduce_map(const Mat4& m, const ReducedFrame& from, const ReducedFrame& to,
                          const SystemDef& s, double tol = 1e-6) {
    const Vec4 g_to = s.grad(to.base);
    const double gscale = std::max(1.0, norm2(g_to));
    const double s_to = omega(to.e_plus, to.e_minus);

    const Vec4 vp = matvec(m, from.e_plus);
    const Vec4 vm = matvec(m, from.e_minus);
    for (const Vec4* v : {&vp, &vm}) {
        if (std::fabs(dot(g_to, *v)) > tol * gscale * std::max(1.0, norm2(*v)))
            throw NotEnergyPreserving("reduce_map: image leaves the energy level");
    }

    const double a = omega(vp, to.e_minus) / s_to;
    const double c = omega(to.e_plus, vp) / s_to;
    const double b = omega(vm, to.e_minus) / s_to;
    const double d = omega(to.e_plus, vm) / s_to;

    const double dt = a * d - b * c;
    const double scale2 = std::max(1.0, std::max(std::fabs(a) + std::fabs(b),
                                                 std::fabs(c) + std::fabs(d)));
    if (!(std::fabs(dt - 1.0) <= tol * scale2 * scale2))
        throw DeterminantError("reduce_map: reduced determinant " + std::to_string(dt) +
                               " too far from 1");
    const double r = 1.0 / std::sqrt(dt);
    return make_sl2(a * r, b * r, c * r, d * r);
}

enum class CZParity { Even, Odd, Undefined };

inline const char* to_string(CZParity p) {
    switch (p) {
        case CZParity::Even: return "even";
        case CZParity::Odd: return "odd";
        case CZParity::Undefined: return "undefined";
    }
    return "?";
}

struct ReportResiduals {
    double fixed_set_0 = 0, fixed_set_half = 0; // endpoint distance to Fix, relative
    double frame_0 = 0, frame_half = 0;         // frame construction defects
    double coninv_0 = 0, coninv_half = 0;       // |R M R - M^{-1}| / max(1, |M|)
    double slr_0 = 0, slr_half = 0;             // |a - d| / max(1, |M|)
    double product_0 = 0, product_half = 0;     // couple product vs direct reduction
    double couple = 0;                          // partner relation defect
    double trace_gap = 0;                       // |tr M_0 - tr M_half|
    double field_fix = 0;                       // |M X - X| / max(1, |X|)
    double return_gap = 0;                      // full-period closure via the halves
    double energy_drift = 0;
    double symplectic = 0;
};

struct MonodromyReport {
    std::string system, orbit_id;
    bool doubly_symmetric = false;
    double period = 0, energy = 0, trace = 0;
    Mat4 monodromy{};                // full 4x4 differential at the start point
    RealSL2 half_first, half_second; // reduced maps 0 -> T/2 and T/2 -> T
    RealCouple couple;               // (half_first, half_second)
    RealSL2 reduced_0, reduced_half; // full-period reductions at both points
    std::optional<KreinSign> b_sign_0, b_sign_half; // empty in the degenerate band
    OrbitClass classification = OrbitClass::Elliptic;
    CZParity cz_parity = CZParity::Undefined;
    ReportResiduals residuals;
};

struct ReportOptions {
    double tol = 1e-6;         // residual gates: frames, couple, reductions
    double band = kTraceBand;  // degenerate classification half-width
    IntegrateOptions integ{};
};

namespace detail {

inline double sl2_diff(const RealSL2& x, const RealSL2& y) {
    return std::max(std::max(std::fabs(x.a - y.a), std::fabs(x.b - y.b)),
                    std::max(std::fabs(x.c - y.c), std::fabs(x.d - y.d)));
}

inline CZParity parity_of(OrbitClass c) {
    switch (c) {
        case OrbitClass::PositiveHyperbolic: return CZParity::Even;
        case OrbitClass::Elliptic:
        case OrbitClass::NegativeHyperbolic: return CZParity::Odd;
        default: return CZParity::Undefined;
    }
}

inline std::optional<KreinSign> try_sign(const RealSL2& m, double band, double form_tol) {
    try {
        return real_krein_sign(m, band, form_tol);
    } catch (const DegenerateTrace&) {
        return std::nullopt;
    }
}

} // namespace detail

/// Full analysis of a symmetric periodic orbit: two variational half-period
/// runs framed by the certificate involution at t = 0 and t = T/2. The
/// reported couple is (first half, second half); the couple products
/// reproduce the full-period reductions at the two symmetric points, which
/// are also computed directly from the 4x4 monodromies as a cross-check.
inline MonodromyReport symmetric_orbit_report(const SystemDef& s, const Orbit& o,
                                              const ReportOptions& opts = {}) {
    const int ninv = static_cast<int>(s.involutions.size());
    if (o.certificate.sym_inv < 0 || o.certificate.sym_inv >= ninv)
        throw SymmetryViolated("symmetric_orbit_report: orbit has no usable certificate");
    if (!(o.period > 0)) throw Error("symmetric_orbit_report: period must be positive");
    const Involution& inv = s.involutions[o.certificate.sym_inv];

    const State4 x0 = o.initial_state;
    const Trajectory run1 = integrate_variational(s, x0, 0.5 * o.period, opts.integ);
    const State4 xh = run1.end_state();
    const Mat4 d1 = run1.end_frame();
    const Trajectory run2 = integrate_variational(s, xh, 0.5 * o.period, opts.integ);
    const State4 xb = run2.end_state();
    const Mat4 d2 = run2.end_frame();

    const double fix0 = inv.fixed_set_residual(x0) / std::max(1.0, norm_inf(x0));
    const double fixh = inv.fixed_set_residual(xh) / std::max(1.0, norm_inf(xh));
    if (fix0 > opts.tol || fixh > opts.tol)
        throw SymmetryViolated("symmetric_orbit_report: orbit endpoints miss the fixed set of " +
                               inv.name);

    const ReducedFrame f0 = build_reduced_frame(s, inv, x0, opts.tol);
    const ReducedFrame fh = build_reduced_frame(s, inv, xh, opts.tol);

    const RealSL2 psi = reduce_map(d1, f0, fh, s, opts.tol);
    const RealSL2 phi = reduce_map(d2, fh, f0, s, opts.tol);
    const Mat4 m4_0 = matmul(d2, d1);
    const Mat4 m4_h = matmul(d1, d2);
    const RealSL2 m0 = reduce_map(m4_0, f0, f0, s, opts.tol);
    const RealSL2 mh = reduce_map(m4_h, fh, fh, s, opts.tol);

    MonodromyReport r;
    r.system = o.system;
    r.orbit_id = o.id;
    r.doubly_symmetric = o.certificate.doubly;
    r.period = o.period;
    r.energy = o.energy;
    r.monodromy = m4_0;
    r.half_first = psi;
    r.half_second = phi;
    r.couple = make_couple(psi, phi, opts.tol);
    r.reduced_0 = m0;
    r.reduced_half = mh;
    r.trace = trace(m0);
    r.classification = classify(m0, opts.band);
    r.cz_parity = detail::parity_of(r.classification);
    r.b_sign_0 = detail::try_sign(m0, opts.band, opts.tol);
    r.b_sign_half = detail::try_sign(mh, opts.band, opts.tol);

    ReportResiduals& res = r.residuals;
    res.fixed_set_0 = fix0;
    res.fixed_set_half = fixh;
    res.frame_0 = f0.residual;
    res.frame_half = fh.residual;
    res.coninv_0 = detail::sl2_diff(reflect(m0), inverse(m0)) / std::max(1.0, norm_inf(m0));
    res.coninv_half = detail::sl2_diff(reflect(mh), inverse(mh)) / std::max(1.0, norm_inf(mh));
    res.slr_0 = std::fabs(m0.a - m0.d) / std::max(1.0, norm_inf(m0));
    res.slr_half = std::fabs(mh.a - mh.d) / std::max(1.0, norm_inf(mh));
    res.product_0 = detail::sl2_diff(mul(phi, psi), m0) / std::max(1.0, norm_inf(m0));
    res.product_half = detail::sl2_diff(mul(psi, phi), mh) / std::max(1.0, norm_inf(mh));
    res.couple = detail::sl2_diff(phi, couple_partner(psi)) / std::max(1.0, norm_inf(psi));
    res.trace_gap = std::fabs(trace(m0) - trace(mh));
    const Vec4 xf = s.vector_field_vec(x0.vec());
    res.field_fix = norm_inf(sub(matvec(m4_0, xf), xf)) / std::max(1.0, norm_inf(xf));
    res.return_gap = dist_inf(xb, x0) / std::max(1.0, norm_inf(x0));
    res.energy_drift = std::max(run1.stats.max_energy_drift, run2.stats.max_energy_drift);
    res.symplectic =
        std::max(run1.stats.max_symplectic_residual, run2.stats.max_symplectic_residual);
    return r;
}

/// Report synthesized from a bare couple, for fixtures and spot checks. The
/// full-period reductions are B*A at the start point and A*B at the half
/// point; the 4x4 field holds B*A embedded in the (q1, p1) plane.
inline MonodromyReport report_from_couple(const RealCouple& cp,
                                          const std::string& id = "synthetic",
                                          double band = kTraceBand) {
    MonodromyReport r;
    r.system = "synthetic";
    r.orbit_id = id;
    r.doubly_symmetric = true;
    r.half_first = cp.A;
    r.half_second = cp.B;
    r.couple = cp;
    r.reduced_0 = mul(cp.B, cp.A);
    r.reduced_half = mul(cp.A, cp.B);
    r.trace = trace(r.reduced_0);
    r.classification = classify(r.reduced_0, band);
    r.cz_parity = detail::parity_of(r.classification);
    r.b_sign_0 = detail::try_sign(r.reduced_0, band, kFormTol);
    r.b_sign_half = detail::try_sign(r.reduced_half, band, kFormTol);
    Mat4 m = identity4();
    m[0] = r.reduced_0.a;
    m[2] = r.reduced_0.b;
    m[8] = r.reduced_0.c;
    m[10] = r.reduced_0.d;
    r.monodromy = m;
    return r;
}

/// An orbit covered an even number of times is bad exactly when it is
/// negative hyperbolic: its even covers flip orientation data and must be
/// dropped from the count. Degenerate orbits admit no verdict.
inline bool is_bad(const MonodromyReport& r, int cover) {
    if (cover < 1) throw Error("is_bad: cover must be >= 1");
    if (r.classification == OrbitClass::DegeneratePlus ||
        r.classification == OrbitClass::DegenerateMinus)
        throw DegenerateTrace("is_bad: degenerate orbit " + r.orbit_id);
    return cover % 2 == 0 && r.classification == OrbitClass::NegativeHyperbolic;
}

/// Signed count over covered orbits: good positive hyperbolic entries give
/// +1, good elliptic or negative hyperbolic entries give -1, bad entries
/// give 0. Throws DegenerateTrace when any entry sits in the degenerate
/// band, since its contribution would be ambiguous.
inline int sft_euler_characteristic(const std::vector<std::pair<MonodromyReport, int>>& entries) {
    int chi = 0;
    for (const auto& [rep, cover] : entries) {
        if (is_bad(rep, cover)) continue;
        chi += rep.classification == OrbitClass::PositiveHyperbolic ? 1 : -1;
    }
    return chi;
}

} // namespace orbitk
