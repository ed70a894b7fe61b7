#pragma once

// Shooting for symmetric periodic orbits. A start state on one fixed set is
// flowed to the section of a target fixed set; the remaining normal
// coordinate at the section is the shooting residual. A root of the residual
// in the start coordinate is an orbit that crosses both fixed sets
// perpendicularly, so reflections assemble the full period from one quarter
// (or one half, for singly symmetric orbits). Closure and the symmetry
// certificates are then measured on honestly integrated states, never
// assumed from the construction.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "orbitk/errors.hpp"
#include "orbitk/flow.hpp"
#include "orbitk/monodromy.hpp"
#include "orbitk/orbit.hpp"
#include "orbitk/systems.hpp"

namespace orbitk {

struct ShootOptions {
    int grid = 33;             // scan resolution for bracketing
    int occurrence = 1;        // which section crossing to target
    double t_max = 100.0;      // event search horizon
    double coarse_tol = 1e-3;  // bisection hand-off width
    double residual_tol = 1e-12; // perpendicularity target at the section
    double closure_tol = 1e-8;   // full-period closure gate, relative
    double cert_tol = 1e-7;      // reflection certificate gate
    double dsym_tol = 1e-8;      // second-reflection certificate gate
    int cert_samples = 32;
    IntegrateOptions integ{};
};

struct ShootResult {
    Orbit orbit;
    double coord = 0;      // converged start coordinate
    double residual = 0;   // section perpendicularity at convergence
    double t_section = 0;  // time of the targeted crossing
    int branch = 1;        // sign choice used for the start state
    int scan_evals = 0, skipped_points = 0, bisect_iters = 0, secant_iters = 0;
};

namespace detail {

struct SectionShot {
    double residual = 0, t = 0;
    State4 x0, x_hit;
};

/// One residual evaluation: solve the start state, flow to the first
/// directed crossing of the target section coordinate, read off the
/// perpendicularity defect.
inline SectionShot section_shot(const SystemDef& s, int start_inv, const Involution& target,
                                double coord, double energy, int branch,
                                const ShootOptions& o) {
    const State4 x0 = state_on_fixed_set(s, start_inv, coord, energy, branch);
    const auto nn = target.normal_indices();
    const int ie = nn[0];
    EventSpec ev;
    ev.g = [ie](const State4& x) { return x.vec()[ie]; };
    const double g0 = ev.g(x0);
    ev.direction = g0 > 0   ? EventDirection::Decreasing
                   : g0 < 0 ? EventDirection::Increasing
                            : EventDirection::Any;
    ev.occurrence = o.occurrence;
    ev.tol = 1e-12;
    const EventHit hit = integrate_to_event(s, x0, ev, o.t_max, o.integ);
    return {hit.x.vec()[nn[1]], hit.t, x0, hit.x};
}

/// Scan, bisect, then secant-polish a root of the shooting residual over the
/// bracket. Unreachable grid points are skipped; a bracket without a sign
/// change among the reachable points (including an empty or degenerate
/// bracket, which has no points at all) is a NoSignChange error.
template <class F>
double find_residual_root(F&& f, double lo, double hi, const ShootOptions& o,
                          ShootResult& diag) {
    if (!(hi > lo))
        throw NoSignChange("shooting bracket [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "] contains no interval");
    if (o.grid < 2) throw Error("shooting grid needs at least two points");

    double blo = 0, bhi = 0, flo = 0, fhi = 0;
    bool have_prev = false, bracketed = false;
    double pq = 0, pf = 0;
    for (int i = 0; i < o.grid; ++i) {
        const double c = lo + (hi - lo) * i / (o.grid - 1);
        double fc;
        try {
            fc = f(c);
            ++diag.scan_evals;
        } catch (const EnergyUnreachable&) {
            ++diag.skipped_points;
            continue;
        } catch (const DomainExit&) {
            ++diag.skipped_points;
            continue;
        } catch (const EventNotFound&) {
            ++diag.skipped_points;
            continue;
        }
        if (have_prev && pf * fc <= 0) {
            blo = pq;
            bhi = c;
            flo = pf;
            fhi = fc;
            bracketed = true;
            break;
        }
        have_prev = true;
        pq = c;
        pf = fc;
    }
    if (!bracketed)
        throw NoSignChange("no sign change of the shooting residual in [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]");

    while (bhi - blo > o.coarse_tol) {
        const double mid = 0.5 * (blo + bhi);
        const double fm = f(mid);
        ++diag.bisect_iters;
        if (flo * fm <= 0) {
            bhi = mid;
            fhi = fm;
        } else {
            blo = mid;
            flo = fm;
        }
    }

    // secant with bracket guard
    double ta = blo, fa = flo, tb = bhi, fb = fhi;
    double tc = (fa == fb) ? 0.5 * (ta + tb) : tb - fb * (tb - ta) / (fb - fa);
    if (!(tc > ta && tc < tb)) tc = 0.5 * (ta + tb);
    double fc = f(tc);
    ++diag.secant_iters;
    for (int i = 0; i < 80 && std::fabs(fc) > o.residual_tol; ++i) {
        if (fa * fc <= 0) {
            tb = tc;
            fb = fc;
        } else {
            ta = tc;
            fa = fc;
        }
        double tn = (fa == fb) ? 0.5 * (ta + tb) : tb - fb * (tb - ta) / (fb - fa);
        if (!(tn > std::min(ta, tb) && tn < std::max(ta, tb))) tn = 0.5 * (ta + tb);
        if (std::fabs(tn - tc) < 4e-16 * std::max(1.0, std::fabs(tn))) break;
        tc = tn;
        fc = f(tc);
        ++diag.secant_iters;
    }
    if (std::fabs(fc) > std::max(o.residual_tol, 1e-10))
        throw NoConvergence("shooting residual stalled at " + std::to_string(fc));
    diag.coord = tc;
    diag.residual = fc;
    return tc;
}

/// States at arbitrary (unsorted) query times, each an honest flow state.
inline std::vector<State4> states_at_query(const SystemDef& s, const State4& x0,
                                           std::vector<double> query,
                                           const IntegrateOptions& integ) {
    std::vector<int> order(query.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return query[i] < query[j]; });
    std::vector<double> sorted;
    sorted.reserve(query.size());
    for (int i : order) sorted.push_back(query[i]);
    const std::vector<State4> got = states_at_times(s, x0, sorted, integ);
    std::vector<State4> out(query.size());
    for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = got[k];
    return out;
}

} // namespace detail

/// Assemble a doubly symmetric orbit from its first quarter: reflect through
/// the quarter-point fixed set to get the half, then through the start fixed
/// set to close the period. Closure and both certificates are measured by
/// fresh integration and gated.
inline Orbit assemble_doubly_symmetric(const SystemDef& s, const State4& x0, double t_quarter,
                                       int start_inv, int quarter_inv, const ShootOptions& o,
                                       const std::string& id) {
    if (!(t_quarter > 0)) throw Error("assemble_doubly_symmetric: quarter time must be positive");
    const Involution& r1 = s.involutions[start_inv];
    const Involution& r2 = s.involutions[quarter_inv];
    const double period = 4 * t_quarter;

    const Trajectory q = integrate(s, x0, t_quarter, o.integ);
    std::vector<double> ts = q.t;
    std::vector<State4> xs = q.states;
    for (int i = static_cast<int>(q.t.size()) - 1; i >= 0; --i) {
        const double t = 2 * t_quarter - q.t[i];
        if (t <= ts.back() + 1e-15 * period) continue;
        ts.push_back(t);
        xs.push_back(r2.apply(q.states[i]));
    }
    const int nhalf = static_cast<int>(ts.size());
    for (int i = nhalf - 1; i >= 0; --i) {
        const double t = period - ts[i];
        if (t <= ts.back() + 1e-15 * period) continue;
        ts.push_back(t);
        xs.push_back(r1.apply(xs[i]));
    }

    Orbit orb;
    orb.system = s.name;
    orb.id = id;
    orb.initial_state = x0;
    orb.period = period;
    orb.energy = s.H(x0);
    orb.sample_t = std::move(ts);
    orb.sample_x = std::move(xs);

    const double xscale = std::max(1.0, norm_inf(x0));
    orb.closure_residual = dist_inf(flow_state(s, x0, period, o.integ), x0) / xscale;
    if (orb.closure_residual > o.closure_tol)
        throw NoConvergence("assembled orbit fails to close: residual " +
                            std::to_string(orb.closure_residual));

    // certificates on honest states: v(period - t) = r1 v(t) on [0, T/2],
    // v(T/2 - t) = r2 v(t) on [0, T/4]
    const int K = std::max(2, o.cert_samples);
    std::vector<double> query;
    query.reserve(4 * K);
    for (int k = 0; k < K; ++k) {
        const double t1 = 0.5 * period * k / (K - 1);
        query.push_back(t1);
        query.push_back(period - t1);
        const double t2 = 0.25 * period * k / (K - 1);
        query.push_back(t2);
        query.push_back(0.5 * period - t2);
    }
    const std::vector<State4> st = detail::states_at_query(s, x0, query, o.integ);
    double scale_all = 1.0;
    for (const State4& x : st) scale_all = std::max(scale_all, norm_inf(x));
    double sym_res = 0, dsym_res = 0;
    for (int k = 0; k < K; ++k) {
        sym_res = std::max(sym_res, dist_inf(r1.apply(st[4 * k]), st[4 * k + 1]));
        dsym_res = std::max(dsym_res, dist_inf(r2.apply(st[4 * k + 2]), st[4 * k + 3]));
    }
    sym_res /= scale_all;
    dsym_res /= scale_all;
    if (sym_res > o.cert_tol)
        throw SymmetryViolated("reflection certificate residual " + std::to_string(sym_res));
    if (dsym_res > o.dsym_tol)
        throw SymmetryViolated("second reflection certificate residual " +
                               std::to_string(dsym_res));

    orb.certificate.sym_inv = start_inv;
    orb.certificate.sym_residual = sym_res;
    orb.certificate.doubly = true;
    orb.certificate.dsym_inv = quarter_inv;
    orb.certificate.dsym_residual = dsym_res;
    return orb;
}

/// Assemble a singly symmetric orbit from its first half by one reflection.
inline Orbit assemble_symmetric(const SystemDef& s, const State4& x0, double t_half,
                                int inv_index, const ShootOptions& o, const std::string& id) {
    if (!(t_half > 0)) throw Error("assemble_symmetric: half time must be positive");
    const Involution& r1 = s.involutions[inv_index];
    const double period = 2 * t_half;

    const Trajectory h = integrate(s, x0, t_half, o.integ);
    std::vector<double> ts = h.t;
    std::vector<State4> xs = h.states;
    for (int i = static_cast<int>(h.t.size()) - 1; i >= 0; --i) {
        const double t = period - h.t[i];
        if (t <= ts.back() + 1e-15 * period) continue;
        ts.push_back(t);
        xs.push_back(r1.apply(h.states[i]));
    }

    Orbit orb;
    orb.system = s.name;
    orb.id = id;
    orb.initial_state = x0;
    orb.period = period;
    orb.energy = s.H(x0);
    orb.sample_t = std::move(ts);
    orb.sample_x = std::move(xs);

    const double xscale = std::max(1.0, norm_inf(x0));
    orb.closure_residual = dist_inf(flow_state(s, x0, period, o.integ), x0) / xscale;
    if (orb.closure_residual > o.closure_tol)
        throw NoConvergence("assembled orbit fails to close: residual " +
                            std::to_string(orb.closure_residual));

    const int K = std::max(2, o.cert_samples);
    std::vector<double> query;
    query.reserve(2 * K);
    for (int k = 0; k < K; ++k) {
        const double t1 = 0.5 * period * k / (K - 1);
        query.push_back(t1);
        query.push_back(period - t1);
    }
    const std::vector<State4> st = detail::states_at_query(s, x0, query, o.integ);
    double scale_all = 1.0;
    for (const State4& x : st) scale_all = std::max(scale_all, norm_inf(x));
    double sym_res = 0;
    for (int k = 0; k < K; ++k)
        sym_res = std::max(sym_res, dist_inf(r1.apply(st[2 * k]), st[2 * k + 1]));
    sym_res /= scale_all;
    if (sym_res > o.cert_tol)
        throw SymmetryViolated("reflection certificate residual " + std::to_string(sym_res));

    orb.certificate.sym_inv = inv_index;
    orb.certificate.sym_residual = sym_res;
    return orb;
}

namespace detail {

inline std::string format_energy(double e) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", e);
    return buf;
}

} // namespace detail

/// Find a doubly symmetric orbit at the given energy: start on the fixed set
/// of involutions[0] with the start coordinate bracketed in [lo, hi], hit the
/// fixed set of involutions[1] perpendicularly a quarter period later.
inline ShootResult shoot_doubly_symmetric(const SystemDef& s, double energy, double lo,
                                          double hi, int branch = 1,
                                          const ShootOptions& o = {}) {
    if (s.involutions.size() < 2)
        throw Error("shoot_doubly_symmetric: the system has only one reflection");
    const int start_inv = 0, quarter_inv = 1;
    const Involution& target = s.involutions[quarter_inv];

    ShootResult res;
    res.branch = branch;
    auto f = [&](double c) {
        return detail::section_shot(s, start_inv, target, c, energy, branch, o).residual;
    };
    const double root = detail::find_residual_root(f, lo, hi, o, res);
    const detail::SectionShot shot =
        detail::section_shot(s, start_inv, target, root, energy, branch, o);
    res.residual = shot.residual;
    res.t_section = shot.t;

    const std::string id =
        s.name + (branch < 0 ? "-retro-e" : "-direct-e") + detail::format_energy(energy);
    res.orbit = assemble_doubly_symmetric(s, shot.x0, shot.t, start_inv, quarter_inv, o, id);
    return res;
}

/// Find a singly symmetric orbit: start on Fix(involutions[inv_index]) and
/// return to it perpendicularly half a period later (occurrence picks which
/// return).
inline ShootResult shoot_symmetric(const SystemDef& s, int inv_index, double energy, double lo,
                                   double hi, int branch = 1, const ShootOptions& o = {}) {
    if (inv_index < 0 || inv_index >= static_cast<int>(s.involutions.size()))
        throw Error("shoot_symmetric: no such involution");
    const Involution& target = s.involutions[inv_index];

    ShootResult res;
    res.branch = branch;
    auto f = [&](double c) {
        return detail::section_shot(s, inv_index, target, c, energy, branch, o).residual;
    };
    const double root = detail::find_residual_root(f, lo, hi, o, res);
    const detail::SectionShot shot =
        detail::section_shot(s, inv_index, target, root, energy, branch, o);
    res.residual = shot.residual;
    res.t_section = shot.t;

    const std::string id = s.name + "-sym" + std::to_string(inv_index) +
                           (branch < 0 ? "-retro-e" : "-direct-e") +
                           detail::format_energy(energy);
    res.orbit = assemble_symmetric(s, shot.x0, shot.t, inv_index, o, id);
    return res;
}

/// The same orbit viewed from its quarter point: the start moves to the
/// second fixed set and the two reflection roles swap. Four shifts walk
/// around the orbit and return to the start.
inline Orbit quarter_shift(const SystemDef& s, const Orbit& o, const ShootOptions& opts = {}) {
    if (!o.certificate.doubly)
        throw SymmetryViolated("quarter_shift: orbit is not certified doubly symmetric");
    const State4 xq = flow_state(s, o.initial_state, 0.25 * o.period, opts.integ);
    const Involution& r2 = s.involutions[o.certificate.dsym_inv];
    if (!r2.on_fixed_set(xq, 1e-8))
        throw SymmetryViolated("quarter_shift: quarter point misses the fixed set of " +
                               r2.name);
    return assemble_doubly_symmetric(s, xq, 0.25 * o.period, o.certificate.dsym_inv,
                                     o.certificate.sym_inv, opts, o.id + "+quarter");
}

// --- family continuation ------------------------------------------------------

struct FamilyMember {
    double energy = 0;
    ShootResult shoot;
    MonodromyReport report;
};

struct FamilyTransition {
    double energy_lo = 0, energy_hi = 0; // final bisection bracket
    double energy = 0;                   // refined transition energy
    double trace = 0;                    // reduced trace at the refined energy
    OrbitClass before, after;
};

struct FamilyResult {
    std::vector<FamilyMember> members;
    std::vector<FamilyTransition> transitions;
    std::vector<std::string> violations; // doubly symmetric members breaking the sign law
    bool stalled = false;
    std::string stall_reason;
    double stalled_at = 0;
};

struct FamilyOptions {
    double bracket_lo = 0, bracket_hi = 0; // full fallback bracket (required)
    int branch = 1;
    ShootOptions shoot{};
    ReportOptions report{};
    double warm_radius = 0.02;        // start-coordinate window around the last root
    int max_substeps = 6;             // energy-step halvings before giving up
    double transition_trace_tol = 1e-6;
    double transition_energy_tol = 1e-12;
};

namespace detail {

/// Shoot with a window around a known nearby root, widening on failure and
/// finally falling back to the full bracket.
inline ShootResult shoot_warm(const SystemDef& s, double energy, double warm_coord,
                              const FamilyOptions& fo) {
    double w = fo.warm_radius;
    for (int attempt = 0; attempt < 3; ++attempt, w *= 3) {
        const double lo = std::max(fo.bracket_lo, warm_coord - w);
        const double hi = std::min(fo.bracket_hi, warm_coord + w);
        if (!(hi > lo)) break;
        ShootOptions o = fo.shoot;
        o.grid = 7;
        try {
            return shoot_doubly_symmetric(s, energy, lo, hi, fo.branch, o);
        } catch (const NoSignChange&) {
        } catch (const NoConvergence&) {
        }
    }
    return shoot_doubly_symmetric(s, energy, fo.bracket_lo, fo.bracket_hi, fo.branch, fo.shoot);
}

inline FamilyMember solve_member(const SystemDef& s, double energy, double warm_coord,
                                 const FamilyOptions& fo) {
    FamilyMember m;
    m.shoot = shoot_warm(s, energy, warm_coord, fo);
    m.energy = m.shoot.orbit.energy;
    m.report = symmetric_orbit_report(s, m.shoot.orbit, fo.report);
    return m;
}

inline double class_boundary(OrbitClass a, OrbitClass b) {
    auto touches_plus = [](OrbitClass c) {
        return c == OrbitClass::PositiveHyperbolic || c == OrbitClass::DegeneratePlus;
    };
    auto touches_minus = [](OrbitClass c) {
        return c == OrbitClass::NegativeHyperbolic || c == OrbitClass::DegenerateMinus;
    };
    if (touches_plus(a) || touches_plus(b)) return 2.0;
    if (touches_minus(a) || touches_minus(b)) return -2.0;
    return 2.0;
}

} // namespace detail

/// March a doubly symmetric family across [energy_lo, energy_hi] in steps of
/// energy_step, warm-starting each solve from the previous root (the seed
/// anchors the first one). Failures trigger energy-step halving from the last
/// solved energy; when the budget runs out the family is returned as far as
/// it got, flagged stalled. If not even the first member converges there are
/// no partial results and the stall is a ContinuationStalled error.
/// Classification changes between consecutive members are refined by
/// bisection in energy until the reduced trace sits at the crossing value.
inline FamilyResult continue_family(const SystemDef& s, const ShootResult& seed,
                                    double energy_lo, double energy_hi, double energy_step,
                                    const FamilyOptions& fo) {
    if (!(energy_step > 0)) throw Error("continue_family: energy step must be positive");
    if (!(fo.bracket_hi > fo.bracket_lo))
        throw Error("continue_family: options need the full start-coordinate bracket");
    FamilyResult out;

    std::vector<double> targets;
    const double dir = energy_hi >= energy_lo ? 1.0 : -1.0;
    const double span = std::fabs(energy_hi - energy_lo);
    const int nsteps = static_cast<int>(std::floor(span / energy_step + 1e-9));
    for (int i = 0; i <= nsteps; ++i) targets.push_back(energy_lo + dir * i * energy_step);
    // one step past the grid only when the grid advanced at all; a step wider
    // than the whole range means a single member at the low end
    if (nsteps >= 1 && std::fabs(targets.back() - energy_hi) > 1e-12 * std::max(1.0, span))
        targets.push_back(energy_hi);

    auto note_violation = [&](const FamilyMember& m) {
        if (!m.report.doubly_symmetric) return;
        const bool neg = m.report.classification == OrbitClass::NegativeHyperbolic;
        const bool differ = m.report.b_sign_0 && m.report.b_sign_half &&
                            *m.report.b_sign_0 != *m.report.b_sign_half;
        if (neg || differ)
            out.violations.push_back(m.shoot.orbit.id + (neg ? ": negative hyperbolic" : "") +
                                     (differ ? ": sign invariants differ" : ""));
    };

    double anchor_energy = seed.orbit.energy;
    double anchor_coord = seed.coord;
    for (double target : targets) {
        int substeps = 0;
        // walk from the last solved energy to the target, halving on failure
        double next = target;
        while (true) {
            try {
                FamilyMember m = detail::solve_member(s, next, anchor_coord, fo);
                anchor_energy = next;
                anchor_coord = m.shoot.coord;
                if (next == target) {
                    note_violation(m);
                    out.members.push_back(std::move(m));
                    break;
                }
                next = target;
            } catch (const Error& e) {
                const double half = 0.5 * (anchor_energy + next);
                if (++substeps > fo.max_substeps || half == next || half == anchor_energy) {
                    if (out.members.empty())
                        throw ContinuationStalled(std::string("no member converged: ") +
                                                  e.what());
                    out.stalled = true;
                    out.stall_reason = e.what();
                    out.stalled_at = target;
                    return out;
                }
                next = half;
            }
        }
    }

    for (std::size_t i = 1; i < out.members.size(); ++i) {
        const FamilyMember& a = out.members[i - 1];
        const FamilyMember& b = out.members[i];
        if (a.report.classification == b.report.classification) continue;
        const double boundary = detail::class_boundary(a.report.classification,
                                                       b.report.classification);

        double elo = a.energy, ehi = b.energy;
        double clo = a.shoot.coord, chi = b.shoot.coord;
        const OrbitClass cls_lo = a.report.classification;
        FamilyTransition tr;
        tr.before = a.report.classification;
        tr.after = b.report.classification;
        const bool a_closer =
            std::fabs(a.report.trace - boundary) < std::fabs(b.report.trace - boundary);
        tr.trace = a_closer ? a.report.trace : b.report.trace;
        tr.energy = a_closer ? elo : ehi;
        for (int it = 0; it < 200; ++it) {
            if (std::fabs(tr.trace - boundary) <= fo.transition_trace_tol) break;
            if (std::fabs(ehi - elo) <= fo.transition_energy_tol * std::max(1.0, std::fabs(ehi)))
                break;
            const double emid = 0.5 * (elo + ehi);
            FamilyMember m;
            try {
                m = detail::solve_member(s, emid, 0.5 * (clo + chi), fo);
            } catch (const Error&) {
                break; // leave the transition at the best bracketed value
            }
            note_violation(m);
            if (m.report.classification == cls_lo) {
                elo = emid;
                clo = m.shoot.coord;
            } else {
                ehi = emid;
                chi = m.shoot.coord;
            }
            tr.energy = emid;
            tr.trace = m.report.trace;
        }
        tr.energy_lo = elo;
        tr.energy_hi = ehi;
        out.transitions.push_back(tr);
    }
    return out;
}

} // namespace orbitk
