#pragma once

// Adaptive Dormand-Prince 5(4) integration with the classic quartic dense
// interpolant, used for trajectories, variational frames (one combined
// 20-dimensional system), and section events. Events are bracketed on the
// dense output and then polished against honestly re-integrated states, so
// reported event states satisfy |g| <= tol for the actual flow, not for the
// interpolant.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "orbitk/errors.hpp"
#include "orbitk/linalg.hpp"
#include "orbitk/state.hpp"
#include "orbitk/systems.hpp"

namespace orbitk {

struct IntegrateOptions {
    double rtol = 1e-12;
    double atol = 1e-12;
    double energy_tol = 1e-10;  // relative drift bound, verified post-run
    double sympl_tol = 1e-8;    // frame symplecticity bound, verified post-run
    double h_init = 0.0;        // 0 = automatic
    double h_max = 0.0;         // 0 = whole span
    std::size_t max_steps = 2'000'000;
};

struct IntegratorStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double max_energy_drift = 0;        // relative to max(1, |H(x0)|)
    double max_symplectic_residual = 0; // variational runs only
    double max_det_drift = 0;           // |det D - 1|, variational runs only
};

struct Trajectory {
    std::string system;
    std::vector<double> t;
    std::vector<State4> states;
    std::vector<Mat4> frames; // empty unless variational
    IntegratorStats stats;

    double t_end() const { return t.back(); }
    const State4& end_state() const { return states.back(); }
    const Mat4& end_frame() const { return frames.back(); }
};

enum class EventDirection { Increasing, Decreasing, Any };

struct EventSpec {
    std::function<double(const State4&)> g;
    EventDirection direction = EventDirection::Any;
    int occurrence = 1;
    double tol = 1e-12; // |g| at the reported event state
};

struct EventHit {
    double t = 0;
    State4 x;
    Trajectory trajectory; // samples up to and including the event state
};

namespace detail {

// Dormand-Prince 5(4) tableau, FSAL, with 4th-order dense output.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

template <std::size_t N>
using VecN = std::array<double, N>;

/// Quartic interpolant over one accepted step [t0, t0 + h].
template <std::size_t N>
struct DenseStep {
    double t0 = 0, h = 0;
    VecN<N> r1{}, r2{}, r3{}, r4{}, r5{};

    VecN<N> eval(double t) const {
        const double th = (t - t0) / h, th1 = 1.0 - th;
        VecN<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        return y;
    }
};

template <std::size_t N>
bool finite(const VecN<N>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// One integration run. `on_step(t_old, t_new, y_old, y_new, dense)` is
/// called after every accepted step; returning false stops the run.
template <std::size_t N, class RHS, class OnStep>
void dopri5_run(RHS&& rhs, VecN<N> y, double t0, double t1, const IntegrateOptions& opts,
                IntegratorStats& stats, OnStep&& on_step) {
    if (t1 == t0) return;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::fabs(t1 - t0);
    const double hmax = opts.h_max > 0 ? std::min(opts.h_max, span) : span;

    VecN<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
    auto f = [&](double t, const VecN<N>& v, VecN<N>& out) {
        rhs(t, v, out);
        ++stats.rhs_evals;
    };
    f(t0, y, k1);

    double h = opts.h_init > 0 ? std::min(opts.h_init, hmax) : 0;
    if (h == 0) {
        // standard two-probe guess
        double dn = 0, fn = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opts.atol + opts.rtol * std::fabs(y[i]);
            dn += (y[i] / sc) * (y[i] / sc);
            fn += (k1[i] / sc) * (k1[i] / sc);
        }
        double h0 = (dn > 1e-10 && fn > 1e-10) ? 0.01 * std::sqrt(dn / fn) : 1e-6;
        h0 = std::min(h0, hmax);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + dir * h0 * k1[i];
        f(t0 + dir * h0, ytmp, k2);
        double d2 = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opts.atol + opts.rtol * std::fabs(y[i]);
            d2 += ((k2[i] - k1[i]) / sc) * ((k2[i] - k1[i]) / sc);
        }
        d2 = std::sqrt(d2) / h0;
        const double dmax = std::max(std::sqrt(fn), d2);
        const double h1 = dmax > 1e-15 ? std::pow(0.01 / dmax, 0.2) : std::max(1e-6, h0 * 1e-3);
        h = std::min(std::min(100 * h0, h1), hmax);
    }

    double t = t0;
    while ((t1 - t) * dir > 0) {
        if (stats.steps + stats.rejected > opts.max_steps)
            throw StepFailure("step budget exhausted");
        h = std::min(h, hmax);
        bool final_step = false;
        if ((t + dir * h - t1) * dir >= 0) {
            h = std::fabs(t1 - t);
            final_step = true;
        }
        if (!final_step && h < 1e-14 * std::max(1.0, std::fabs(t)))
            throw StepFailure("step size underflow at t = " + std::to_string(t));
        const double hs = dir * h;

        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
        f(t + c2 * hs, ytmp, k2);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * hs, ytmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * hs, ytmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * hs, ytmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                   a65 * k5[i]);
        f(t + hs, ytmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(t + hs, ynew, k7);

        double err = 0;
        bool ok = finite(ynew);
        if (ok) {
            for (std::size_t i = 0; i < N; ++i) {
                const double sc =
                    opts.atol + opts.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
                const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                       e6 * k6[i] + e7 * k7[i]);
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / N);
            if (!std::isfinite(err)) ok = false;
        }

        if (!ok || err > 1.0) {
            ++stats.rejected;
            const double fac = ok ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= fac;
            continue;
        }

        DenseStep<N> dense;
        dense.t0 = t;
        dense.h = hs;
        for (std::size_t i = 0; i < N; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = hs * k1[i] - ydiff;
            dense.r1[i] = y[i];
            dense.r2[i] = ydiff;
            dense.r3[i] = bspl;
            dense.r4[i] = ydiff - hs * k7[i] - bspl;
            dense.r5[i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                                d7 * k7[i]);
        }

        ++stats.steps;
        const double t_new = t + hs;
        const bool keep_going = on_step(t, t_new, y, ynew, dense);
        t = t_new;
        y = ynew;
        k1 = k7; // FSAL
        if (!keep_going) return;
        const double fac = err > 0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
        h *= fac;
    }
}

/// RHS of the combined state + frame system; the frame block follows the
/// linearized field row by row.
inline void variational_rhs(const SystemDef& s, const VecN<20>& y, VecN<20>& dy) {
    const State4 x = State4::from({y[0], y[1], y[2], y[3]});
    const Vec4 v = s.vector_field_vec(x.vec());
    for (int i = 0; i < 4; ++i) dy[i] = v[i];
    const Mat4 a = s.vector_field_jacobian(x);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double sum = 0;
            for (int k = 0; k < 4; ++k) sum += a[4 * i + k] * y[4 + 4 * k + j];
            dy[4 + 4 * i + j] = sum;
        }
}

inline double det4(const Mat4& m) {
    Mat4 a = m;
    double det = 1.0;
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(a[4 * r + col]) > std::fabs(a[4 * piv + col])) piv = r;
        if (piv != col) {
            for (int j = 0; j < 4; ++j) std::swap(a[4 * piv + j], a[4 * col + j]);
            det = -det;
        }
        const double p = a[4 * col + col];
        if (p == 0) return 0;
        det *= p;
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[4 * r + col] / p;
            for (int j = col; j < 4; ++j) a[4 * r + j] -= f * a[4 * col + j];
        }
    }
    return det;
}

} // namespace detail

/// Integrate the flow from x0 over [0, t_end] (t_end may be negative).
/// Samples are the accepted integrator steps. Throws DomainExit when the
/// trajectory leaves the system domain and StepFailure when the step control
/// or the trailing accuracy checks fail.
inline Trajectory integrate(const SystemDef& s, const State4& x0, double t_end,
                            const IntegrateOptions& opts = {}) {
    if (!all_finite(x0)) throw StepFailure("non-finite initial state");
    if (!s.in_domain(x0)) throw DomainExit("initial state outside the domain of " + s.name);

    Trajectory traj;
    traj.system = s.name;
    traj.t.push_back(0);
    traj.states.push_back(x0);
    if (t_end == 0) return traj;

    const double h0 = s.H(x0);
    const double hscale = std::max(1.0, std::fabs(h0));

    auto rhs = [&](double, const detail::VecN<4>& y, detail::VecN<4>& dy) {
        dy = s.vector_field_vec(y);
    };
    detail::dopri5_run<4>(
        rhs, x0.vec(), 0.0, t_end, opts, traj.stats,
        [&](double, double t_new, const Vec4&, const Vec4& y_new, const detail::DenseStep<4>&) {
            const State4 xn = State4::from(y_new);
            if (!s.in_domain(xn))
                throw DomainExit(s.name + " trajectory left the domain at t = " +
                                 std::to_string(t_new));
            traj.stats.max_energy_drift =
                std::max(traj.stats.max_energy_drift, std::fabs(s.H(xn) - h0) / hscale);
            traj.t.push_back(t_new);
            traj.states.push_back(xn);
            return true;
        });

    if (traj.stats.max_energy_drift > opts.energy_tol)
        throw StepFailure("energy drift " + std::to_string(traj.stats.max_energy_drift) +
                          " exceeds the requested bound");
    return traj;
}

/// Integrate state and linearized flow together. frames[k] is the
/// differential of the time-t[k] flow map at x0.
inline Trajectory integrate_variational(const SystemDef& s, const State4& x0, double t_end,
                                        const IntegrateOptions& opts = {}) {
    if (!all_finite(x0)) throw StepFailure("non-finite initial state");
    if (!s.in_domain(x0)) throw DomainExit("initial state outside the domain of " + s.name);

    Trajectory traj;
    traj.system = s.name;
    traj.t.push_back(0);
    traj.states.push_back(x0);
    traj.frames.push_back(identity4());
    if (t_end == 0) return traj;

    const double h0 = s.H(x0);
    const double hscale = std::max(1.0, std::fabs(h0));

    detail::VecN<20> y0{};
    for (int i = 0; i < 4; ++i) y0[i] = x0.vec()[i];
    const Mat4 id = identity4();
    for (int i = 0; i < 16; ++i) y0[4 + i] = id[i];

    auto rhs = [&](double, const detail::VecN<20>& y, detail::VecN<20>& dy) {
        detail::variational_rhs(s, y, dy);
    };
    detail::dopri5_run<20>(
        rhs, y0, 0.0, t_end, opts, traj.stats,
        [&](double, double t_new, const detail::VecN<20>&, const detail::VecN<20>& y_new,
            const detail::DenseStep<20>&) {
            const State4 xn = State4::from({y_new[0], y_new[1], y_new[2], y_new[3]});
            if (!s.in_domain(xn))
                throw DomainExit(s.name + " trajectory left the domain at t = " +
                                 std::to_string(t_new));
            Mat4 d;
            for (int i = 0; i < 16; ++i) d[i] = y_new[4 + i];
            traj.stats.max_energy_drift =
                std::max(traj.stats.max_energy_drift, std::fabs(s.H(xn) - h0) / hscale);
            traj.stats.max_symplectic_residual =
                std::max(traj.stats.max_symplectic_residual, symplectic_residual(d));
            traj.stats.max_det_drift =
                std::max(traj.stats.max_det_drift, std::fabs(detail::det4(d) - 1.0));
            traj.t.push_back(t_new);
            traj.states.push_back(xn);
            traj.frames.push_back(d);
            return true;
        });

    if (traj.stats.max_energy_drift > opts.energy_tol)
        throw StepFailure("energy drift " + std::to_string(traj.stats.max_energy_drift) +
                          " exceeds the requested bound");
    if (traj.stats.max_symplectic_residual > opts.sympl_tol)
        throw StepFailure("symplecticity residual " +
                          std::to_string(traj.stats.max_symplectic_residual) +
                          " exceeds the requested bound");
    return traj;
}

/// Flow endpoint only (no sample bookkeeping).
inline State4 flow_state(const SystemDef& s, const State4& x0, double t_end,
                         const IntegrateOptions& opts = {}) {
    if (t_end == 0) return x0;
    IntegrateOptions o = opts;
    State4 out = x0;
    Trajectory scratch;
    scratch.system = s.name;
    const double h0 = s.H(x0);
    const double hscale = std::max(1.0, std::fabs(h0));
    if (!s.in_domain(x0)) throw DomainExit("initial state outside the domain of " + s.name);
    auto rhs = [&](double, const detail::VecN<4>& y, detail::VecN<4>& dy) {
        dy = s.vector_field_vec(y);
    };
    double drift = 0;
    detail::dopri5_run<4>(
        rhs, x0.vec(), 0.0, t_end, o, scratch.stats,
        [&](double, double t_new, const Vec4&, const Vec4& y_new, const detail::DenseStep<4>&) {
            const State4 xn = State4::from(y_new);
            if (!s.in_domain(xn))
                throw DomainExit(s.name + " trajectory left the domain at t = " +
                                 std::to_string(t_new));
            drift = std::max(drift, std::fabs(s.H(xn) - h0) / hscale);
            out = xn;
            return true;
        });
    if (drift > o.energy_tol)
        throw StepFailure("energy drift exceeds the requested bound");
    return out;
}

/// States at a strictly increasing list of nonnegative times, by sequential
/// re-anchored integration (every checkpoint is an honest flow state).
inline std::vector<State4> states_at_times(const SystemDef& s, const State4& x0,
                                           const std::vector<double>& times,
                                           const IntegrateOptions& opts = {}) {
    std::vector<State4> out;
    out.reserve(times.size());
    State4 x = x0;
    double t = 0;
    for (double target : times) {
        if (target < t) throw Error("states_at_times: times must be nondecreasing");
        if (target > t) {
            x = flow_state(s, x, target - t, opts);
            t = target;
        }
        out.push_back(x);
    }
    return out;
}

/// Run until the occurrence-th directed zero crossing of ev.g. The crossing
/// is located on the dense interpolant and then polished on re-integrated
/// flow states until |g| <= ev.tol holds for the returned state itself.
/// A g that vanishes identically along the first step is rejected.
inline EventHit integrate_to_event(const SystemDef& s, const State4& x0, const EventSpec& ev,
                                   double t_max, const IntegrateOptions& opts = {}) {
    if (!ev.g) throw Error("integrate_to_event: empty event function");
    if (!(t_max > 0)) throw Error("integrate_to_event: t_max must be positive");
    if (ev.occurrence < 1) throw Error("integrate_to_event: occurrence must be >= 1");
    if (!all_finite(x0)) throw StepFailure("non-finite initial state");
    if (!s.in_domain(x0)) throw DomainExit("initial state outside the domain of " + s.name);

    Trajectory traj;
    traj.system = s.name;
    traj.t.push_back(0);
    traj.states.push_back(x0);

    const double h0 = s.H(x0);
    const double hscale = std::max(1.0, std::fabs(h0));
    const double xscale = std::max(1.0, norm_inf(x0));

    auto rhs = [&](double, const detail::VecN<4>& y, detail::VecN<4>& dy) {
        dy = s.vector_field_vec(y);
    };

    // exact flow state at absolute time t, re-anchored at the last sample
    // before the active step (set during refinement)
    double anchor_t = 0;
    State4 anchor_x = x0;
    auto flow_from_anchor = [&](double t) -> State4 {
        return t == anchor_t ? anchor_x : flow_state(s, anchor_x, t - anchor_t, opts);
    };

    int hits = 0;
    bool first_step = true;
    double g_prev = ev.g(x0);
    bool found = false;
    double t_star = 0;
    State4 x_star;

    detail::dopri5_run<4>(
        rhs, x0.vec(), 0.0, t_max, opts, traj.stats,
        [&](double t_old, double t_new, const Vec4& y_old, const Vec4& y_new,
            const detail::DenseStep<4>& dense) {
            const State4 xn = State4::from(y_new);
            if (!s.in_domain(xn))
                throw DomainExit(s.name + " trajectory left the domain at t = " +
                                 std::to_string(t_new));
            traj.stats.max_energy_drift =
                std::max(traj.stats.max_energy_drift, std::fabs(s.H(xn) - h0) / hscale);

            const double g_new = ev.g(xn);
            if (first_step) {
                first_step = false;
                double gmax = std::max(std::fabs(g_prev), std::fabs(g_new));
                for (double th : {0.25, 0.5, 0.75})
                    gmax = std::max(gmax, std::fabs(ev.g(State4::from(
                                              dense.eval(t_old + th * (t_new - t_old))))));
                if (gmax <= 1e-10 * xscale)
                    throw EventNotFound(
                        "event function vanishes identically along the first step");
            }

            const bool crossed = (g_prev != 0.0) &&
                                 (g_prev * g_new < 0.0 || (g_new == 0.0 && g_prev != 0.0));
            const bool dir_ok =
                ev.direction == EventDirection::Any ||
                (ev.direction == EventDirection::Increasing && g_prev < 0) ||
                (ev.direction == EventDirection::Decreasing && g_prev > 0);
            if (crossed && dir_ok && ++hits == ev.occurrence) {
                // phase 1: bisect on the dense interpolant
                double lo = t_old, hi = t_new;
                double glo = g_prev;
                for (int i = 0; i < 80 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
                    const double mid = 0.5 * (lo + hi);
                    const double gm = ev.g(State4::from(dense.eval(mid)));
                    if (glo * gm <= 0)
                        hi = mid;
                    else {
                        lo = mid;
                        glo = gm;
                    }
                }
                double t_guess = 0.5 * (lo + hi);

                // phase 2: secant polish on honest flow states, bracket-guarded
                anchor_t = t_old;
                anchor_x = State4::from(y_old);
                double ta = t_old, ga = g_prev;
                double tb = t_new, gb = g_new;
                double tc = t_guess;
                State4 xc = flow_from_anchor(tc);
                double gc = ev.g(xc);
                for (int i = 0; i < 60 && std::fabs(gc) > ev.tol; ++i) {
                    if (ga * gc <= 0) {
                        tb = tc;
                        gb = gc;
                    } else {
                        ta = tc;
                        ga = gc;
                    }
                    double tn = tb - gb * (tb - ta) / (gb - ga); // secant
                    if (!(tn > std::min(ta, tb) && tn < std::max(ta, tb)))
                        tn = 0.5 * (ta + tb);
                    if (std::fabs(tn - tc) < 4e-16 * std::max(1.0, std::fabs(tn))) break;
                    tc = tn;
                    xc = flow_from_anchor(tc);
                    gc = ev.g(xc);
                }
                if (std::fabs(gc) > std::max(ev.tol, 1e-11 * xscale))
                    throw StepFailure("event refinement stalled with |g| = " +
                                      std::to_string(std::fabs(gc)));
                found = true;
                t_star = tc;
                x_star = xc;
                traj.t.push_back(t_star);
                traj.states.push_back(x_star);
                return false;
            }

            g_prev = g_new;
            traj.t.push_back(t_new);
            traj.states.push_back(xn);
            return true;
        });

    if (!found)
        throw EventNotFound("no event crossing number " + std::to_string(ev.occurrence) +
                            " before t = " + std::to_string(t_max));
    if (traj.stats.max_energy_drift > opts.energy_tol)
        throw StepFailure("energy drift exceeds the requested bound");
    EventHit hit;
    hit.t = t_star;
    hit.x = x_star;
    hit.trajectory = std::move(traj);
    return hit;
}

} // namespace orbitk
