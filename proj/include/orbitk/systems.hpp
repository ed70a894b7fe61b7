#pragma once

// Concrete Hamiltonian systems on R^4 carrying one or two antisymplectic
// reflection symmetries: the rotating lunar problem and the symmetric
// two-electron atom on the upper half plane. Both expose analytic gradients
// and Hessians; tests cross-check them against finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "orbitk/errors.hpp"
#include "orbitk/linalg.hpp"
#include "orbitk/state.hpp"

namespace orbitk {

/// Linear antisymplectic involution with a coordinate-plane fixed set.
/// `chart` lists the two coordinate indices spanning Fix (the first one is
/// the coordinate used to parameterize shooting start states).
struct Involution {
    std::string name;
    Vec4 signs{1, 1, 1, 1};   // diagonal of the matrix
    std::array<int, 2> chart{0, 0};

    State4 apply(const State4& x) const {
        const Vec4 v = x.vec();
        return State4::from({signs[0] * v[0], signs[1] * v[1], signs[2] * v[2], signs[3] * v[3]});
    }

    Mat4 matrix() const {
        Mat4 m{};
        for (int i = 0; i < 4; ++i) m[5 * i] = signs[i];
        return m;
    }

    double fixed_set_residual(const State4& x) const {
        return dist_inf(apply(x), x);
    }

    bool on_fixed_set(const State4& x, double tol = 1e-9) const {
        return fixed_set_residual(x) <= tol * std::max(1.0, norm_inf(x));
    }

    /// Lagrangian parameterization of Fix by its two chart coordinates.
    State4 section(double c1, double c2) const {
        Vec4 v{};
        v[chart[0]] = c1;
        v[chart[1]] = c2;
        return State4::from(v);
    }

    /// The two coordinate indices complementary to the chart, sorted. These
    /// vanish on Fix; the first serves as section event coordinate, the
    /// second as perpendicularity residual in shooting.
    std::array<int, 2> normal_indices() const {
        std::array<int, 2> r{};
        int k = 0;
        for (int i = 0; i < 4; ++i)
            if (i != chart[0] && i != chart[1]) r[k++] = i;
        return r;
    }
};

/// Start-state solve on a fixed set: the produced state plus the index of
/// the coordinate that was solved from the energy constraint.
struct FixedSetSolve {
    State4 x;
    int solved_index = -1;
};

struct SystemDef {
    std::string name;
    std::function<double(const State4&)> H;
    std::function<Vec4(const State4&)> grad;  // (H_q1, H_q2, H_p1, H_p2)
    std::function<Mat4(const State4&)> hess;
    std::function<bool(const State4&)> in_domain;
    std::vector<Involution> involutions;
    std::function<FixedSetSolve(int, double, double, int)> fixed_state; // inv, coord, energy, branch

    /// Hamiltonian vector field (H_p, -H_q).
    Vec4 vector_field_vec(const Vec4& v) const {
        const Vec4 g = grad(State4::from(v));
        return {g[2], g[3], -g[0], -g[1]};
    }

    State4 vector_field(const State4& x) const {
        return State4::from(vector_field_vec(x.vec()));
    }

    /// Jacobian of the vector field, assembled from the Hessian.
    Mat4 vector_field_jacobian(const State4& x) const {
        const Mat4 h = hess(x);
        Mat4 a{};
        for (int j = 0; j < 4; ++j) {
            a[0 * 4 + j] = h[2 * 4 + j];
            a[1 * 4 + j] = h[3 * 4 + j];
            a[2 * 4 + j] = -h[0 * 4 + j];
            a[3 * 4 + j] = -h[1 * 4 + j];
        }
        return a;
    }
};

// --- rotating lunar problem -------------------------------------------------

/// H = 1/2((p1+q2)^2 + (p2-q1)^2) - 1/|q| - 3/2 q1^2 on |q| > 0.
/// Reflections about both configuration axes survive the rotating frame.
inline SystemDef hill_system() {
    SystemDef s;
    s.name = "hill";
    s.H = [](const State4& x) {
        const double r = std::hypot(x.q1, x.q2);
        const double u = x.p1 + x.q2, v = x.p2 - x.q1;
        return 0.5 * (u * u + v * v) - 1.0 / r - 1.5 * x.q1 * x.q1;
    };
    s.grad = [](const State4& x) -> Vec4 {
        const double r = std::hypot(x.q1, x.q2);
        const double r3 = r * r * r;
        const double u = x.p1 + x.q2, v = x.p2 - x.q1;
        return {-v + x.q1 / r3 - 3.0 * x.q1, u + x.q2 / r3, u, v};
    };
    s.hess = [](const State4& x) -> Mat4 {
        const double r2 = x.q1 * x.q1 + x.q2 * x.q2;
        const double r = std::sqrt(r2);
        const double r3 = r2 * r, r5 = r2 * r3;
        Mat4 h{};
        h[0] = 1.0 + 1.0 / r3 - 3.0 * x.q1 * x.q1 / r5 - 3.0; // q1q1
        h[1] = -3.0 * x.q1 * x.q2 / r5;                       // q1q2
        h[3] = -1.0;                                          // q1p2
        h[5] = 1.0 + 1.0 / r3 - 3.0 * x.q2 * x.q2 / r5;       // q2q2
        h[6] = 1.0;                                           // q2p1
        h[10] = 1.0;                                          // p1p1
        h[15] = 1.0;                                          // p2p2
        h[4] = h[1];
        h[12] = h[3];
        h[9] = h[6];
        return h;
    };
    s.in_domain = [](const State4& x) { return std::hypot(x.q1, x.q2) >= 1e-10; };
    s.involutions = {
        {"rho1", {1, -1, -1, 1}, {0, 3}}, // Fix: q2 = p1 = 0, chart (q1, p2)
        {"rho2", {-1, 1, 1, -1}, {1, 2}}, // Fix: q1 = p2 = 0, chart (q2, p1)
    };
    s.fixed_state = [](int inv, double coord, double energy, int branch) -> FixedSetSolve {
        if (inv == 0) {
            const double xi = coord;
            if (std::fabs(xi) < 1e-10) throw DomainExit("fixed-set start at the singularity");
            const double twok = 2.0 * (energy + 1.0 / std::fabs(xi) + 1.5 * xi * xi);
            if (twok < 0)
                throw EnergyUnreachable("no start on the first axis at this energy");
            return {State4{xi, 0, 0, xi + branch * std::sqrt(twok)}, 3};
        }
        const double eta = coord;
        if (std::fabs(eta) < 1e-10) throw DomainExit("fixed-set start at the singularity");
        const double twok = 2.0 * (energy + 1.0 / std::fabs(eta));
        if (twok < 0)
            throw EnergyUnreachable("no start on the second axis at this energy");
        return {State4{0, eta, -eta + branch * std::sqrt(twok), 0}, 2};
    };
    return s;
}

// --- planar two-electron atom with symmetric electrons ----------------------

/// H = |p|^2 - 4/|q| + 1/(2 q2) on the upper half plane q2 > 0.
inline SystemDef langmuir_system() {
    SystemDef s;
    s.name = "langmuir";
    s.H = [](const State4& x) {
        const double r = std::hypot(x.q1, x.q2);
        return x.p1 * x.p1 + x.p2 * x.p2 - 4.0 / r + 0.5 / x.q2;
    };
    s.grad = [](const State4& x) -> Vec4 {
        const double r = std::hypot(x.q1, x.q2);
        const double r3 = r * r * r;
        return {4.0 * x.q1 / r3, 4.0 * x.q2 / r3 - 0.5 / (x.q2 * x.q2),
                2.0 * x.p1, 2.0 * x.p2};
    };
    s.hess = [](const State4& x) -> Mat4 {
        const double r2 = x.q1 * x.q1 + x.q2 * x.q2;
        const double r = std::sqrt(r2);
        const double r3 = r2 * r, r5 = r2 * r3;
        Mat4 h{};
        h[0] = 4.0 / r3 - 12.0 * x.q1 * x.q1 / r5;
        h[1] = -12.0 * x.q1 * x.q2 / r5;
        h[5] = 4.0 / r3 - 12.0 * x.q2 * x.q2 / r5 + 1.0 / (x.q2 * x.q2 * x.q2);
        h[10] = 2.0;
        h[15] = 2.0;
        h[4] = h[1];
        return h;
    };
    s.in_domain = [](const State4& x) { return x.q2 >= 1e-10; };
    s.involutions = {
        {"rho1", {-1, 1, 1, -1}, {1, 2}}, // Fix: q1 = p2 = 0, chart (q2, p1)
        {"rho2", {1, 1, -1, -1}, {0, 1}}, // Fix: p1 = p2 = 0, chart (q1, q2)
    };
    s.fixed_state = [](int inv, double coord, double energy, int branch) -> FixedSetSolve {
        if (inv == 0) {
            const double eta = coord;
            if (eta < 1e-10) throw DomainExit("fixed-set start outside the half plane");
            const double k = energy + 3.5 / eta;
            if (k < 0)
                throw EnergyUnreachable("no start on the symmetry axis at this energy");
            return {State4{0, eta, branch * std::sqrt(k), 0}, 2};
        }
        // Rest points: solve -4/|q| + 1/(2 q2) = energy for q2 at given q1.
        const double q1 = coord;
        auto f = [&](double q2) {
            return -4.0 / std::hypot(q1, q2) + 0.5 / q2 - energy;
        };
        std::vector<std::pair<double, double>> roots; // (lo, hi) brackets
        double prev_x = 1e-6, prev_f = f(prev_x);
        for (int i = 1; i <= 600; ++i) {
            const double x = 1e-6 * std::pow(1e9 / 1e-6, i / 600.0);
            const double fx = f(x);
            if (std::isfinite(prev_f) && std::isfinite(fx) && prev_f * fx < 0)
                roots.emplace_back(prev_x, x);
            prev_x = x;
            prev_f = fx;
        }
        if (roots.empty())
            throw EnergyUnreachable("no rest point at this energy and first coordinate");
        const auto bracket = (branch >= 0) ? roots.back() : roots.front();
        double lo = bracket.first, hi = bracket.second;
        for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
        }
        return {State4{q1, 0.5 * (lo + hi), 0, 0}, 1};
    };
    return s;
}

inline SystemDef system_by_name(const std::string& name) {
    if (name == "hill") return hill_system();
    if (name == "langmuir") return langmuir_system();
    throw Error("unknown system: " + name);
}

// --- start states and critical points ---------------------------------------

/// Point of Fix(involutions[inv]) at the given chart coordinate and energy.
/// The remaining free coordinate is solved in closed form where possible and
/// polished with Newton steps on H - energy.
inline State4 state_on_fixed_set(const SystemDef& s, int inv, double coord, double energy,
                                 int branch) {
    if (inv < 0 || inv >= static_cast<int>(s.involutions.size()))
        throw Error("state_on_fixed_set: no such involution");
    FixedSetSolve fs = s.fixed_state(inv, coord, energy, branch);
    Vec4 v = fs.x.vec();
    for (int it = 0; it < 3; ++it) {
        const State4 x = State4::from(v);
        const double err = s.H(x) - energy;
        const double slope = s.grad(x)[fs.solved_index];
        if (std::fabs(slope) < 1e-14) break;
        v[fs.solved_index] -= err / slope;
    }
    const State4 x = State4::from(v);
    if (!(std::fabs(s.H(x) - energy) <= 1e-12 * std::max(1.0, std::fabs(energy))))
        throw EnergyUnreachable("start state failed the energy residual check");
    if (!s.involutions[inv].on_fixed_set(x, 1e-12))
        throw Error("state_on_fixed_set: left the fixed set");
    return x;
}

struct CriticalPoint {
    State4 x;
    double energy = 0;
};

struct CriticalSet {
    std::vector<CriticalPoint> points;
    int failed_seeds = 0;
};

/// Newton search for zeros of grad H from each seed, deduplicated.
inline CriticalSet critical_values(const SystemDef& s, const std::vector<State4>& seeds,
                                   double tol = 1e-13) {
    CriticalSet out;
    for (const State4& seed : seeds) {
        Vec4 v = seed.vec();
        bool ok = false;
        for (int it = 0; it < 80; ++it) {
            const State4 x = State4::from(v);
            if (!s.in_domain(x) || !all_finite(x)) break;
            const Vec4 g = s.grad(x);
            if (norm_inf(g) <= tol * std::max(1.0, norm_inf(v))) {
                ok = true;
                break;
            }
            Vec4 step;
            try {
                step = solve4(s.hess(x), g);
            } catch (const Error&) {
                break;
            }
            if (norm_inf(step) > 10.0) step = scale(step, 10.0 / norm_inf(step));
            v = sub(v, step);
        }
        if (!ok) {
            ++out.failed_seeds;
            continue;
        }
        const State4 x = State4::from(v);
        const bool dup = std::any_of(out.points.begin(), out.points.end(), [&](const CriticalPoint& c) {
            return dist_inf(c.x, x) <= 1e-8 * std::max(1.0, norm_inf(x));
        });
        if (!dup) out.points.push_back({x, s.H(x)});
    }
    std::sort(out.points.begin(), out.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        return a.x.q1 < b.x.q1;
    });
    return out;
}

} // namespace orbitk
