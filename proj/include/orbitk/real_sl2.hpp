#pragma once

// 2x2 unit-determinant matrices, their trace classification, and the sign
// invariant attached to matrices whose diagonal entries agree. That form is
// what reflected-symmetric linearizations reduce to, and the sign of the
// upper-right entry is invariant under the allowed changes of frame.

#include <cmath>
#include <string>
#include <utility>

#include "orbitk/errors.hpp"

namespace orbitk {

enum class KreinSign { Plus, Minus };

enum class OrbitClass {
    PositiveHyperbolic, // trace > 2
    NegativeHyperbolic, // trace < -2
    Elliptic,           // -2 < trace < 2
    DegeneratePlus,     // trace == 2 within tolerance
    DegenerateMinus,    // trace == -2 within tolerance
};

inline const char* to_string(KreinSign s) {
    return s == KreinSign::Plus ? "+" : "-";
}

inline const char* to_string(OrbitClass c) {
    switch (c) {
        case OrbitClass::PositiveHyperbolic: return "positive-hyperbolic";
        case OrbitClass::NegativeHyperbolic: return "negative-hyperbolic";
        case OrbitClass::Elliptic: return "elliptic";
        case OrbitClass::DegeneratePlus: return "degenerate-plus";
        case OrbitClass::DegenerateMinus: return "degenerate-minus";
    }
    return "?";
}

/// Row-major [[a, b], [c, d]] with det = 1 enforced at construction.
struct RealSL2 {
    double a = 1, b = 0, c = 0, d = 1;
};

inline double det(const RealSL2& m) { return m.a * m.d - m.b * m.c; }
inline double trace(const RealSL2& m) { return m.a + m.d; }

inline double norm_inf(const RealSL2& m) {
    return std::max(std::fabs(m.a) + std::fabs(m.b), std::fabs(m.c) + std::fabs(m.d));
}

inline constexpr double kDetTol = 1e-9;      // unit-determinant slack
inline constexpr double kTraceBand = 1e-9;   // half-width of the degenerate trace band
inline constexpr double kFormTol = 1e-9;     // diagonal-agreement slack, relative

/// Validating constructor. The determinant check is relative because entries
/// of reduced return maps can be large for strongly hyperbolic orbits.
inline RealSL2 make_sl2(double a, double b, double c, double d, double tol = kDetTol) {
    const RealSL2 m{a, b, c, d};
    const double scale = std::max(1.0, norm_inf(m) * norm_inf(m));
    if (!(std::fabs(det(m) - 1.0) <= tol * scale))
        throw DeterminantError("make_sl2: determinant " + std::to_string(det(m)) + " != 1");
    return m;
}

inline RealSL2 mul(const RealSL2& x, const RealSL2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

/// Inverse of a unit-determinant matrix.
inline RealSL2 inverse(const RealSL2& m) { return {m.d, -m.b, -m.c, m.a}; }

/// Conjugation R m R by the reflection R = diag(1, -1).
inline RealSL2 reflect(const RealSL2& m) { return {m.a, -m.b, -m.c, m.d}; }

/// Trace classification with a symmetric degenerate band of half-width tol
/// around both +2 and -2.
inline OrbitClass classify(const RealSL2& m, double tol = kTraceBand) {
    const double t = trace(m);
    if (std::fabs(t - 2.0) <= tol) return OrbitClass::DegeneratePlus;
    if (std::fabs(t + 2.0) <= tol) return OrbitClass::DegenerateMinus;
    if (t > 2.0) return OrbitClass::PositiveHyperbolic;
    if (t < -2.0) return OrbitClass::NegativeHyperbolic;
    return OrbitClass::Elliptic;
}

/// Diagonal entries agree within a tolerance relative to the matrix size.
inline bool is_slr_form(const RealSL2& m, double tol = kFormTol) {
    return std::fabs(m.a - m.d) <= tol * std::max(1.0, norm_inf(m));
}

/// Sign invariant of a matrix with equal diagonal entries and trace away
/// from +-2: the sign of the upper-right entry. Away from the degenerate
/// band that entry cannot vanish, since a == d and a^2 - bc = 1 force
/// bc = a^2 - 1 != 0. form_tol loosens the diagonal check for matrices
/// assembled from integrated flows, where a and d agree only to the
/// accuracy of the integration.
inline KreinSign real_krein_sign(const RealSL2& m, double tol = kTraceBand,
                                 double form_tol = kFormTol) {
    if (!is_slr_form(m, form_tol))
        throw NotSLRForm("real_krein_sign: diagonal entries differ: a=" +
                         std::to_string(m.a) + " d=" + std::to_string(m.d));
    if (std::fabs(std::fabs(trace(m)) - 2.0) <= tol)
        throw DegenerateTrace("real_krein_sign: |trace| = 2 within tolerance");
    return m.b > 0 ? KreinSign::Plus : KreinSign::Minus;
}

/// Pair (A, B) tied by B = [[d, b], [c, a]] where A = [[a, b], [c, d]].
/// Equivalently R A R = B^{-1} with R = diag(1, -1).
struct RealCouple {
    RealSL2 A, B;
};

/// The partner matrix swaps the diagonal of A and keeps b, c.
inline RealSL2 couple_partner(const RealSL2& A) { return {A.d, A.b, A.c, A.a}; }

inline RealCouple couple_from_A(const RealSL2& A) { return {A, couple_partner(A)}; }

/// Validating constructor for an independently supplied pair.
inline RealCouple make_couple(const RealSL2& A, const RealSL2& B, double tol = kFormTol) {
    const RealSL2 want = couple_partner(A);
    const double scale = std::max(1.0, norm_inf(A));
    const double res = std::max(std::max(std::fabs(B.a - want.a), std::fabs(B.b - want.b)),
                                std::max(std::fabs(B.c - want.c), std::fabs(B.d - want.d)));
    if (!(res <= tol * scale))
        throw NotSLRForm("make_couple: B is not the partner of A (residual " +
                         std::to_string(res) + ")");
    return {A, B};
}

/// Both products of a couple. They share the trace 2(ad + bc) and differ
/// only in their off-diagonal entries 2ab, 2cd versus 2bd, 2ac.
inline std::pair<RealSL2, RealSL2> couple_products(const RealCouple& cp) {
    return {mul(cp.A, cp.B), mul(cp.B, cp.A)};
}

/// A couple is symmetric when both members are themselves reflection
/// conjugate to their inverses, i.e. have equal diagonal entries. For a
/// valid couple this forces A = B, so the two products coincide.
inline bool is_symmetric_couple(const RealCouple& cp, double tol = kFormTol) {
    return is_slr_form(cp.A, tol) && is_slr_form(cp.B, tol);
}

/// Evaluates both sides of the equivalence "the two product sign invariants
/// differ exactly when the products are negative hyperbolic". Returns
/// {signs_differ, negative_hyperbolic}; the two entries are provably equal.
inline std::pair<bool, bool> signs_differ_iff_negative(const RealCouple& cp,
                                                       double tol = kTraceBand) {
    const auto [ab, ba] = couple_products(cp);
    const KreinSign sab = real_krein_sign(ab, tol);
    const KreinSign sba = real_krein_sign(ba, tol);
    const bool differ = sab != sba;
    const bool neg = classify(ab, tol) == OrbitClass::NegativeHyperbolic;
    return {differ, neg};
}

} // namespace orbitk
