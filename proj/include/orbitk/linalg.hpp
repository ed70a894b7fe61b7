#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "orbitk/errors.hpp"

namespace orbitk {

using Vec2 = std::array<double, 2>;
using Vec4 = std::array<double, 4>;
using Mat4 = std::array<double, 16>; // row-major

inline constexpr double kPi = 3.14159265358979323846;

inline bool all_finite(const Vec4& v) {
    return std::isfinite(v[0]) && std::isfinite(v[1]) &&
           std::isfinite(v[2]) && std::isfinite(v[3]);
}

inline Vec4 add(const Vec4& a, const Vec4& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

inline Vec4 sub(const Vec4& a, const Vec4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

inline Vec4 scale(const Vec4& a, double s) {
    return {a[0] * s, a[1] * s, a[2] * s, a[3] * s};
}

inline double dot(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline double norm_inf(const Vec4& v) {
    return std::max(std::max(std::fabs(v[0]), std::fabs(v[1])),
                    std::max(std::fabs(v[2]), std::fabs(v[3])));
}

inline double norm2(const Vec4& v) { return std::sqrt(dot(v, v)); }

/// Symplectic pairing of tangent vectors at a phase-space point with
/// coordinate order (q1, q2, p1, p2). Chosen so the associated linear
/// map sends a gradient to the usual Hamiltonian vector field:
/// omega(u, v) = u_p . v_q - u_q . v_p.
inline double omega(const Vec4& u, const Vec4& v) {
    return u[2] * v[0] + u[3] * v[1] - u[0] * v[2] - u[1] * v[3];
}

inline Mat4 identity4() {
    return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
}

/// Matrix of the pairing above: omega(u,v) = u^T Omega v.
inline Mat4 omega4() {
    return {0, 0, -1, 0,
            0, 0, 0, -1,
            1, 0, 0, 0,
            0, 1, 0, 0};
}

inline Vec4 matvec(const Mat4& m, const Vec4& v) {
    Vec4 r{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) r[i] += m[4 * i + j] * v[j];
    return r;
}

inline Mat4 matmul(const Mat4& a, const Mat4& b) {
    Mat4 r{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < 4; ++k) {
            const double aik = a[4 * i + k];
            for (std::size_t j = 0; j < 4; ++j) r[4 * i + j] += aik * b[4 * k + j];
        }
    return r;
}

inline Mat4 transpose(const Mat4& m) {
    Mat4 r{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) r[4 * i + j] = m[4 * j + i];
    return r;
}

/// Induced infinity norm (max absolute row sum).
inline double norm_inf(const Mat4& m) {
    double best = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 4; ++j) s += std::fabs(m[4 * i + j]);
        best = std::max(best, s);
    }
    return best;
}

/// || D^T Omega D - Omega ||_inf. Zero exactly when D is symplectic.
inline double symplectic_residual(const Mat4& d) {
    const Mat4 om = omega4();
    Mat4 r = matmul(transpose(d), matmul(om, d));
    double best = 0;
    for (std::size_t i = 0; i < 16; ++i) best = std::max(best, std::fabs(r[i] - om[i]));
    return best;
}

/// Column j of m.
inline Vec4 column(const Mat4& m, std::size_t j) {
    return {m[j], m[4 + j], m[8 + j], m[12 + j]};
}

/// Solve m x = b by Gaussian elimination with partial pivoting.
inline Vec4 solve4(Mat4 m, Vec4 b) {
    for (std::size_t col = 0; col < 4; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < 4; ++r)
            if (std::fabs(m[4 * r + col]) > std::fabs(m[4 * piv + col])) piv = r;
        if (std::fabs(m[4 * piv + col]) < 1e-300)
            throw Error("solve4: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < 4; ++j) std::swap(m[4 * piv + j], m[4 * col + j]);
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < 4; ++r) {
            const double f = m[4 * r + col] / m[4 * col + col];
            for (std::size_t j = col; j < 4; ++j) m[4 * r + j] -= f * m[4 * col + j];
            b[r] -= f * b[col];
        }
    }
    Vec4 x{};
    for (std::size_t i = 4; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < 4; ++j) s -= m[4 * i + j] * x[j];
        x[i] = s / m[4 * i + i];
    }
    return x;
}

} // namespace orbitk
