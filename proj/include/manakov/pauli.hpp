#pragma once

#include <cmath>

#include "manakov/core.hpp"

namespace manakov {

/// 2x2 complex matrix, row-major.
struct Mat2 {
    Complex a00{}, a01{}, a10{}, a11{};

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    Spinor apply(const Spinor& v) const noexcept {
        return {a00 * v[0] + a01 * v[1], a10 * v[0] + a11 * v[1]};
    }

    Mat2 operator*(const Mat2& o) const noexcept {
        return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
                a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
    }

    Mat2 adjoint() const noexcept {
        return {std::conj(a00), std::conj(a10), std::conj(a01), std::conj(a11)};
    }
};

inline constexpr Mat2 kSigma1{0.0, 1.0, 1.0, 0.0};
inline constexpr Mat2 kSigma2{0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0};
inline constexpr Mat2 kSigma3{1.0, 0.0, 0.0, -1.0};

/// a1 sigma1 + a2 sigma2 + a3 sigma3
inline Mat2 pauli_combination(double a1, double a2, double a3) noexcept {
    return {a3, Complex(a1, -a2), Complex(a1, a2), -a3};
}

/// exp(i (a1 sigma1 + a2 sigma2 + a3 sigma3)).  The generator squares to
/// |a|^2 I, so the exponential is cos|a| I + i sin|a| (a . sigma)/|a|.
inline Mat2 su2_exp(double a1, double a2, double a3) noexcept {
    const double r = std::sqrt(a1 * a1 + a2 * a2 + a3 * a3);
    if (r == 0.0) return Mat2::identity();
    const double c = std::cos(r);
    const double s = std::sin(r) / r;
    const Complex is(0.0, s);
    return {c + is * a3, is * Complex(a1, -a2), is * Complex(a1, a2), c - is * a3};
}

}  // namespace manakov
