#pragma once

#include <cmath>
#include <stdexcept>

namespace svstab {

/// Dense 2x2 matrix used for the pointwise operator coefficients.
struct Mat2 {
    double m00 = 0.0, m01 = 0.0;
    double m10 = 0.0, m11 = 0.0;

    static Mat2 diag(double a, double b) { return {a, 0.0, 0.0, b}; }

    Mat2 operator+(const Mat2& o) const { return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11}; }
    Mat2 operator-(const Mat2& o) const { return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11}; }
    Mat2 operator*(const Mat2& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    Mat2 scaled(double s) const { return {s * m00, s * m01, s * m10, s * m11}; }
    Mat2 transpose() const { return {m00, m10, m01, m11}; }

    double det() const { return m00 * m11 - m01 * m10; }
    double trace() const { return m00 + m11; }
    double max_abs() const {
        return std::max(std::max(std::abs(m00), std::abs(m01)), std::max(std::abs(m10), std::abs(m11)));
    }

    void mul_vec(double x0, double x1, double& y0, double& y1) const {
        y0 = m00 * x0 + m01 * x1;
        y1 = m10 * x0 + m11 * x1;
    }
};

/// Eigenvalues of a 2x2 matrix with real spectrum (throws if the discriminant
/// is negative beyond round-off).
inline void eig2_real(const Mat2& a, double& lo, double& hi) {
    const double tr = a.trace();
    double disc = tr * tr - 4.0 * a.det();
    if (disc < 0.0) {
        if (disc > -1e-12 * std::max(1.0, tr * tr)) disc = 0.0;
        else throw std::domain_error("eig2_real: complex eigenvalues");
    }
    const double s = std::sqrt(disc);
    lo = 0.5 * (tr - s);
    hi = 0.5 * (tr + s);
}

/// Sylvester test for negative definiteness of a symmetric 2x2 matrix with a
/// strict margin: m00 <= -tol and det >= tol, tol scaled to the matrix.
inline bool negative_definite(const Mat2& a, double rel_tol = 1e-14) {
    const double scale = std::max(a.max_abs(), 1e-300);
    const double tol = rel_tol * scale;
    return a.m00 <= -tol && a.det() >= tol * scale;
}

}  // namespace svstab
