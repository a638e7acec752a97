#pragma once

// Exact small-matrix algebra: 2x2 conformal/anticonformal decomposition,
// determinants, cofactors, 3x3 minors and closed-form singular values.
// Everything here is pure and cheap enough for hot scan loops.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace ellrig {

using cplx = std::complex<double>;

// ---------------------------------------------------------------- Mat2 -----

struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

    friend Mat2 operator+(const Mat2& a, const Mat2& b) {
        return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
    }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
    }
    friend Mat2 operator*(double s, const Mat2& a) {
        return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
    }

    double det() const { return a11 * a22 - a12 * a21; }
    double frob_sq() const { return a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22; }
    double frob() const { return std::sqrt(frob_sq()); }

    std::array<double, 4> vec() const { return {a11, a12, a21, a22}; }
    static Mat2 from_vec(const std::array<double, 4>& v) { return {v[0], v[1], v[2], v[3]}; }

    /// Row as a complex number under the fixed (r1, r2) -> r1 + i*r2 convention.
    cplx row1() const { return {a11, a12}; }
    cplx row2() const { return {a21, a22}; }
};

inline double dot(const Mat2& a, const Mat2& b) {
    return a.a11 * b.a11 + a.a12 * b.a12 + a.a21 * b.a21 + a.a22 * b.a22;
}

// ------------------------------------------------ conformal decomposition --

/// (z+, z-) with M = [z+, z-]; the decomposition is unique.
struct ConformalPair {
    cplx zp;  // conformal part
    cplx zm;  // anticonformal part
};

inline ConformalPair decompose(const Mat2& m) {
    return {cplx{0.5 * (m.a11 + m.a22), 0.5 * (m.a21 - m.a12)},
            cplx{0.5 * (m.a11 - m.a22), 0.5 * (m.a12 + m.a21)}};
}

inline Mat2 recompose(const ConformalPair& p) {
    return {p.zp.real() + p.zm.real(), -p.zp.imag() + p.zm.imag(),
            p.zp.imag() + p.zm.imag(), p.zp.real() - p.zm.real()};
}

struct NormsDet {
    double det;      // |z+|^2 - |z-|^2
    double frob_sq;  // 2|z+|^2 + 2|z-|^2
    double opnorm;   // |z+| + |z-|
};

inline NormsDet norms_and_det(const ConformalPair& p) {
    const double np = std::norm(p.zp), nm = std::norm(p.zm);
    return {np - nm, 2.0 * (np + nm), std::abs(p.zp) + std::abs(p.zm)};
}

// ------------------------------------------------------------- cofactor ----

/// cof([[a,b],[c,d]]) = [[d,-c],[-b,a]]; satisfies M cof(M)^T = det(M) I.
inline Mat2 cofactor(const Mat2& m) { return {m.a22, -m.a21, -m.a12, m.a11}; }

// -------------------------------------------------------- singular values --

/// Largest singular value of a 2x2 matrix (operator norm), |z+| + |z-|.
inline double sigma1(const Mat2& m) {
    const auto p = decompose(m);
    return std::abs(p.zp) + std::abs(p.zm);
}

/// Second singular value of a 2x2 matrix, | |z+| - |z-| |; zero iff rank <= 1.
inline double sigma2(const Mat2& m) {
    const auto p = decompose(m);
    return std::abs(std::abs(p.zp) - std::abs(p.zm));
}

// ---------------------------------------------------------------- Mat3 -----

struct Mat3 {
    // row-major entries
    std::array<double, 9> m{};

    double& operator()(int i, int j) { return m[static_cast<size_t>(3 * i + j)]; }
    double operator()(int i, int j) const { return m[static_cast<size_t>(3 * i + j)]; }

    friend Mat3 operator+(const Mat3& a, const Mat3& b) {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[static_cast<size_t>(i)] = a.m[static_cast<size_t>(i)] + b.m[static_cast<size_t>(i)];
        return r;
    }
    friend Mat3 operator-(const Mat3& a, const Mat3& b) {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[static_cast<size_t>(i)] = a.m[static_cast<size_t>(i)] - b.m[static_cast<size_t>(i)];
        return r;
    }
    friend Mat3 operator*(double s, const Mat3& a) {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[static_cast<size_t>(i)] = s * a.m[static_cast<size_t>(i)];
        return r;
    }

    double frob_sq() const {
        double s = 0;
        for (double v : m) s += v * v;
        return s;
    }
    double frob() const { return std::sqrt(frob_sq()); }
};

/// Determinant of the 2x2 submatrix on rows (i1,i2), columns (j1,j2), 1-based.
/// Throws std::invalid_argument unless 1 <= i1 < i2 <= 3 and 1 <= j1 < j2 <= 3.
inline double minor3(const Mat3& a, int i1, int i2, int j1, int j2) {
    if (i1 < 1 || i2 <= i1 || i2 > 3 || j1 < 1 || j2 <= j1 || j2 > 3)
        throw std::invalid_argument("minor3: index pairs must be increasing and in {1,2,3}");
    const int r1 = i1 - 1, r2 = i2 - 1, c1 = j1 - 1, c2 = j2 - 1;
    return a(r1, c1) * a(r2, c2) - a(r1, c2) * a(r2, c1);
}

/// Eigenvalues of a symmetric 3x3 matrix, descending, by the trigonometric
/// closed form (no iteration; deterministic in scan loops).
std::array<double, 3> sym3_eigenvalues(const Mat3& a);

/// Singular values of a 3x3 matrix, descending, via eigenvalues of M^T M.
std::array<double, 3> singular_values(const Mat3& m);

/// Second singular value; zero iff rank <= 1.
inline double sigma2(const Mat3& m) { return singular_values(m)[1]; }

inline double sigma1(const Mat3& m) { return singular_values(m)[0]; }

// ------------------------------------------------------- 4-vector helpers --

/// Rank-3 orthogonal projector I4 - tau tau^T acting on vec(Mat2); the fixed
/// vec order is (a11, a12, a21, a22).
struct Proj4 {
    std::array<double, 16> p{};

    std::array<double, 4> apply(const std::array<double, 4>& x) const {
        std::array<double, 4> y{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) y[static_cast<size_t>(i)] += p[static_cast<size_t>(4 * i + j)] * x[static_cast<size_t>(j)];
        return y;
    }
    Mat2 apply(const Mat2& m) const { return Mat2::from_vec(apply(m.vec())); }
    double trace() const { return p[0] + p[5] + p[10] + p[15]; }
};

/// I4 - tau tau^T for a unit 4-vector tau.
Proj4 projector_perp(const std::array<double, 4>& tau);

}  // namespace ellrig
