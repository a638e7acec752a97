#pragma once

// Test-only oracles, independent of the library's computation paths:
// Jacobi eigenvalue iteration for singular values, centered finite
// differences, and a tiny trapezoid quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "ellrig/mat.hpp"

namespace oracle {

/// Singular values by cyclic Jacobi on M^T M (any square size up to 4).
template <int N>
std::array<double, N> singular_values(const std::array<std::array<double, N>, N>& m) {
    std::array<std::array<double, N>, N> g{};
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            double s = 0;
            for (int k = 0; k < N; ++k) s += m[k][i] * m[k][j];
            g[i][j] = s;
        }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) off += g[p][q] * g[p][q];
        if (off < 1e-30) break;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) {
                if (std::abs(g[p][q]) < 1e-300) continue;
                const double theta = 0.5 * std::atan2(2 * g[p][q], g[q][q] - g[p][p]);
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < N; ++k) {
                    const double gkp = g[k][p], gkq = g[k][q];
                    g[k][p] = c * gkp - s * gkq;
                    g[k][q] = s * gkp + c * gkq;
                }
                for (int k = 0; k < N; ++k) {
                    const double gpk = g[p][k], gqk = g[q][k];
                    g[p][k] = c * gpk - s * gqk;
                    g[q][k] = s * gpk + c * gqk;
                }
            }
    }
    std::array<double, N> ev{};
    for (int i = 0; i < N; ++i) ev[i] = std::sqrt(std::max(g[i][i], 0.0));
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

inline std::array<double, 2> singular_values2(const ellrig::Mat2& m) {
    return singular_values<2>({{{m.a11, m.a12}, {m.a21, m.a22}}});
}

inline std::array<double, 3> singular_values3(const ellrig::Mat3& m) {
    return singular_values<3>({{{m(0, 0), m(0, 1), m(0, 2)},
                                {m(1, 0), m(1, 1), m(1, 2)},
                                {m(2, 0), m(2, 1), m(2, 2)}}});
}

/// Centered finite difference.
inline double diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

/// Composite trapezoid rule on [a, b].
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
    double s = 0.5 * (f(a) + f(b));
    const double h = (b - a) / n;
    for (int i = 1; i < n; ++i) s += f(a + i * h);
    return s * h;
}

}  // namespace oracle
