#include "ellrig/mat.hpp"

#include <algorithm>

namespace ellrig {

std::array<double, 3> sym3_eigenvalues(const Mat3& a) {
    const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (p1 == 0.0) {
        std::array<double, 3> e{a(0, 0), a(1, 1), a(2, 2)};
        std::sort(e.begin(), e.end(), std::greater<>());
        return e;
    }
    const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
    const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                      (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Mat3 b;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b(i, j) = (a(i, j) - (i == j ? q : 0.0)) / p;
    const double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                        b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                        b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    const double r = std::clamp(detb / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    return {e1, e2, e3};
}

std::array<double, 3> singular_values(const Mat3& m) {
    Mat3 g;  // M^T M, symmetric positive semidefinite
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += m(k, i) * m(k, j);
            g(i, j) = s;
        }
    auto e = sym3_eigenvalues(g);
    for (double& v : e) v = std::sqrt(std::max(v, 0.0));
    return e;
}

Proj4 projector_perp(const std::array<double, 4>& tau) {
    Proj4 q;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            q.p[static_cast<size_t>(4 * i + j)] =
                (i == j ? 1.0 : 0.0) - tau[static_cast<size_t>(i)] * tau[static_cast<size_t>(j)];
    return q;
}

}  // namespace ellrig
