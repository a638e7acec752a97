#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "ellrig/mat.hpp"
#include "ellrig/parallel.hpp"
#include "oracles.hpp"

using namespace ellrig;

namespace {
Mat2 random_mat2(par::Rng& rng, double scale = 3.0) {
    return {rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale),
            rng.uniform(-scale, scale)};
}
}  // namespace

TEST_CASE("conformal decomposition of the basis cases") {
    // identity is purely conformal
    auto p = decompose(Mat2{1, 0, 0, 1});
    CHECK(p.zp == cplx(1, 0));
    CHECK(p.zm == cplx(0, 0));

    // diag(1,-1) is purely anticonformal
    p = decompose(Mat2{1, 0, 0, -1});
    CHECK(p.zp == cplx(0, 0));
    CHECK(p.zm == cplx(1, 0));

    // rotation by pi/2
    p = decompose(Mat2{0, -1, 1, 0});
    CHECK(p.zp == cplx(0, 1));
    CHECK(p.zm == cplx(0, 0));
}

TEST_CASE("decompose/recompose round-trip is exact to a few ulp") {
    par::Rng rng(101);
    for (int it = 0; it < 2000; ++it) {
        const Mat2 m = random_mat2(rng);
        const Mat2 r = recompose(decompose(m));
        // 4 ulp at the matrix scale; small entries cancel against large ones
        const double scale = std::max({std::abs(m.a11), std::abs(m.a12), std::abs(m.a21),
                                       std::abs(m.a22)});
        for (int e = 0; e < 4; ++e) {
            const double a = m.vec()[static_cast<size_t>(e)], b = r.vec()[static_cast<size_t>(e)];
            CHECK(std::abs(a - b) <= 4.0 * scale * std::numeric_limits<double>::epsilon());
        }
    }
}

TEST_CASE("norm and determinant identities") {
    // z+ = 1, z- = 0: the identity matrix
    auto nd = norms_and_det({cplx(1, 0), cplx(0, 0)});
    CHECK(nd.det == doctest::Approx(1.0));
    CHECK(nd.frob_sq == doctest::Approx(2.0));
    CHECK(nd.opnorm == doctest::Approx(1.0));

    // z+ = 1, z- = 1: diag(2, 0)
    nd = norms_and_det({cplx(1, 0), cplx(1, 0)});
    CHECK(nd.det == doctest::Approx(0.0));
    CHECK(nd.frob_sq == doctest::Approx(4.0));
    CHECK(nd.opnorm == doctest::Approx(2.0));

    // z+ = 3, z- = i
    nd = norms_and_det({cplx(3, 0), cplx(0, 1)});
    CHECK(nd.det == doctest::Approx(8.0));
    CHECK(nd.frob_sq == doctest::Approx(20.0));
    CHECK(nd.opnorm == doctest::Approx(4.0));
}

TEST_CASE("identities agree with direct matrix computation on random input") {
    par::Rng rng(7);
    for (int it = 0; it < 10000; ++it) {
        const Mat2 m = random_mat2(rng);
        const auto nd = norms_and_det(decompose(m));
        CHECK(nd.det == doctest::Approx(m.det()).epsilon(1e-12));
        CHECK(nd.frob_sq == doctest::Approx(m.frob_sq()).epsilon(1e-12));
        const auto sv = oracle::singular_values2(m);
        CHECK(nd.opnorm == doctest::Approx(sv[0]).epsilon(1e-12));
    }
}

TEST_CASE("cofactor formula and the Cramer identity") {
    CHECK(cofactor(Mat2{1, 0, 0, 1}).vec() == Mat2{1, 0, 0, 1}.vec());

    const Mat2 c = cofactor(Mat2{1, 2, 3, 4});
    CHECK(c.a11 == 4);
    CHECK(c.a12 == -3);
    CHECK(c.a21 == -2);
    CHECK(c.a22 == 1);

    par::Rng rng(11);
    for (int it = 0; it < 1000; ++it) {
        const Mat2 m = random_mat2(rng);
        const Mat2 cf = cofactor(m);
        // M cof(M)^T = det(M) I
        const double d = m.det();
        CHECK(std::abs(m.a11 * cf.a11 + m.a12 * cf.a12 - d) < 1e-14 * (1 + std::abs(d)));
        CHECK(std::abs(m.a11 * cf.a21 + m.a12 * cf.a22) < 1e-14 * (1 + std::abs(d)));
        CHECK(std::abs(m.a21 * cf.a11 + m.a22 * cf.a12) < 1e-14 * (1 + std::abs(d)));
        CHECK(std::abs(m.a21 * cf.a21 + m.a22 * cf.a22 - d) < 1e-14 * (1 + std::abs(d)));
    }
}

TEST_CASE("3x3 minors") {
    Mat3 eye;
    eye(0, 0) = eye(1, 1) = eye(2, 2) = 1;
    CHECK(minor3(eye, 1, 2, 1, 2) == doctest::Approx(1.0));

    // column-one family member with entries (1+a, 0; 0, 1) in the top block
    Mat3 t1;
    t1(0, 0) = 2;
    t1(1, 1) = 1;
    t1(2, 0) = 2;
    CHECK(minor3(t1, 1, 2, 1, 2) == doctest::Approx(2.0));

    // equal selected rows give a singular submatrix
    Mat3 dup;
    for (int j = 0; j < 3; ++j) {
        dup(0, j) = j + 1.0;
        dup(1, j) = j + 1.0;
        dup(2, j) = 7.0 * j;
    }
    CHECK(minor3(dup, 1, 2, 1, 3) == doctest::Approx(0.0));

    CHECK_THROWS_AS(minor3(eye, 2, 1, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(minor3(eye, 1, 1, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(minor3(eye, 1, 2, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(minor3(eye, 1, 4, 1, 2), std::invalid_argument);
}

TEST_CASE("second singular value: closed forms against the Jacobi oracle") {
    Mat3 eye;
    eye(0, 0) = eye(1, 1) = eye(2, 2) = 1;
    CHECK(sigma2(eye) == doctest::Approx(1.0));

    Mat3 diag;
    diag(0, 0) = 3;
    diag(1, 1) = 2;
    diag(2, 2) = 1;
    CHECK(sigma2(diag) == doctest::Approx(2.0));

    // rank-one b (x) n vanishes
    Mat3 r1;
    r1(0, 0) = 1;
    r1(2, 0) = 1;
    CHECK(sigma2(r1) <= 1e-12 * r1.frob());

    par::Rng rng(13);
    for (int it = 0; it < 2000; ++it) {
        const Mat2 m = random_mat2(rng);
        const auto sv = oracle::singular_values2(m);
        CHECK(std::abs(sigma2(m) - sv[1]) < 1e-10);
        CHECK(std::abs(sigma1(m) - sv[0]) < 1e-10);
    }
    for (int it = 0; it < 2000; ++it) {
        Mat3 m;
        for (int e = 0; e < 9; ++e) m.m[static_cast<size_t>(e)] = rng.uniform(-3, 3);
        const auto sv = oracle::singular_values3(m);
        const auto mine = singular_values(m);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(mine[static_cast<size_t>(i)] - sv[static_cast<size_t>(i)]) < 1e-10);
    }
}

TEST_CASE("rank-3 tangent-space projector") {
    const std::array<double, 4> tau{0.5, 0.5, 0.5, 0.5};
    const Proj4 p = projector_perp(tau);

    // kernel is the tangent line
    const auto ptau = p.apply(tau);
    for (double v : ptau) CHECK(std::abs(v) < 1e-15);

    // identity on the orthogonal complement
    const std::array<double, 4> x{0.5, -0.5, 0.5, -0.5};
    const auto px = p.apply(x);
    for (int i = 0; i < 4; ++i) CHECK(px[static_cast<size_t>(i)] == doctest::Approx(x[static_cast<size_t>(i)]));

    CHECK(p.trace() == doctest::Approx(3.0));

    // idempotent
    const std::array<double, 4> y{1, 2, 3, 4};
    const auto pp = p.apply(p.apply(y));
    const auto p1 = p.apply(y);
    for (int i = 0; i < 4; ++i) CHECK(pp[static_cast<size_t>(i)] == doctest::Approx(p1[static_cast<size_t>(i)]));
}
