#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ellrig/curve.hpp"
#include "ellrig/parallel.hpp"

using namespace ellrig;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// sample table of a closed analytic curve given by conformal parts
CurveSpec table_from(const std::function<cplx(double)>& zp, const std::function<cplx(double)>& zm,
                     int rows) {
    std::vector<double> ts(static_cast<size_t>(rows));
    std::vector<Mat2> ms(static_cast<size_t>(rows));
    for (int i = 0; i < rows; ++i) {
        const double t = kTwoPi * i / rows;
        ts[static_cast<size_t>(i)] = t;
        ms[static_cast<size_t>(i)] = recompose({zp(t), zm(t)});
    }
    return CurveSpec::from_samples(std::move(ts), std::move(ms));
}
}  // namespace

TEST_CASE("builtin families sample correctly") {
    const CurveK so2 = build_curve(CurveSpec::so2(), 256);
    for (std::size_t i = 0; i < so2.size(); i += 17) {
        CHECK(so2.mp(i).frob_sq() == doctest::Approx(2.0));  // |M'|^2 = 2
        CHECK(so2.mp(i).det() == doctest::Approx(1.0));
        CHECK(std::abs(so2.zm(i)) == doctest::Approx(0.0));
    }

    const CurveK kc = build_curve(CurveSpec::kc(0.5), 256);
    for (std::size_t i = 0; i < kc.size(); i += 17)
        CHECK(std::abs(kc.zm(i) - 0.5 * std::conj(kc.zp(i))) < 1e-14);

    const CurveK w2 = build_curve(CurveSpec::winding2(0.2), 256);
    for (std::size_t i = 0; i < w2.size(); i += 17)
        CHECK(std::abs(w2.zm(i)) == doctest::Approx(0.2));

    CHECK_THROWS_AS(build_curve(CurveSpec::so2(), 32), ValidationError);
}

TEST_CASE("non-closed sample tables are rejected") {
    // an open arc: half a turn only
    std::vector<double> ts;
    std::vector<Mat2> ms;
    for (int i = 0; i < 128; ++i) {
        const double t = std::numbers::pi * i / 128.0;  // covers [0, pi) only
        ts.push_back(t);
        ms.push_back(recompose({std::polar(1.0, 3.0 * t), cplx(0, 0)}));
    }
    CHECK_THROWS_AS(build_curve(CurveSpec::from_samples(ts, ms), 128), ValidationError);
}

TEST_CASE("ellipticity constants of the builtin families") {
    const CurveK so2 = build_curve(CurveSpec::so2(), 512);
    CHECK(ellipticity_constant(so2) == doctest::Approx(2.0).epsilon(1e-6));

    // pair ratio is identically 2(1+c^2)/(1-c^2) for this family
    const CurveK kc = build_curve(CurveSpec::kc(0.5), 512);
    CHECK(ellipticity_constant(kc) == doctest::Approx(10.0 / 3.0).epsilon(3e-5));

    const CurveK degen = build_curve(CurveSpec::kc(1.0), 256);
    CHECK_THROWS_AS(ellipticity_constant(degen), NotElliptic);
}

TEST_CASE("rank-one scans") {
    const CurveK so2 = build_curve(CurveSpec::so2(), 512);
    CHECK(rank_one_scan(so2) == doctest::Approx(0.5).epsilon(1e-6));

    const CurveK kc = build_curve(CurveSpec::kc(0.5), 512);
    CHECK(rank_one_scan(kc) == doctest::Approx(0.3).epsilon(1e-3));

    // planted rank-one connection between t = 0 and t = pi
    auto planted = table_from(
        [](double t) { return std::polar(1.0, t); }, [](double) { return cplx(0, 0); }, 256);
    for (int i = 0; i < 256; ++i) {
        const double t = kTwoPi * i / 256.0;
        const double s = std::sin(0.5 * t);
        const Mat2 d{3, 0, 0, 2};  // -2I + D = e1 (x) e1
        planted.ms[static_cast<size_t>(i)] = planted.ms[static_cast<size_t>(i)] + (s * s) * d;
    }
    const CurveK bad = build_curve(planted, 256);
    CHECK(rank_one_scan(bad) <= 1e-8);
}

TEST_CASE("scan duality: min ratio times C* is one") {
    for (const auto& spec :
         {CurveSpec::so2(), CurveSpec::kc(0.5), CurveSpec::winding2(0.2)}) {
        const CurveK k = build_curve(spec, 512);
        const double cs = ellipticity_constant(k);
        const double mr = rank_one_scan(k);
        CHECK(mr * cs == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("conformal data") {
    const CurveK so2 = build_curve(CurveSpec::so2(), 512);
    auto cd = conformal_data(so2, ellipticity_constant(so2));
    CHECK(cd.k_measured == doctest::Approx(0.0));
    CHECK(cd.k_bound == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

    const CurveK kc = build_curve(CurveSpec::kc(0.5), 512);
    cd = conformal_data(kc, ellipticity_constant(kc));
    CHECK(cd.k_measured == doctest::Approx(0.5).epsilon(1e-9));

    // the winding-2 family attains its Lipschitz constant 2c in the tangent limit
    const CurveK w2 = build_curve(CurveSpec::winding2(0.2), 512);
    cd = conformal_data(w2, ellipticity_constant(w2));
    CHECK(cd.k_measured == doctest::Approx(0.4).epsilon(1e-3));
    CHECK(cd.k_measured <= cd.k_bound + 1e-6);

    // conformal projection double-covers the circle: not injective
    const CurveSpec dbl = table_from([](double t) { return std::polar(1.0, 2.0 * t); },
                                     [](double t) { return 0.3 * std::polar(1.0, -t); }, 256);
    const CurveK bad = build_curve(dbl, 256);
    CHECK_THROWS_AS(conformal_data(bad, 10.0), InjectivityFailure);
}

TEST_CASE("the k chain holds on every builtin curve") {
    for (const auto& spec :
         {CurveSpec::so2(), CurveSpec::kc(0.3), CurveSpec::kc(0.5), CurveSpec::winding2(0.2)}) {
        const CurveK k = build_curve(spec, 512);
        const auto cd = conformal_data(k, ellipticity_constant(k));
        CHECK(cd.k_measured <= cd.k_bound + 1e-6);
        CHECK(k.min_det_tangent() > 0);
    }
}

TEST_CASE("a rank-one tangent is caught by the tangent-limit gate") {
    // |z-'|^2 = 0.61 + 0.6 cos t exceeds |z+'|^2 = 1 near t = 0
    const CurveSpec spec = table_from(
        [](double t) { return std::polar(1.0, t); },
        [](double t) { return 0.5 * std::polar(1.0, t) + 0.3 * std::polar(1.0, 2.0 * t); }, 256);
    const CurveK k = build_curve(spec, 256);
    CHECK(k.min_det_tangent() < 0);
    CHECK_THROWS_AS(ellipticity_constant(k), NotElliptic);
}

TEST_CASE("nearest-point projection") {
    const CurveK so2 = build_curve(CurveSpec::so2(), 512);

    // a sample point projects to itself
    const Mat2 m = so2.m(37);
    auto pr = project(so2, m);
    CHECK(pr.dist <= 1e-9);
    CHECK((pr.p - m).frob() <= 1e-9);

    // conformal scaling projects to its rotation
    pr = project(so2, Mat2{2, 0, 0, 2});
    CHECK(pr.dist == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK((pr.p - Mat2{1, 0, 0, 1}).frob() < 1e-7);
    CHECK_FALSE(pr.multiple);

    // diag(1,-1) is equidistant from every rotation
    pr = project(so2, Mat2{1, 0, 0, -1});
    CHECK(pr.dist == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(pr.multiple);

    // idempotence
    par::Rng rng(5);
    for (int it = 0; it < 20; ++it) {
        const Mat2 x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                     rng.uniform(-1, 1)};
        const auto p1 = project(so2, x);
        const auto p2 = project(so2, p1.p);
        CHECK(p2.dist <= 1e-9);
        CHECK((p2.p - p1.p).frob() <= 1e-9);
    }
}

TEST_CASE("tangent projector") {
    const CurveK so2 = build_curve(CurveSpec::so2(), 256);
    const double t = 0.9;
    const Proj4 p = tangent_projector(so2, t);

    const Mat2 mp = so2.eval_deriv(t);
    const auto ptau = p.apply(mp);
    CHECK(ptau.frob() < 1e-12);

    // an orthogonal direction is fixed
    const Mat2 m = so2.eval(t);  // M is orthogonal to M' on this curve
    const auto pm = p.apply(m);
    CHECK((pm - m).frob() < 1e-12);

    CHECK(p.trace() == doctest::Approx(3.0));
}

TEST_CASE("reach estimate") {
    const CurveK a = build_curve(CurveSpec::so2(), 256);
    const CurveK b = build_curve(CurveSpec::so2(), 512);
    const double ra = reach_estimate(a), rb = reach_estimate(b);
    CHECK(ra > 0);
    CHECK(std::abs(ra - rb) / rb < 0.05);
    // the curvature radius of this curve is sqrt(2)
    CHECK(ra == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));

    // scaling the curve scales the estimate
    const CurveSpec scaled = table_from([](double t) { return 2.0 * std::polar(1.0, t); },
                                        [](double) { return cplx(0, 0); }, 256);
    const double rs = reach_estimate(build_curve(scaled, 256));
    CHECK(rs == doctest::Approx(2.0 * ra).epsilon(0.02));

    // a figure-eight table has (near-)coincident samples far apart in arc
    const CurveSpec eight = table_from(
        [](double t) { return cplx(std::cos(t), 0.5 * std::sin(2.0 * t)); },
        [](double) { return cplx(0, 0); }, 256);
    const CurveK ke = build_curve(eight, 256);
    CHECK(reach_estimate(ke) <= ke.length() / 256.0);
}

TEST_CASE("analyze wiring") {
    const CurveK so2 = build_curve(CurveSpec::so2(), 256);
    const CurveReport r = analyze_curve(so2);
    CHECK(r.pass);
    CHECK(r.c_star == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.k_measured == doctest::Approx(0.0));
    CHECK(r.min_rankone_ratio == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.length == doctest::Approx(kTwoPi * std::sqrt(2.0)).epsilon(1e-3));

    const CurveReport bad = analyze_curve(build_curve(CurveSpec::kc(1.0), 256));
    CHECK_FALSE(bad.pass);
    CHECK(bad.failure == "NotElliptic");
}

TEST_CASE("curve csv round-trip and parse errors") {
    const CurveSpec spec = table_from([](double t) { return std::polar(1.0, t); },
                                      [](double t) { return 0.25 * std::polar(1.0, -t); }, 128);
    save_curve_csv("curve_roundtrip.csv", spec);
    const CurveSpec back = load_curve_csv("curve_roundtrip.csv");
    REQUIRE(back.ts.size() == spec.ts.size());
    for (std::size_t i = 0; i < back.ts.size(); ++i) {
        CHECK(back.ts[i] == spec.ts[i]);
        CHECK((back.ms[i] - spec.ms[i]).frob() == 0.0);
    }

    {
        std::ofstream out("curve_bad_header.csv");
        out << "x,y\n1,2\n";
    }
    CHECK_THROWS_AS(load_curve_csv("curve_bad_header.csv"), ValidationError);

    {
        std::ofstream out("curve_bad_row.csv");
        out << "t,m11,m12,m21,m22\n0,1,0,0\n";
    }
    CHECK_THROWS_AS(load_curve_csv("curve_bad_row.csv"), ValidationError);

    CHECK_THROWS_AS(CurveSpec::parse("builtin:nope"), ValidationError);
    CHECK(CurveSpec::parse("builtin:kc:c=0.7").c == doctest::Approx(0.7));
}

TEST_CASE("golden-section minimizer") {
    const double x = golden_min(0.0, 3.0, 1e-10, [](double t) { return (t - 1.3) * (t - 1.3); });
    CHECK(x == doctest::Approx(1.3).epsilon(1e-8));
}
