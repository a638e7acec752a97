#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ellrig/parallel.hpp"

using namespace ellrig;

// Serial implementations are the reference; the OpenMP kernels must agree
// bitwise (order-free reductions, fixed-block sums).

TEST_CASE("min/max reductions agree across execution policies") {
    std::vector<double> v(10000);
    par::Rng rng(42);
    for (auto& x : v) x = rng.uniform(-1e6, 1e6);

    auto f = [&](std::size_t i) { return std::sin(v[i]) * v[i]; };
    CHECK(par::min_over_serial(v.size(), f) == par::min_over_omp(v.size(), f));
    CHECK(par::max_over_serial(v.size(), f) == par::max_over_omp(v.size(), f));

    const auto s = par::min_loc_over_serial(v.size(), f);
    const auto p = par::min_loc_over_omp(v.size(), f);
    CHECK(s.value == p.value);
    CHECK(s.index == p.index);
}

TEST_CASE("blocked sums are bit-identical and accurate") {
    std::vector<double> v(100001);
    par::Rng rng(43);
    for (auto& x : v) x = rng.uniform(-1, 1);

    auto f = [&](std::size_t i) { return v[i]; };
    const double a = par::blocked_sum_serial(v.size(), f);
    const double b = par::blocked_sum_omp(v.size(), f);
    CHECK(a == b);

    long double exact = 0;
    for (double x : v) exact += static_cast<long double>(x);
    CHECK(std::abs(a - static_cast<double>(exact)) < 1e-9);
}

TEST_CASE("pair scans agree across execution policies") {
    std::vector<double> v(500);
    par::Rng rng(44);
    for (auto& x : v) x = rng.uniform(0, 10);

    auto f = [&](std::size_t i, std::size_t j) { return std::abs(v[i] - v[j]) + 1.0 / (1.0 + static_cast<double>(i + j)); };
    CHECK(par::pair_min_serial(v.size(), f) == par::pair_min_omp(v.size(), f));
    CHECK(par::pair_max_serial(v.size(), f) == par::pair_max_omp(v.size(), f));
}

TEST_CASE("seeded rng stream is stable") {
    par::Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    par::Rng c(8);
    bool same = true;
    par::Rng a2(7);
    for (int i = 0; i < 10; ++i) same = same && (a2.next_u64() == c.next_u64());
    CHECK_FALSE(same);

    par::Rng d(9);
    for (int i = 0; i < 1000; ++i) {
        const double u = d.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}
