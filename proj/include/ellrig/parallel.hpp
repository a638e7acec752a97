#pragma once

// Reduction kernels used by the scan-heavy operations. Every kernel has a
// serial reference implementation and an OpenMP one; results are identical
// by construction (min/max are order-free, sums use fixed 4096-element
// blocks so the partial-sum order never depends on the thread count).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ellrig::par {

enum class Exec { serial, omp };

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

/// Default policy for library operations; the CLI sets this from --threads.
inline Exec& default_exec() {
    static Exec e = Exec::omp;
    return e;
}

// ----------------------------------------------------------- reductions ----

struct MinLoc {
    double value = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
};

template <class F>
double min_over_serial(std::size_t n, F&& f) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::min(m, f(i));
    return m;
}

template <class F>
double min_over_omp(std::size_t n, F&& f) {
    double m = std::numeric_limits<double>::infinity();
#ifdef _OPENMP
#pragma omp parallel for reduction(min : m) schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        m = std::min(m, f(static_cast<std::size_t>(i)));
    return m;
}

template <class F>
double min_over(std::size_t n, F&& f, Exec ex) {
    return ex == Exec::serial ? min_over_serial(n, f) : min_over_omp(n, f);
}

template <class F>
double max_over_serial(std::size_t n, F&& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, f(i));
    return m;
}

template <class F>
double max_over_omp(std::size_t n, F&& f) {
    double m = -std::numeric_limits<double>::infinity();
#ifdef _OPENMP
#pragma omp parallel for reduction(max : m) schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        m = std::max(m, f(static_cast<std::size_t>(i)));
    return m;
}

template <class F>
double max_over(std::size_t n, F&& f, Exec ex) {
    return ex == Exec::serial ? max_over_serial(n, f) : max_over_omp(n, f);
}

/// Min with argmin; ties resolved to the lowest index in both variants.
template <class F>
MinLoc min_loc_over_serial(std::size_t n, F&& f) {
    MinLoc best;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = f(i);
        if (v < best.value) best = {v, i};
    }
    return best;
}

template <class F>
MinLoc min_loc_over_omp(std::size_t n, F&& f) {
    MinLoc best;
#ifdef _OPENMP
#pragma omp parallel
    {
        MinLoc local;
#pragma omp for schedule(static) nowait
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            const double v = f(static_cast<std::size_t>(i));
            if (v < local.value) local = {v, static_cast<std::size_t>(i)};
        }
#pragma omp critical(ellrig_minloc)
        {
            if (local.value < best.value ||
                (local.value == best.value && local.index < best.index))
                best = local;
        }
    }
#else
    best = min_loc_over_serial(n, f);
#endif
    return best;
}

template <class F>
MinLoc min_loc_over(std::size_t n, F&& f, Exec ex) {
    return ex == Exec::serial ? min_loc_over_serial(n, f) : min_loc_over_omp(n, f);
}

// ------------------------------------------------------- deterministic sum -

inline constexpr std::size_t kSumBlock = 4096;

/// Sum of f(0..n-1) accumulated in fixed 4096-wide blocks, blocks added in
/// index order. The result is bit-identical for any thread count.
template <class F>
double blocked_sum_serial(std::size_t n, F&& f) {
    const std::size_t nb = (n + kSumBlock - 1) / kSumBlock;
    std::vector<double> partial(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        double s = 0;
        const std::size_t hi = std::min(n, (b + 1) * kSumBlock);
        for (std::size_t i = b * kSumBlock; i < hi; ++i) s += f(i);
        partial[b] = s;
    }
    double total = 0;
    for (double v : partial) total += v;
    return total;
}

template <class F>
double blocked_sum_omp(std::size_t n, F&& f) {
    const std::size_t nb = (n + kSumBlock - 1) / kSumBlock;
    std::vector<double> partial(nb, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        double s = 0;
        const std::size_t lo = static_cast<std::size_t>(b) * kSumBlock;
        const std::size_t hi = std::min(n, lo + kSumBlock);
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0;
    for (double v : partial) total += v;
    return total;
}

template <class F>
double blocked_sum(std::size_t n, F&& f, Exec ex) {
    return ex == Exec::serial ? blocked_sum_serial(n, f) : blocked_sum_omp(n, f);
}

// -------------------------------------------------------------- pair scans -

/// Upper-triangle pair reduction: min over f(i, j) for 0 <= i < j < n.
template <class F>
double pair_min_serial(std::size_t n, F&& f) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m = std::min(m, f(i, j));
    return m;
}

template <class F>
double pair_min_omp(std::size_t n, F&& f) {
    double m = std::numeric_limits<double>::infinity();
#ifdef _OPENMP
#pragma omp parallel for reduction(min : m) schedule(dynamic, 16)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n) - 1; ++i) {
        double local = std::numeric_limits<double>::infinity();
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j)
            local = std::min(local, f(static_cast<std::size_t>(i), j));
        m = std::min(m, local);
    }
    return m;
}

template <class F>
double pair_min(std::size_t n, F&& f, Exec ex) {
    return ex == Exec::serial ? pair_min_serial(n, f) : pair_min_omp(n, f);
}

template <class F>
double pair_max_serial(std::size_t n, F&& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, f(i, j));
    return m;
}

template <class F>
double pair_max_omp(std::size_t n, F&& f) {
    double m = -std::numeric_limits<double>::infinity();
#ifdef _OPENMP
#pragma omp parallel for reduction(max : m) schedule(dynamic, 16)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n) - 1; ++i) {
        double local = -std::numeric_limits<double>::infinity();
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j)
            local = std::max(local, f(static_cast<std::size_t>(i), j));
        m = std::max(m, local);
    }
    return m;
}

template <class F>
double pair_max(std::size_t n, F&& f, Exec ex) {
    return ex == Exec::serial ? pair_max_serial(n, f) : pair_max_omp(n, f);
}

// ------------------------------------------------------------------- rng ---

/// xorshift-free portable uniform doubles from a splitmix-seeded mt19937_64
/// stream; bit layout fixed so seeded runs reproduce across platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // splitmix64; stable and fast, no distribution-object variability
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

  private:
    std::uint64_t state_;
};

}  // namespace ellrig::par
