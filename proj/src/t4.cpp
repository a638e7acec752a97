#include "ellrig/t4.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ellrig/curve.hpp"  // golden_min

namespace ellrig {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double t) {
    double w = std::fmod(t, kTwoPi);
    if (w < 0) w += kTwoPi;
    return w;
}

double dist_to_lattice(double x, double step) {
    return std::abs(x - step * std::round(x / step));
}

double bump1(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r2));
}

double bump1_prime(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    const double d = 1.0 - r2;
    return bump1(r) * (-2.0 * r) / (d * d);
}

struct Neumaier {
    double s = 0, c = 0;
    void add(double v) {
        const double t = s + v;
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    double get() const { return s + c; }
};

Mat3 diagish(double m11, double m22, double m31_m11_pair) {
    // helper for the column-one family: entries (1,1) and (3,1) equal
    Mat3 m;
    m(0, 0) = m11;
    m(1, 1) = m22;
    m(2, 0) = m31_m11_pair;
    return m;
}

}  // namespace

double T4Config::theta_hat(int k) const { return theta_a + (k - 1) * kPi / 2.0; }

T4Config build_t4(double a) {
    if (!(a > 0)) throw ValidationError("build_t4: a must be positive");
    T4Config cfg;
    cfg.a = a;
    cfg.mu = (2.0 + a) / a;
    cfg.theta_a = std::atan(1.0 / (1.0 + a));
    cfg.r_a = std::sqrt(1.0 + (1.0 + a) * (1.0 + a));

    if (dist_to_lattice(cfg.theta_a, kPi / 48.0) < 1e-9)
        throw ParameterExcluded("build_t4: theta_a lies on the (pi/48) lattice for a = " +
                                std::to_string(a));

    cfg.T[0] = diagish(1.0 + a, 1.0, 1.0 + a);
    cfg.T[1] = diagish(-1.0, 1.0 + a, -1.0);
    cfg.T[2] = -1.0 * cfg.T[0];
    cfg.T[3] = -1.0 * cfg.T[1];
    cfg.C[0] = diagish(1.0, 1.0, 1.0);
    cfg.C[1] = diagish(-1.0, 1.0, -1.0);
    cfg.C[2] = -1.0 * cfg.C[0];
    cfg.C[3] = -1.0 * cfg.C[1];

    for (int k = 0; k < 4; ++k) {
        const Mat3 d = cfg.T[static_cast<std::size_t>(k)] - cfg.C[static_cast<std::size_t>(k)];
        if (sigma2(d) > 1e-12)
            throw ValidationError("build_t4: chain difference not rank-one");
        const Mat3 rhs = cfg.T[static_cast<std::size_t>(k)] - cfg.mu * d;
        const Mat3 next = cfg.C[static_cast<std::size_t>((k + 1) % 4)];
        for (int e = 0; e < 9; ++e)
            if (std::abs(rhs.m[static_cast<std::size_t>(e)] - next.m[static_cast<std::size_t>(e)]) > 1e-12)
                throw ValidationError("build_t4: chain relation violated");
    }
    return cfg;
}

// -------------------------------------------------------------------- rho --

double RhoFunction::operator()(double theta) const {
    const double u = wrap_2pi(theta);
    const double step = kPi / 24.0;
    const int j = static_cast<int>(std::round(u / step));
    if (j >= 1 && j <= 47) {
        const double d = u - j * step;
        if (std::abs(d) < delta_) return theta + t_[static_cast<std::size_t>(j - 1)] * bump1(d / delta_);
    }
    return theta;
}

double RhoFunction::deriv(double theta) const {
    const double u = wrap_2pi(theta);
    const double step = kPi / 24.0;
    const int j = static_cast<int>(std::round(u / step));
    if (j >= 1 && j <= 47) {
        const double d = u - j * step;
        if (std::abs(d) < delta_)
            return 1.0 + t_[static_cast<std::size_t>(j - 1)] * bump1_prime(d / delta_) / delta_;
    }
    return 1.0;
}

RhoFunction build_rho(const T4Config& cfg, double eps, std::uint64_t seed) {
    if (!(eps > 0)) throw ValidationError("build_rho: eps must be positive");
    RhoFunction rho;
    rho.eps_ = eps;
    rho.delta_ = 0.5 * dist_to_lattice(cfg.theta_a, kPi / 24.0);
    if (!(rho.delta_ > 0)) throw ParameterExcluded("build_rho: theta_a on the (pi/24) lattice");

    // measured slope bound of the bump profile, slightly inflated so the
    // monotonicity budget eta = 0.5 / max|phi'| is safe
    double max_slope = 0;
    for (int i = 0; i <= 20000; ++i) {
        const double s = -1.0 + 2.0 * i / 20000.0;
        max_slope = std::max(max_slope, std::abs(bump1_prime(s)));
    }
    rho.max_phi_prime_ = max_slope * (1.0 + 1e-3) / rho.delta_;
    rho.eta_ = std::min({eps, rho.delta_ / 2.0, 0.5 / rho.max_phi_prime_});

    // greedy slot-by-slot choice maximizing the lattice margin
    const double step = kPi / 24.0;
    const double span = rho.eta_ * (1.0 - 1e-6);
    par::Rng rng(seed);
    std::array<double, 48> chosen{};  // chosen[0] = 0 fixed
    for (int j = 1; j <= 47; ++j) {
        const double jitter = rng.uniform();
        double best_t = 0, best_score = -1;
        for (int m = 0; m < 1001; ++m) {
            const double t = span * (2.0 * (m + jitter) / 1001.0 - 1.0);
            double score = std::numeric_limits<double>::infinity();
            for (int l = 0; l < j; ++l)
                score = std::min(score, dist_to_lattice(t - chosen[static_cast<std::size_t>(l)] +
                                                            (j - l) * step,
                                                        kPi / 12.0));
            if (score > best_score) {
                best_score = score;
                best_t = t;
            }
        }
        chosen[static_cast<std::size_t>(j)] = best_t;
        rho.t_[static_cast<std::size_t>(j - 1)] = best_t;
    }

    double margin = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 47; ++j)
        for (int l = 0; l < j; ++l)
            margin = std::min(margin, dist_to_lattice(chosen[static_cast<std::size_t>(j)] -
                                                          chosen[static_cast<std::size_t>(l)] +
                                                          (j - l) * step,
                                                      kPi / 12.0));
    rho.margin_ = margin;
    if (!(margin >= 1e-6))
        throw RhoConstructionFailed("build_rho: achievable margin " + std::to_string(margin) +
                                    " below 1e-6; retry with another seed");

    const RhoAudit audit = audit_rho(cfg, rho);
    if (!audit.pass) throw RhoConstructionFailed("build_rho: post-construction audit failed");
    return rho;
}

RhoAudit audit_rho(const T4Config& cfg, const RhoFunction& rho, int grid) {
    RhoAudit a{};
    a.min_rho_prime = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
        const double th = kTwoPi * i / grid;
        a.min_rho_prime = std::min(a.min_rho_prime, rho.deriv(th));
        a.sup_dev = std::max(a.sup_dev, std::abs(rho(th) - th));
        a.periodicity_defect =
            std::max(a.periodicity_defect, std::abs(rho(th + kTwoPi) - rho(th) - kTwoPi));
    }
    for (int k = 1; k <= 4; ++k) {
        const double th = cfg.theta_hat(k);
        a.anchor_defect = std::max(a.anchor_defect, std::abs(rho(th) - th));
    }
    a.margin = rho.margin();
    a.pass = a.min_rho_prime >= 0.5 && a.sup_dev < rho.eps() && a.periodicity_defect <= 1e-12 &&
             a.anchor_defect <= 1e-12 && a.margin > 0;
    return a;
}

// ------------------------------------------------------------------ curve --

Mat3 gamma(const T4Config& cfg, const RhoFunction& rho, double theta) {
    const double ta = cfg.theta_a, r = cfg.r_a;
    const double rt = rho(theta);
    Mat3 g;
    g(0, 0) = r * std::cos(theta);
    g(0, 1) = -std::sin(8 * theta - 8 * ta);
    g(0, 2) = std::sin(6 * rt - 6 * ta);
    g(1, 0) = std::sin(6 * theta - 6 * ta);
    g(1, 1) = r * std::sin(theta);
    g(1, 2) = std::sin(8 * rt - 8 * ta);
    g(2, 0) = r * std::cos(theta);
    g(2, 1) = std::sin(8 * theta - 8 * ta);
    g(2, 2) = std::sin(6 * rt - 6 * ta);
    return g;
}

Mat3 gamma_prime(const T4Config& cfg, const RhoFunction& rho, double theta) {
    const double ta = cfg.theta_a, r = cfg.r_a;
    const double rt = rho(theta);
    const double rp = rho.deriv(theta);
    Mat3 g;
    g(0, 0) = -r * std::sin(theta);
    g(0, 1) = -8 * std::cos(8 * theta - 8 * ta);
    g(0, 2) = 6 * rp * std::cos(6 * rt - 6 * ta);
    g(1, 0) = 6 * std::cos(6 * theta - 6 * ta);
    g(1, 1) = r * std::cos(theta);
    g(1, 2) = 8 * rp * std::cos(8 * rt - 8 * ta);
    g(2, 0) = -r * std::sin(theta);
    g(2, 1) = 8 * std::cos(8 * theta - 8 * ta);
    g(2, 2) = 6 * rp * std::cos(6 * rt - 6 * ta);
    return g;
}

EllipticityScan3 check_ellipticity_3x3(const T4Config& cfg, const RhoFunction& rho, int n_grid,
                                       par::Exec ex) {
    if (dist_to_lattice(cfg.theta_a, kPi / 48.0) < 1e-9)
        throw ParameterExcluded("check_ellipticity_3x3: theta_a on the (pi/48) lattice");

    const auto nn = static_cast<std::size_t>(n_grid);
    const auto ml = par::min_loc_over(
        nn,
        [&](std::size_t i) {
            return sigma2(gamma_prime(cfg, rho, kTwoPi * static_cast<double>(i) / n_grid));
        },
        ex);
    const double dth = kTwoPi / n_grid;
    const double th0 = kTwoPi * static_cast<double>(ml.index) / n_grid;
    auto f = [&](double th) { return sigma2(gamma_prime(cfg, rho, th)); };
    const double th_min = golden_min(th0 - dth, th0 + dth, 1e-12, f);
    const double refined = std::min(ml.value, f(th_min));

    EllipticityScan3 out{refined, wrap_2pi(th_min), 0.0};
    out.minor_identity_err = par::max_over(
        nn,
        [&](std::size_t i) {
            const double th = kTwoPi * static_cast<double>(i) / n_grid;
            const Mat3 gp = gamma_prime(cfg, rho, th);
            const double lhs = minor3(gp, 1, 2, 1, 2) + minor3(gp, 2, 3, 1, 2);
            const double rhs =
                96.0 * std::cos(8 * th - 8 * cfg.theta_a) * std::cos(6 * th - 6 * cfg.theta_a);
            return std::abs(lhs - rhs);
        },
        ex);

    if (refined <= 1e-8)
        throw EllipticityFailed("sigma2(Gamma') <= 1e-8 at theta = " + std::to_string(th_min),
                                th_min);
    return out;
}

RankOneScan3 scan_rank_one_3x3(const T4Config& cfg, const RhoFunction& rho, int n_grid,
                               par::Exec ex) {
    const auto nn = static_cast<std::size_t>(n_grid);
    const double dth = kTwoPi / n_grid;
    std::vector<Mat3> gam(nn);
    std::vector<double> dratio(nn);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (ex == par::Exec::omp)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(nn); ++i) {
        const double th = dth * static_cast<double>(i);
        gam[static_cast<std::size_t>(i)] = gamma(cfg, rho, th);
        const Mat3 gp = gamma_prime(cfg, rho, th);
        dratio[static_cast<std::size_t>(i)] = sigma2(gp) / gp.frob();
    }

    auto pair_ratio_grid = [&](std::size_t i, std::size_t j) {
        const std::size_t d = j - i;
        const std::size_t cyc = std::min(d, nn - d);
        if (cyc < 4) {
            // near-diagonal: the difference quotient degenerates to Gamma'
            const std::size_t mid = (d == cyc) ? i + cyc / 2 : (j + (nn - d) / 2) % nn;
            return dratio[mid];
        }
        const Mat3 diff = gam[i] - gam[j];
        return sigma2(diff) / diff.frob();
    };

    struct RowBest {
        double ratio;
        std::size_t j;
    };
    std::vector<RowBest> row(nn, {std::numeric_limits<double>::infinity(), 0});
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) if (ex == par::Exec::omp)
#endif
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(nn) - 1; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        RowBest best{std::numeric_limits<double>::infinity(), i + 1};
        for (std::size_t j = i + 1; j < nn; ++j) {
            const double r = pair_ratio_grid(i, j);
            if (r < best.ratio) best = {r, j};
        }
        row[i] = best;
    }

    std::vector<std::size_t> order(nn - 1);
    for (std::size_t i = 0; i + 1 < nn; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&row](std::size_t a, std::size_t b) { return row[a].ratio < row[b].ratio; });

    auto ratio_continuous = [&](double th1, double th2) {
        const double cyc = std::min(wrap_2pi(th1 - th2), wrap_2pi(th2 - th1));
        if (cyc < 4 * dth) {
            double mid = 0.5 * (th1 + th2);
            if (std::abs(th1 - th2) > kPi) mid = wrap_2pi(mid + kPi);
            const Mat3 gp = gamma_prime(cfg, rho, mid);
            return sigma2(gp) / gp.frob();
        }
        const Mat3 diff = gamma(cfg, rho, th1) - gamma(cfg, rho, th2);
        return sigma2(diff) / diff.frob();
    };

    RankOneScan3 out;
    out.min_ratio = std::numeric_limits<double>::infinity();
    const std::size_t n_refine = std::min<std::size_t>(10, order.size());
    for (std::size_t r = 0; r < n_refine; ++r) {
        const std::size_t i = order[r];
        double th1 = dth * static_cast<double>(i);
        double th2 = dth * static_cast<double>(row[i].j);
        for (int round = 0; round < 4; ++round) {
            th1 = golden_min(th1 - 2 * dth, th1 + 2 * dth, 1e-10,
                             [&](double t) { return ratio_continuous(t, th2); });
            th2 = golden_min(th2 - 2 * dth, th2 + 2 * dth, 1e-10,
                             [&](double t) { return ratio_continuous(th1, t); });
        }
        const double val = ratio_continuous(th1, th2);
        if (val < out.min_ratio) {
            out.min_ratio = val;
            out.theta1 = wrap_2pi(th1);
            out.theta2 = wrap_2pi(th2);
        }
    }

    const std::size_t n_diag = std::min<std::size_t>(100, order.size());
    for (std::size_t r = 0; r < n_diag; ++r) {
        const std::size_t i = order[r];
        const double th1 = dth * static_cast<double>(i);
        const double th2 = dth * static_cast<double>(row[i].j);
        RankOnePairDiag diag{};
        diag.ratio = row[i].ratio;
        diag.theta1 = th1;
        diag.theta2 = th2;
        diag.dist_sum_pi = dist_to_lattice(th1 + th2, kPi);
        diag.dist_diff_lattice = std::min(dist_to_lattice(th1 - th2, kPi / 3.0),
                                          dist_to_lattice(th1 - th2, kPi / 4.0));
        out.smallest.push_back(diag);
    }

    if (out.min_ratio <= 1e-8)
        throw RankOneFound("rank-one connection candidate on the 3x3 curve", out.theta1,
                           out.theta2, out.min_ratio);
    return out;
}

// -------------------------------------------------------------- laminates --

LaminateMeasure staircase_laminate(const T4Config& cfg, int n_splits) {
    if (n_splits < 0) throw ValidationError("staircase_laminate: negative split count");
    LaminateMeasure lam;
    const double inv_mu = 1.0 / cfg.mu;
    double p_prev = 1.0;  // (1/mu)^{n-1}
    double p = 1.0;       // (1/mu)^n, iterated product
    for (int n = 1; n <= n_splits; ++n) {
        p_prev = p;
        p *= inv_mu;
        const int k = (n - 1) % 4;
        lam.atoms.push_back({cfg.T[static_cast<std::size_t>(k)], p_prev - p, k + 1, true});
    }
    const int kc = n_splits % 4;
    lam.atoms.push_back({cfg.C[static_cast<std::size_t>(kc)], p, kc + 1, false});
    lam.residual_c_mass = p;
    return lam;
}

double laminate_weight_sum(const LaminateMeasure& lam) {
    Neumaier sum;
    for (const auto& atom : lam.atoms) sum.add(atom.weight);
    return sum.get();
}

Mat3 laminate_barycenter(const LaminateMeasure& lam) {
    Mat3 out;
    for (int e = 0; e < 9; ++e) {
        Neumaier sum;
        for (const auto& atom : lam.atoms)
            sum.add(atom.weight * atom.matrix.m[static_cast<std::size_t>(e)]);
        out.m[static_cast<std::size_t>(e)] = sum.get();
    }
    return out;
}

// ------------------------------------------------------ cross-section map --

Mat3 CrossSectionMap::grad(int ci, int cj) const {
    const double hh = h();
    Mat3 g;
    for (int comp = 0; comp < 3; ++comp) {
        const double s00 = u[idx(ci, cj)][static_cast<std::size_t>(comp)];
        const double s10 = u[idx(ci + 1, cj)][static_cast<std::size_t>(comp)];
        const double s01 = u[idx(ci, cj + 1)][static_cast<std::size_t>(comp)];
        const double s11 = u[idx(ci + 1, cj + 1)][static_cast<std::size_t>(comp)];
        g(comp, 0) = (s10 + s11 - s00 - s01) / (2 * hh);
        g(comp, 1) = (s01 + s11 - s00 - s10) / (2 * hh);
    }
    return g;
}

CrossSectionMap laminate_map(const Mat3& a, const Mat3& b, double weight, int stripes, int n) {
    if (!(weight > 0 && weight < 1)) throw std::invalid_argument("laminate_map: weight in (0,1)");
    if (stripes < 4) throw std::invalid_argument("laminate_map: need stripes >= 4");
    if (n < stripes + 1) throw std::invalid_argument("laminate_map: grid too coarse for stripes");

    const Mat3 d = b - a;
    const double scale = std::max(1.0, d.frob());
    if (sigma2(d) > 1e-10 * scale)
        throw std::invalid_argument("laminate_map: B - A is not rank-one");
    for (int i = 0; i < 3; ++i)
        if (std::abs(a(i, 2)) > 1e-12 * scale || std::abs(b(i, 2)) > 1e-12 * scale)
            throw std::invalid_argument("laminate_map: nonzero third column");

    // direction n from the rank-one factorization D = beta (x) dir
    Mat3 gram;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += d(k, i) * d(k, j);
            gram(i, j) = s;
        }
    std::array<double, 3> dir{};
    double best_col = -1;
    for (int c = 0; c < 3; ++c) {
        const double norm2 = gram(0, c) * gram(0, c) + gram(1, c) * gram(1, c) +
                             gram(2, c) * gram(2, c);
        if (norm2 > best_col) {
            best_col = norm2;
            dir = {gram(0, c), gram(1, c), gram(2, c)};
        }
    }
    double dn = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    for (double& v : dir) v /= dn;
    std::array<double, 3> beta{};
    for (int i = 0; i < 3; ++i)
        beta[static_cast<std::size_t>(i)] = d(i, 0) * dir[0] + d(i, 1) * dir[1] + d(i, 2) * dir[2];

    const bool axis0 = std::abs(dir[1]) <= 1e-12;
    const bool axis1 = std::abs(dir[0]) <= 1e-12;

    // projection span over the unit square
    const double smin = std::min(0.0, dir[0]) + std::min(0.0, dir[1]);
    const double smax = std::max(0.0, dir[0]) + std::max(0.0, dir[1]);
    const double p = (smax - smin) / stripes;
    const double w = weight;

    // zero-mean sawtooth: slope -(1-w) on the A-part, +w on the B-part
    auto psi = [&](double s) {
        double local = std::fmod(s - smin, p);
        if (local < 0) local += p;
        return local < w * p ? -(1 - w) * local : -(1 - w) * w * p + w * (local - w * p);
    };

    const double margin = 1.0 / stripes;
    auto ramp = [&](double x) {
        if (x < margin) return x / margin;
        if (x > 1.0 - margin) return (1.0 - x) / margin;
        return 1.0;
    };

    Mat3 fbar;
    for (int e = 0; e < 9; ++e)
        fbar.m[static_cast<std::size_t>(e)] =
            w * a.m[static_cast<std::size_t>(e)] + (1 - w) * b.m[static_cast<std::size_t>(e)];

    CrossSectionMap map;
    map.n = n;
    map.u.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    const double h = 1.0 / (n - 1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = h * i, y = h * j;
            const double s = dir[0] * x + dir[1] * y;
            double zeta;
            if (axis0)
                zeta = ramp(y);
            else if (axis1)
                zeta = ramp(x);
            else
                zeta = ramp(x) * ramp(y);
            const double ps = zeta * psi(s);
            for (int comp = 0; comp < 3; ++comp)
                map.u[map.idx(i, j)][static_cast<std::size_t>(comp)] =
                    fbar(comp, 0) * x + fbar(comp, 1) * y + ps * beta[static_cast<std::size_t>(comp)];
        }
    return map;
}

// ------------------------------------------------------------------- demo --

namespace {

struct ChainDirs {
    std::array<std::array<double, 3>, 4> beta;
    std::array<int, 4> axis;
};

ChainDirs chain_dirs(const T4Config& cfg) {
    ChainDirs cd;
    cd.beta[0] = {cfg.a, 0, cfg.a};
    cd.beta[1] = {0, cfg.a, 0};
    cd.beta[2] = {-cfg.a, 0, -cfg.a};
    cd.beta[3] = {0, -cfg.a, 0};
    cd.axis = {0, 1, 0, 1};
    return cd;
}

struct NestedEval {
    Mat3 grad;
    std::array<double, 3> value;
    int atom;  // 0..3 = T_{k+1}, 4..7 = C_{k+1}, -1 = band
};

NestedEval nested_eval(const T4Config& cfg, int depth, int stripes, double x1, double x2) {
    const ChainDirs cd = chain_dirs(cfg);
    NestedEval out;
    out.grad = cfg.C[0];
    out.value = {cfg.C[0](0, 0) * x1 + cfg.C[0](0, 1) * x2,
                 cfg.C[0](1, 0) * x1 + cfg.C[0](1, 1) * x2,
                 cfg.C[0](2, 0) * x1 + cfg.C[0](2, 1) * x2};
    out.atom = 4;  // C1 when depth == 0

    const double x[2] = {x1, x2};
    double lo[2] = {0.0, 0.0}, hi[2] = {1.0, 1.0};
    const double w = 1.0 - 1.0 / cfg.mu;

    for (int m = 0; m < depth; ++m) {
        const int kk = m % 4;
        const int axis = cd.axis[static_cast<std::size_t>(kk)];
        const int perp = 1 - axis;
        const double ea = hi[axis] - lo[axis];
        const double ep = hi[perp] - lo[perp];
        const double pmin = std::min(ea, ep);
        const double ell = pmin / stripes;
        const int nper = std::max(1, static_cast<int>(std::ceil(ea / (pmin / stripes))));
        const double p = ea / nper;
        const double wp = w * p;

        const double xi = x[axis] - lo[axis];
        const int idx = std::min(static_cast<int>(xi / p), nper - 1);
        const double s = xi - idx * p;
        const double eta = x[perp] - lo[perp];

        double zeta = 1.0, zeta_p = 0.0;
        if (eta < ell) {
            zeta = eta / ell;
            zeta_p = 1.0 / ell;
        } else if (eta > ep - ell) {
            zeta = (ep - eta) / ell;
            zeta_p = -1.0 / ell;
        }

        const bool in_t = s < wp;
        const double g = in_t ? 1.0 : (1.0 - cfg.mu);
        const double sval = in_t ? s : wp + (1.0 - cfg.mu) * (s - wp);
        const auto& beta = cd.beta[static_cast<std::size_t>(kk)];
        for (int i = 0; i < 3; ++i) {
            out.grad(i, axis) += zeta * g * beta[static_cast<std::size_t>(i)];
            out.grad(i, perp) += zeta_p * sval * beta[static_cast<std::size_t>(i)];
            out.value[static_cast<std::size_t>(i)] += zeta * sval * beta[static_cast<std::size_t>(i)];
        }

        if (zeta_p != 0.0) {
            out.atom = -1;
            return out;
        }
        if (in_t) {
            out.atom = kk;
            return out;
        }
        if (m == depth - 1) {
            out.atom = 4 + (kk + 1) % 4;
            return out;
        }
        const double lo_axis_old = lo[axis];
        lo[axis] = lo_axis_old + idx * p + wp;
        hi[axis] = lo_axis_old + (idx + 1) * p;
        lo[perp] += ell;
        hi[perp] -= ell;
    }
    return out;
}

}  // namespace

Mat3 nested_laminate_gradient(const T4Config& cfg, int depth, int stripes, double x1, double x2,
                              int* atom_out) {
    const NestedEval e = nested_eval(cfg, depth, stripes, x1, x2);
    if (atom_out) *atom_out = e.atom;
    return e.grad;
}

std::array<double, 3> nested_laminate_value(const T4Config& cfg, int depth, int stripes,
                                            double x1, double x2) {
    return nested_eval(cfg, depth, stripes, x1, x2).value;
}

std::vector<DemoRow> non_compactness_demo(const T4Config& cfg, const RhoFunction& rho,
                                          int max_depth, const DemoOptions& opt) {
    // curve sample set: uniform angles plus the four anchor matrices
    std::vector<Mat3> curve;
    curve.reserve(static_cast<std::size_t>(opt.curve_samples) + 4);
    for (int i = 0; i < opt.curve_samples; ++i)
        curve.push_back(gamma(cfg, rho, kTwoPi * i / opt.curve_samples));
    for (int k = 1; k <= 4; ++k) curve.push_back(gamma(cfg, rho, cfg.theta_hat(k)));

    std::vector<DemoRow> rows;
    const int s = opt.samples_per_side;
    const std::size_t total = static_cast<std::size_t>(s) * static_cast<std::size_t>(s);

    for (int depth = 1; depth <= max_depth; ++depth) {
        // stratified sample points, one jittered point per stratum
        par::Rng rng(opt.seed + static_cast<std::uint64_t>(depth) * 1000003ull);
        std::vector<Mat3> grads(total);
        std::vector<double> xs(total), ys(total);
        for (std::size_t idx = 0; idx < total; ++idx) {
            const auto i = static_cast<double>(idx % static_cast<std::size_t>(s));
            const auto j = static_cast<double>(idx / static_cast<std::size_t>(s));
            xs[idx] = (i + rng.uniform()) / s;
            ys[idx] = (j + rng.uniform()) / s;
        }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(total); ++idx)
            grads[static_cast<std::size_t>(idx)] =
                nested_laminate_gradient(cfg, depth, opt.stripes, xs[static_cast<std::size_t>(idx)],
                                         ys[static_cast<std::size_t>(idx)]);

        const double eps_d =
            par::blocked_sum(
                total,
                [&](std::size_t idx) {
                    double best = std::numeric_limits<double>::infinity();
                    for (const Mat3& m : curve) best = std::min(best, (grads[idx] - m).frob_sq());
                    return best;
                },
                par::default_exec()) /
            static_cast<double>(total);

        // moments make the inf over curve samples O(1) per sample matrix
        const double i0 = par::blocked_sum(
                              total, [&](std::size_t idx) { return grads[idx].frob_sq(); },
                              par::default_exec()) /
                          static_cast<double>(total);
        Mat3 mean;
        for (int e = 0; e < 9; ++e)
            mean.m[static_cast<std::size_t>(e)] =
                par::blocked_sum(
                    total,
                    [&](std::size_t idx) { return grads[idx].m[static_cast<std::size_t>(e)]; },
                    par::default_exec()) /
                static_cast<double>(total);
        double m_d = std::numeric_limits<double>::infinity();
        for (const Mat3& m : curve) {
            double dotmm = 0;
            for (int e = 0; e < 9; ++e)
                dotmm += mean.m[static_cast<std::size_t>(e)] * m.m[static_cast<std::size_t>(e)];
            m_d = std::min(m_d, i0 - 2.0 * dotmm + m.frob_sq());
        }

        double c_mass = 1.0;
        for (int d = 0; d < depth; ++d) c_mass *= 1.0 / cfg.mu;
        rows.push_back({depth, eps_d, m_d, c_mass});
    }
    return rows;
}

}  // namespace ellrig
