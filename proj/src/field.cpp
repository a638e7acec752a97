#include "ellrig/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ellrig {

namespace {

cplx eval_mcshane(const McShaneH& h, cplx z) {
    // componentwise midpoint of the two optimal k-Lipschitz extensions
    double lo_re = -std::numeric_limits<double>::infinity(), hi_re = -lo_re;
    double lo_im = lo_re, hi_im = -lo_re;
    for (std::size_t j = 0; j < h.points.size(); ++j) {
        const double d = h.k * std::abs(z - h.points[j]);
        hi_re = std::min(hi_re, h.values[j].real() + d);
        lo_re = std::max(lo_re, h.values[j].real() - d);
        hi_im = std::min(hi_im, h.values[j].imag() + d);
        lo_im = std::max(lo_im, h.values[j].imag() - d);
    }
    return {0.5 * (hi_re + lo_re), 0.5 * (hi_im + lo_im)};
}

}  // namespace

cplx GridH::eval(cplx z) const {
    const double h = 2.0 * extent / (n - 1);
    const double x = std::clamp(z.real(), -extent, extent);
    const double y = std::clamp(z.imag(), -extent, extent);
    const double fx = (x + extent) / h, fy = (y + extent) / h;
    const int i = std::min(static_cast<int>(fx), n - 2);
    const int j = std::min(static_cast<int>(fy), n - 2);
    const double ax = fx - i, ay = fy - j;
    auto at = [&](const std::vector<double>& v, int ii, int jj) {
        return v[static_cast<std::size_t>(jj) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(ii)];
    };
    auto bil = [&](const std::vector<double>& v) {
        return (1 - ax) * (1 - ay) * at(v, i, j) + ax * (1 - ay) * at(v, i + 1, j) +
               (1 - ax) * ay * at(v, i, j + 1) + ax * ay * at(v, i + 1, j + 1);
    };
    return {bil(re), bil(im)};
}

HExtension::HExtension(ConjLinearH h, double k_ext) : h_(h), k_ext_(k_ext) {
    if (!(k_ext_ < 1.0)) throw ExtensionFailed("extension constant k_ext >= 1");
}

HExtension::HExtension(McShaneH h, double k_ext, std::optional<GridH> grid, double eps_mol)
    : h_(std::move(h)), grid_(std::move(grid)), k_ext_(k_ext), eps_mol_(eps_mol) {
    if (!(k_ext_ < 1.0)) throw ExtensionFailed("extension constant k_ext >= 1");
}

cplx HExtension::operator()(cplx z) const {
    if (eps_mol_ > 0 && grid_) return grid_->eval(z);
    if (const auto* cl = std::get_if<ConjLinearH>(&h_)) return cl->alpha * std::conj(z);
    return eval_mcshane(std::get<McShaneH>(h_), z);
}

double HExtension::agreement(const std::vector<cplx>& zp, const std::vector<cplx>& zm) const {
    double worst = 0;
    for (std::size_t i = 0; i < zp.size(); ++i)
        worst = std::max(worst, std::abs((*this)(zp[i]) - zm[i]));
    return worst;
}

HExtension extend_H(const CurveK& k, ExtendMode mode, FieldSide side, double k_measured,
                    const ExtendOptions& opt) {
    // curve data for the requested side
    const std::size_t n = k.size();
    std::vector<cplx> zp(n), zm(n);
    for (std::size_t i = 0; i < n; ++i) {
        zp[i] = side == FieldSide::G1 ? k.zp(i) : g2_swap(k.zp(i));
        zm[i] = side == FieldSide::G1 ? k.zm(i) : g2_swap(k.zm(i));
    }

    if (mode == ExtendMode::closed_form) {
        cplx alpha;
        switch (k.family()) {
            case Family::so2:
                alpha = 0.0;
                break;
            case Family::kc:
                alpha = k.family_c();
                break;
            default:
                throw ValidationError(
                    "closed_form extension: family has no globally conjugate-linear H; "
                    "use mcshane_grid");
        }
        if (side == FieldSide::G2) alpha = -alpha;  // H2(z) = -i H(i z)
        HExtension h(ConjLinearH{alpha}, std::abs(alpha));
        const double agree = h.agreement(zp, zm);
        if (agree > 1e-8)
            throw ExtensionFailed("closed-form H disagrees with curve data by " +
                                  std::to_string(agree));
        return h;
    }

    // componentwise midpoint extension; certified constant inflates by sqrt(2)
    if (!(k_measured < 1.0 / std::sqrt(2.0)))
        throw ExtensionObstruction(
            "componentwise extension cannot certify k_ext < 1: k_measured = " +
            std::to_string(k_measured) + " >= 1/sqrt(2)");

    McShaneH mc{zp, zm, k_measured};

    // audit grid: node table of the extension over the requested box
    GridH grid;
    grid.extent = opt.grid_extent;
    grid.n = opt.grid_n;
    const auto nn = static_cast<std::size_t>(opt.grid_n);
    grid.re.resize(nn * nn);
    grid.im.resize(nn * nn);
    const double h = 2.0 * opt.grid_extent / (opt.grid_n - 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(nn); ++j)
        for (std::size_t i = 0; i < nn; ++i) {
            const cplx z(-opt.grid_extent + h * static_cast<double>(i),
                         -opt.grid_extent + h * static_cast<double>(j));
            const cplx v = eval_mcshane(mc, z);
            grid.re[static_cast<std::size_t>(j) * nn + i] = v.real();
            grid.im[static_cast<std::size_t>(j) * nn + i] = v.imag();
        }

    double eps_mol = opt.eps_mol;
    if (eps_mol > 0) {
        // discrete box mollification of the node table, radius eps_mol
        const int r = std::max(1, static_cast<int>(std::round(eps_mol / h)));
        auto smooth = [&](std::vector<double>& v) {
            std::vector<double> out(v.size());
            for (int j = 0; j < opt.grid_n; ++j)
                for (int i = 0; i < opt.grid_n; ++i) {
                    double s = 0;
                    int cnt = 0;
                    for (int dj = -r; dj <= r; ++dj)
                        for (int di = -r; di <= r; ++di) {
                            const int ii = std::clamp(i + di, 0, opt.grid_n - 1);
                            const int jj = std::clamp(j + dj, 0, opt.grid_n - 1);
                            s += v[static_cast<std::size_t>(jj) * nn + static_cast<std::size_t>(ii)];
                            ++cnt;
                        }
                    out[static_cast<std::size_t>(j) * nn + static_cast<std::size_t>(i)] = s / cnt;
                }
            v = std::move(out);
        };
        smooth(grid.re);
        smooth(grid.im);
    }

    // certify the achieved constant:
    //  - corner Jacobians of the bilinear table give the interpolant's exact
    //    Lipschitz constant (evaluation clamps to the box outside),
    //  - a random-pair audit cross-checks whichever rule actually evaluates.
    double k_jac = 0;
    for (int j = 0; j + 1 < opt.grid_n; ++j)
        for (int i = 0; i + 1 < opt.grid_n; ++i) {
            auto at = [&](const std::vector<double>& v, int ii, int jj) {
                return v[static_cast<std::size_t>(jj) * nn + static_cast<std::size_t>(ii)];
            };
            for (int cy = 0; cy <= 1; ++cy)
                for (int cx = 0; cx <= 1; ++cx) {
                    const double rx = (at(grid.re, i + 1, j + cy) - at(grid.re, i, j + cy)) / h;
                    const double ry = (at(grid.re, i + cx, j + 1) - at(grid.re, i + cx, j)) / h;
                    const double ix = (at(grid.im, i + 1, j + cy) - at(grid.im, i, j + cy)) / h;
                    const double iy = (at(grid.im, i + cx, j + 1) - at(grid.im, i + cx, j)) / h;
                    k_jac = std::max(k_jac, sigma1(Mat2{rx, ry, ix, iy}));
                }
        }

    const bool grid_eval = eps_mol > 0;
    par::Rng rng(opt.seed);
    double k_rand = 0;
    for (int p = 0; p < opt.audit_pairs; ++p) {
        const cplx z1(rng.uniform(-opt.grid_extent, opt.grid_extent),
                      rng.uniform(-opt.grid_extent, opt.grid_extent));
        const cplx z2(rng.uniform(-opt.grid_extent, opt.grid_extent),
                      rng.uniform(-opt.grid_extent, opt.grid_extent));
        if (std::abs(z1 - z2) < 1e-9) continue;
        const cplx v1 = grid_eval ? grid.eval(z1) : eval_mcshane(mc, z1);
        const cplx v2 = grid_eval ? grid.eval(z2) : eval_mcshane(mc, z2);
        k_rand = std::max(k_rand, std::abs(v1 - v2) / std::abs(z1 - z2));
    }

    // direct rule: sqrt(2) x componentwise constant holds analytically
    const double k_ext =
        grid_eval ? std::max(k_jac, k_rand) : std::max(std::sqrt(2.0) * k_measured, k_rand);
    if (!(k_ext < 1.0))
        throw ExtensionFailed("verified extension constant k_ext = " + std::to_string(k_ext) +
                              " >= 1");

    HExtension ext(std::move(mc), k_ext, std::move(grid), eps_mol);
    const double agree = ext.agreement(zp, zm);
    const double tol = (grid_eval ? 2e-2 : 1e-4) * k.diam();
    if (agree > tol)
        throw ExtensionFailed("extension disagrees with curve data by " + std::to_string(agree));
    return ext;
}

// ------------------------------------------------------------------ field --

FieldG::FieldG(FieldSide side, HExtension h, double fp_tol)
    : side_(side), h_(std::move(h)), fp_tol_(fp_tol) {}

cplx FieldG::invert_F(cplx w, FixedPointStats* stats) const {
    const double k = h_.k_ext();
    cplx z = std::conj(w);
    double err = std::abs(std::conj(z) + h_(z) - w);
    if (stats) *stats = {};
    if (err <= fp_tol_) return z;

    int budget = 40;
    if (k > 0) {
        const double predicted = std::log(fp_tol_ / err) / std::log(k);
        budget = static_cast<int>(10.0 * predicted) + 20;
    }
    double prev_step = 0;
    for (int it = 1; it <= budget; ++it) {
        const cplx z_next = std::conj(w) - std::conj(h_(z));
        const double step = std::abs(z_next - z);
        if (stats) {
            stats->iterations = it;
            if (prev_step > 0 && step > 0)
                stats->contraction = std::max(stats->contraction, step / prev_step);
        }
        prev_step = step;
        z = z_next;
        err = std::abs(std::conj(z) + h_(z) - w);
        if (err <= fp_tol_) return z;
    }
    throw ContractionViolation("invert_F did not converge within " + std::to_string(budget) +
                               " iterations (k_ext certificate wrong?)");
}

cplx FieldG::eval(cplx a, FixedPointStats* stats) const {
    const cplx z = invert_F(a, stats);
    return std::conj(z) - h_(z);
}

MonotoneCertificate certify_monotone(const FieldG& f, int n_pairs, double extent,
                                     std::uint64_t seed, par::Exec ex) {
    // pre-draw the pairs so the parallel reduction stays deterministic
    par::Rng rng(seed);
    std::vector<cplx> xs(static_cast<std::size_t>(n_pairs) * 2);
    for (auto& z : xs) z = {rng.uniform(-extent, extent), rng.uniform(-extent, extent)};

    std::vector<double> quot(static_cast<std::size_t>(n_pairs)),
        diff(static_cast<std::size_t>(n_pairs));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (ex == par::Exec::omp)
#endif
    for (std::ptrdiff_t p = 0; p < n_pairs; ++p) {
        const cplx x = xs[2 * static_cast<std::size_t>(p)];
        const cplx y = xs[2 * static_cast<std::size_t>(p) + 1];
        const double d2 = std::norm(x - y);
        if (d2 < 1e-18) {
            quot[static_cast<std::size_t>(p)] = std::numeric_limits<double>::infinity();
            diff[static_cast<std::size_t>(p)] = 0;
            continue;
        }
        const cplx gx = f.eval(x), gy = f.eval(y);
        const cplx dg = gx - gy, dx = x - y;
        quot[static_cast<std::size_t>(p)] =
            (dg.real() * dx.real() + dg.imag() * dx.imag()) / d2;
        diff[static_cast<std::size_t>(p)] = std::abs(dg) / std::sqrt(d2);
    }
    double lam = std::numeric_limits<double>::infinity(), Lam = 0;
    for (int p = 0; p < n_pairs; ++p) {
        lam = std::min(lam, quot[static_cast<std::size_t>(p)]);
        Lam = std::max(Lam, diff[static_cast<std::size_t>(p)]);
    }
    if (!(lam > 0)) throw MonotonicityFailed("monotonicity quotient <= 0 on a sampled pair", lam);
    return {lam, Lam};
}

double graph_residual(const FieldG& g1, const FieldG& g2, const CurveK& k, par::Exec ex) {
    const cplx I(0, 1);
    return par::max_over(
        k.size(),
        [&](std::size_t i) {
            const cplx a = k.m(i).row1();
            const cplx b = k.m(i).row2();
            const double r1 = std::abs(g1.eval(a) + I * b);
            const double r2 = std::abs(-I * g2.eval(b) - a);
            return std::max(r1, r2);
        },
        ex);
}

FieldPair build_fields(const CurveK& k, ExtendMode mode, const ExtendOptions& opt,
                       int certify_pairs, double fp_tol) {
    const double c_star = ellipticity_constant(k);
    const auto cd = conformal_data(k, c_star);

    FieldG g1(FieldSide::G1, extend_H(k, mode, FieldSide::G1, cd.k_measured, opt), fp_tol);
    FieldG g2(FieldSide::G2, extend_H(k, mode, FieldSide::G2, cd.k_measured, opt), fp_tol);

    const double extent = 2.0 * k.radius() + 1.0;
    const auto c1 = certify_monotone(g1, certify_pairs, extent, opt.seed + 11);
    const auto c2 = certify_monotone(g2, certify_pairs, extent, opt.seed + 12);
    g1.set_certificate(c1.lambda_hat, c1.Lambda_hat);
    g2.set_certificate(c2.lambda_hat, c2.Lambda_hat);

    FieldPair fp{std::move(g1), std::move(g2), cd.k_measured, 0.0};
    fp.graph_residual_max = graph_residual(fp.g1, fp.g2, k);
    return fp;
}

// ------------------------------------------------------------ grid cache ---

void save_field_grid(const std::string& path, const FieldG& f, double extent, int n) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write field grid '" + path + "'");
    char buf[128];
    std::snprintf(buf, sizeof buf, "fieldgrid v1\n%.17g\n%d\n", extent, n);
    out << buf;
    const double h = 2.0 * extent / (n - 1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const cplx a(-extent + h * i, -extent + h * j);
            const cplx g = f.eval(a);
            std::snprintf(buf, sizeof buf, "%.17g %.17g\n", g.real(), g.imag());
            out << buf;
        }
}

GridH load_field_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open field grid '" + path + "'");
    std::string header;
    std::getline(in, header);
    if (header != "fieldgrid v1")
        throw ValidationError("field grid '" + path + "': bad header '" + header + "'");
    GridH g;
    if (!(in >> g.extent >> g.n) || g.n < 2)
        throw ValidationError("field grid '" + path + "': bad extent / n");
    const std::size_t total = static_cast<std::size_t>(g.n) * static_cast<std::size_t>(g.n);
    g.re.resize(total);
    g.im.resize(total);
    for (std::size_t idx = 0; idx < total; ++idx)
        if (!(in >> g.re[idx] >> g.im[idx]))
            throw ValidationError("field grid '" + path + "': truncated data");
    return g;
}

}  // namespace ellrig
