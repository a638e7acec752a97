#include "ellrig/pde.hpp"

#include <cmath>

#include "ellrig/parallel.hpp"

namespace ellrig {

TriGrad triangle_gradients(const Grid2D& g, const std::vector<double>& u, int ci, int cj) {
    const double h = g.h();
    const double u00 = u[g.idx(ci, cj)], u10 = u[g.idx(ci + 1, cj)];
    const double u01 = u[g.idx(ci, cj + 1)], u11 = u[g.idx(ci + 1, cj + 1)];
    return {(u10 - u00) / h, (u11 - u10) / h, (u11 - u01) / h, (u01 - u00) / h};
}

namespace {

// FEM residual r_i = sum_T area * G(grad w|_T) . grad phi_i|_T, interior nodes.
// Cell rows are processed even-first then odd so no two threads share a node.
void assemble_residual(const FieldG& f, const Grid2D& g, const std::vector<double>& w,
                       std::vector<double>& r) {
    const int nc = g.cells_per_side();
    const double h = g.h();
    std::fill(r.begin(), r.end(), 0.0);
    auto interior = [&](int i, int j) { return !g.boundary(i, j); };

    for (int parity = 0; parity < 2; ++parity) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::ptrdiff_t cjj = parity; cjj < nc; cjj += 2) {
            const int cj = static_cast<int>(cjj);
            for (int ci = 0; ci < nc; ++ci) {
                const TriGrad tg = triangle_gradients(g, w, ci, cj);
                const cplx gl = f.eval({tg.lx, tg.ly});
                const cplx gu = f.eval({tg.ux, tg.uy});
                const double s = 0.5 * h;
                // lower triangle: nodes (ci,cj), (ci+1,cj), (ci+1,cj+1)
                if (interior(ci, cj)) r[g.idx(ci, cj)] += -s * gl.real();
                if (interior(ci + 1, cj)) r[g.idx(ci + 1, cj)] += s * (gl.real() - gl.imag());
                if (interior(ci + 1, cj + 1)) r[g.idx(ci + 1, cj + 1)] += s * gl.imag();
                // upper triangle: nodes (ci,cj), (ci+1,cj+1), (ci,cj+1)
                if (interior(ci, cj)) r[g.idx(ci, cj)] += -s * gu.imag();
                if (interior(ci + 1, cj + 1)) r[g.idx(ci + 1, cj + 1)] += s * gu.real();
                if (interior(ci, cj + 1)) r[g.idx(ci, cj + 1)] += s * (gu.imag() - gu.real());
            }
        }
    }
}

double dot_nodes(const std::vector<double>& a, const std::vector<double>& b) {
    return par::blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; },
                            par::default_exec());
}

}  // namespace

void laplace_apply(const Grid2D& g, const std::vector<double>& z, std::vector<double>& out) {
    const int n = g.n;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const std::size_t id = g.idx(i, static_cast<int>(j));
            if (g.boundary(i, static_cast<int>(j))) {
                out[id] = z[id];
                continue;
            }
            out[id] = 4.0 * z[id] - z[id - 1] - z[id + 1] -
                      z[id - static_cast<std::size_t>(n)] - z[id + static_cast<std::size_t>(n)];
        }
}

int laplace_cg(const Grid2D& g, const std::vector<double>& rhs, std::vector<double>& x,
               double tol, int max_iter) {
    const std::size_t total = g.nodes();
    x.assign(total, 0.0);
    std::vector<double> r = rhs, p = rhs, ap(total);
    // boundary rows carry no unknowns
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            if (g.boundary(i, j)) {
                r[g.idx(i, j)] = 0;
                p[g.idx(i, j)] = 0;
            }
    double rr = dot_nodes(r, r);
    const double tol2 = tol * tol;
    int it = 0;
    while (rr > tol2 && it < max_iter) {
        laplace_apply(g, p, ap);
        const double pap = dot_nodes(p, ap);
        if (pap <= 0) break;
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < total; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < total; ++i) r[i] -= alpha * ap[i];
        const double rr_new = dot_nodes(r, r);
        const double beta = rr_new / rr;
        for (std::size_t i = 0; i < total; ++i) p[i] = r[i] + beta * p[i];
        rr = rr_new;
        ++it;
    }
    return it;
}

std::pair<std::vector<double>, SolveReport> solve_div_G(const FieldG& f, const Grid2D& g,
                                                        const std::vector<double>& boundary,
                                                        const SolveOptions& opt) {
    if (!(f.lambda_hat() > 0))
        throw MonotonicityFailed("solve_div_G requires a certified lambda > 0", f.lambda_hat());
    const double tau = f.lambda_hat() / (f.Lambda_hat() * f.Lambda_hat());
    const double h = g.h();
    const std::size_t total = g.nodes();

    // start from the discrete harmonic extension of the boundary ring
    std::vector<double> w(total, 0.0);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            if (g.boundary(i, j)) w[g.idx(i, j)] = boundary[g.idx(i, j)];
    {
        std::vector<double> aw(total), rhs(total, 0.0), e(total);
        laplace_apply(g, w, aw);
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i)
                if (!g.boundary(i, j)) rhs[g.idx(i, j)] = -aw[g.idx(i, j)];
        laplace_cg(g, rhs, e, 1e-14, 10 * g.n * g.n);
        for (std::size_t i = 0; i < total; ++i) w[i] += e[i];
    }

    SolveReport rep;
    std::vector<double> r(total), z(total);
    double prev_dual = -1;
    int stall = 0;
    for (int it = 0; it < opt.max_outer; ++it) {
        assemble_residual(f, g, w, r);
        const double rnorm2 = std::sqrt(dot_nodes(r, r));
        rep.final_residual = rnorm2 / h;
        rep.iterations = it;
        if (rep.final_residual <= opt.tol) return {std::move(w), rep};

        laplace_cg(g, r, z, 0.01 * rnorm2, 10 * g.n * g.n);
        const double dual = std::sqrt(std::max(dot_nodes(r, z), 0.0));
        if (prev_dual > 0) {
            const double ratio = dual / prev_dual;
            rep.contraction_observed = std::max(rep.contraction_observed, ratio);
            stall = ratio >= 1.0 ? stall + 1 : 0;
            if (stall >= opt.stall_window)
                throw SolverStalled("Zarantonello iteration stagnated for " +
                                    std::to_string(opt.stall_window) +
                                    " steps (certificates wrong?)");
        }
        prev_dual = dual;
        rep.energy_gap = tau * dual;
        for (std::size_t i = 0; i < total; ++i) w[i] -= tau * z[i];
    }
    throw SolverStalled("Zarantonello iteration exceeded max_outer = " +
                        std::to_string(opt.max_outer));
}

std::pair<GridMap, SolveReport> solve_system(const FieldPair& fields, const GridMap& boundary,
                                             const SolveOptions& opt) {
    auto [w1, rep1] = solve_div_G(fields.g1, boundary.grid(), boundary.u1(), opt);
    auto [w2, rep2] = solve_div_G(fields.g2, boundary.grid(), boundary.u2(), opt);
    GridMap w(boundary.grid(), std::move(w1), std::move(w2));
    SolveReport rep;
    rep.iterations = std::max(rep1.iterations, rep2.iterations);
    rep.final_residual = std::max(rep1.final_residual, rep2.final_residual);
    rep.contraction_observed = std::max(rep1.contraction_observed, rep2.contraction_observed);
    rep.energy_gap = std::max(rep1.energy_gap, rep2.energy_gap);
    return {std::move(w), rep};
}

std::pair<std::vector<double>, std::vector<double>> residual_div_cof(const GridMap& u) {
    const Grid2D& g = u.grid();
    const int n = g.n, nc = g.cells_per_side();
    const double h = g.h();
    std::vector<double> r1(g.nodes(), 0.0), r2(g.nodes(), 0.0);
    const auto& du = u.du_cells();
    auto cof_at = [&](int ci, int cj) {
        return cofactor(du[static_cast<std::size_t>(cj) * static_cast<std::size_t>(nc) +
                           static_cast<std::size_t>(ci)]);
    };
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) {
            const Mat2 qc = cof_at(i, j);
            const Mat2 qx = cof_at(i - 1, j);
            const Mat2 qy = cof_at(i, j - 1);
            r1[g.idx(i, j)] = (qc.a11 - qx.a11) / h + (qc.a12 - qy.a12) / h;
            r2[g.idx(i, j)] = (qc.a21 - qx.a21) / h + (qc.a22 - qy.a22) / h;
        }
    return {std::move(r1), std::move(r2)};
}

Step2Bound step2_error_bound(const GridMap& u, const GridMap& w, const FieldG& f1,
                             const FieldG& f2) {
    const Grid2D& g = u.grid();
    const int nc = g.cells_per_side();
    const double area = 0.5 * g.h() * g.h();
    const cplx I(0, 1);
    const double inv_l1 = 1.0 / (f1.lambda_hat() * f1.lambda_hat());
    const double inv_l2 = 1.0 / (f2.lambda_hat() * f2.lambda_hat());

    double lhs = 0, rhs = 0;
    for (int cj = 0; cj < nc; ++cj)
        for (int ci = 0; ci < nc; ++ci) {
            const TriGrad u1 = triangle_gradients(g, u.u1(), ci, cj);
            const TriGrad u2 = triangle_gradients(g, u.u2(), ci, cj);
            const TriGrad w1 = triangle_gradients(g, w.u1(), ci, cj);
            const TriGrad w2 = triangle_gradients(g, w.u2(), ci, cj);
            const cplx du1l{u1.lx, u1.ly}, du1u{u1.ux, u1.uy};
            const cplx du2l{u2.lx, u2.ly}, du2u{u2.ux, u2.uy};
            lhs += area * (std::norm(du1l - cplx{w1.lx, w1.ly}) +
                           std::norm(du1u - cplx{w1.ux, w1.uy}) +
                           std::norm(du2l - cplx{w2.lx, w2.ly}) +
                           std::norm(du2u - cplx{w2.ux, w2.uy}));
            rhs += area * inv_l1 * (std::norm(f1.eval(du1l) + I * du2l) +
                                    std::norm(f1.eval(du1u) + I * du2u));
            rhs += area * inv_l2 * (std::norm(f2.eval(du2l) - I * du1l) +
                                    std::norm(f2.eval(du2u) - I * du1u));
        }
    return {lhs, rhs};
}

}  // namespace ellrig
