#pragma once

// Quasilinear solver for div G(Dw) = 0 with Dirichlet data on square grids.
// Discretization is P1 on the criss-cross triangulation, whose gradient /
// adjoint-divergence pair makes div_h D_h the standard 5-point Laplacian and
// keeps discrete integration by parts exact. The uniformly monotone field
// drives a Zarantonello iteration w <- w - tau Lap^{-1} div G(Dw) with
// tau = lambda / Lambda^2.

#include <vector>

#include "ellrig/field.hpp"
#include "ellrig/grid.hpp"

namespace ellrig {

struct SolveReport {
    int iterations = 0;
    double final_residual = 0;       // discrete L2 norm of the strong residual
    double contraction_observed = 0; // max ratio of successive dual-norm residuals
    double energy_gap = 0;           // H1 seminorm of the last update
};

struct SolveOptions {
    double tol = 1e-10;
    int max_outer = 4000;
    int stall_window = 20;
};

/// Solves one scalar component: boundary ring of `boundary` is the Dirichlet
/// data, the interior is ignored. Throws SolverStalled when the observed
/// contraction stays >= 1 for stall_window steps.
std::pair<std::vector<double>, SolveReport> solve_div_G(const FieldG& f, const Grid2D& g,
                                                        const std::vector<double>& boundary,
                                                        const SolveOptions& opt = {});

/// Both components: u1 with fields.g1, u2 with fields.g2.
std::pair<GridMap, SolveReport> solve_system(const FieldPair& fields, const GridMap& boundary,
                                             const SolveOptions& opt = {});

/// Divergence of the cofactor field of Du, evaluated with deliberately
/// offset (forward) stencils; exact-zero schemes hide the O(h) behavior this
/// diagnostic reports. Output components live on nodes, zero on the ring.
std::pair<std::vector<double>, std::vector<double>> residual_div_cof(const GridMap& u);

struct Step2Bound {
    double lhs;  // integral |D(u - w)|^2 over the whole square
    double rhs;  // per-side lambda^{-2} weighted residual integrals
};

/// Requires w to solve the system with boundary data from u.
Step2Bound step2_error_bound(const GridMap& u, const GridMap& w, const FieldG& f1,
                             const FieldG& f2);

// --------------------------------------------------------------- helpers ---

/// Per-triangle gradients of one component: each cell (ci,cj) is split by the
/// diagonal (ci,cj)-(ci+1,cj+1) into a lower and an upper triangle.
struct TriGrad {
    double lx, ly;  // lower triangle gradient
    double ux, uy;  // upper triangle gradient
};
TriGrad triangle_gradients(const Grid2D& g, const std::vector<double>& u, int ci, int cj);

/// 5-point FEM Laplacian times z on interior nodes (boundary rows identity).
void laplace_apply(const Grid2D& g, const std::vector<double>& z, std::vector<double>& out);

/// CG solve of laplace_apply(x) = rhs on interior nodes, zero boundary.
int laplace_cg(const Grid2D& g, const std::vector<double>& rhs, std::vector<double>& x,
               double tol, int max_iter);

}  // namespace ellrig
