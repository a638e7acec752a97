#pragma once

// Rigidity experiments: distance integrals eps = int dist^2(Du, K), the
// tangent-shift / projection iteration locating the best constant matrix,
// the linearized tangent-space estimate and gradient clamping.

#include <cstdint>
#include <string>
#include <vector>

#include "ellrig/curve.hpp"
#include "ellrig/field.hpp"
#include "ellrig/grid.hpp"
#include "ellrig/parallel.hpp"

namespace ellrig {

enum class Generator { affine, affine_plus_bump, tangent_wiggle, pde_projected, user_file };

Generator parse_generator(const std::string& name);
std::string generator_name(Generator g);

struct TestMapSpec {
    Generator gen = Generator::affine_plus_bump;
    double t0 = 0.7;        // base point parameter on K
    double eps_amp = 1e-2;  // amplitude, >= 0
    double frequency = 2;
    std::uint64_t seed = 1;
    std::string file;  // user_file
};

/// pde_projected needs the curve's fields; other generators ignore them.
GridMap make_test_map(const TestMapSpec& spec, const CurveK& k, const Grid2D& g,
                      const FieldPair* fields = nullptr);

/// Integration domain: the full square Q or the centered half square Q'.
enum class Domain { Q, Qprime };

/// Midpoint-rule integral of dist^2(Du, K) over cells with centers in the
/// domain.
double dist2_integral(const GridMap& u, const CurveK& k, Domain d,
                      par::Exec ex = par::default_exec());

/// max over Q' cells of dist(Du, K).
double sup_distance(const GridMap& u, const CurveK& k, par::Exec ex = par::default_exec());

/// Closed-form tangent least squares: X = <mean_{Q'}(Du - M(t)), tau> tau.
Mat2 best_tangent_shift(const GridMap& u, const CurveK& k, double t);

struct StepY {
    Mat2 y;
    double t_next;
    bool accepted;      // |X| <= delta0, projection taken
    bool multiplicity;  // projection bracket tie
};

/// Y = Pi_K(M(t) + X) when |X| <= delta0, else the fallback Y = M(t).
StepY step_Y(const CurveK& k, double t, const Mat2& x, double delta0);

struct RigidityResult {
    double eps = 0;     // int_Q dist^2(Du, K)
    double q_star = 0;  // int_{Q'} |Du - M*|^2
    Mat2 m_star;
    double t_star = 0;
    double ratio = 0;  // q_star / eps for eps > 0
    double s0 = 0;     // sup over Q' of dist(Du, K)
    int j0 = 0;        // trace index achieving q_star
    std::vector<double> q_trace, s_trace;
    double brute_q = 0;       // best over refined curve samples
    double c_hat = 0;         // fitted constant of the trace recursion
    bool trace_ok = true;     // recursion admits a finite fitted constant
    bool multiplicity = false;
};

RigidityResult find_best_M(const GridMap& u, const CurveK& k,
                           par::Exec ex = par::default_exec());

/// ratio = inf_{X in T_M K} int_Q |Du - X|^2 / int_Q |P_M Du|^2 with the 0/0
/// convention 0; +inf flags a nonzero numerator over a vanishing denominator.
double linearized_test(const CurveK& k, double t, const GridMap& u);

/// Scales the non-affine part (falling back to a global rescale for huge
/// affine parts) until every cell satisfies |Du| <= 2R. In-range maps are
/// returned unchanged.
GridMap clamp_gradients(const GridMap& u, double R);

// ------------------------------------------------------------ experiment ---

struct SweepRow {
    std::string curve;
    std::string generator;
    double eps_amp, eps, q_star, ratio, s0;
    int j0;
};

std::vector<SweepRow> run_rigidity_sweep(const CurveK& k, const std::string& curve_label,
                                         Generator gen, const std::vector<double>& amps,
                                         const Grid2D& g, std::uint64_t seed,
                                         const FieldPair* fields = nullptr);

}  // namespace ellrig
