#pragma once

// The 3x3 construction: the four-matrix configuration with its rank-one
// chain, the bump-perturbed angle reparametrization rho, the curve Gamma and
// its ellipticity / rank-one-exclusion scans, staircase laminates and the
// non-compactness demonstration.

#include <array>
#include <cstdint>
#include <vector>

#include "ellrig/errors.hpp"
#include "ellrig/mat.hpp"
#include "ellrig/parallel.hpp"

namespace ellrig {

// --------------------------------------------------------------- config ----

struct T4Config {
    double a = 1.0;
    double mu = 3.0;       // (2 + a) / a
    double theta_a = 0.0;  // arctan(1 / (1 + a))
    double r_a = 0.0;      // sqrt(1 + (1 + a)^2)
    std::array<Mat3, 4> T;
    std::array<Mat3, 4> C;

    double theta_hat(int k) const;  // theta_a + (k - 1) pi / 2, k = 1..4
};

/// Validates the chain relation, the rank-one witnesses and the angle
/// exclusion theta_a not in (pi/48) Z (within 1e-9).
/// Throws ParameterExcluded for excluded angles.
T4Config build_t4(double a);

// ------------------------------------------------------------------ rho ----

class RhoFunction {
  public:
    double operator()(double theta) const;
    double deriv(double theta) const;

    double delta() const { return delta_; }
    double eta() const { return eta_; }
    double eps() const { return eps_; }
    double margin() const { return margin_; }
    double max_phi_prime() const { return max_phi_prime_; }
    const std::array<double, 47>& coefficients() const { return t_; }

    friend RhoFunction build_rho(const T4Config&, double, std::uint64_t);

  private:
    double delta_ = 0, eta_ = 0, eps_ = 0, margin_ = 0, max_phi_prime_ = 0;
    std::array<double, 47> t_{};
};

/// Bump coefficients chosen greedily (1001 seeded candidates per slot) to
/// maximize the distance of every grid-pair difference from (pi/12) Z; all
/// audits (monotonicity, anchors, periodicity, sup norm, margin) re-verified
/// on a 1e5 grid. Throws RhoConstructionFailed when the margin is < 1e-6.
RhoFunction build_rho(const T4Config& cfg, double eps, std::uint64_t seed = 7);

struct RhoAudit {
    double min_rho_prime;
    double sup_dev;           // sup |rho - id|
    double periodicity_defect;
    double anchor_defect;
    double margin;
    bool pass;
};

RhoAudit audit_rho(const T4Config& cfg, const RhoFunction& rho, int grid = 100000);

// ---------------------------------------------------------------- curve ----

Mat3 gamma(const T4Config& cfg, const RhoFunction& rho, double theta);
Mat3 gamma_prime(const T4Config& cfg, const RhoFunction& rho, double theta);

struct EllipticityScan3 {
    double min_sigma2;
    double argmin_theta;
    double minor_identity_err;  // max deviation of the two-minor identity
};

/// min over the theta grid (plus golden refinement at the minimizer) of
/// sigma2(Gamma'). Throws EllipticityFailed when the refined min <= 1e-8.
EllipticityScan3 check_ellipticity_3x3(const T4Config& cfg, const RhoFunction& rho, int n_grid,
                                       par::Exec ex = par::default_exec());

struct RankOnePairDiag {
    double ratio, theta1, theta2;
    double dist_sum_pi;        // dist(theta+theta', pi Z)
    double dist_diff_lattice;  // dist(theta-theta', (pi/3) Z union (pi/4) Z)
};

struct RankOneScan3 {
    double min_ratio;
    double theta1, theta2;
    std::vector<RankOnePairDiag> smallest;  // diagnostics, ascending ratio
};

/// min over grid pairs of sigma2(dGamma)/|dGamma|, near-diagonal pairs via
/// the derivative ratio, coordinate-descent refinement around the smallest
/// grid values. Throws RankOneFound when the refined min <= 1e-8.
RankOneScan3 scan_rank_one_3x3(const T4Config& cfg, const RhoFunction& rho, int n_grid,
                               par::Exec ex = par::default_exec());

// ------------------------------------------------------------- laminates ---

struct LaminateAtom {
    Mat3 matrix;
    double weight;
    int k;      // 1..4
    bool is_T;  // false: the residual C atom
};

struct LaminateMeasure {
    std::vector<LaminateAtom> atoms;
    double residual_c_mass;  // (1/mu)^N as the iterated product
};

/// N chain splits starting from (C1, 1); weights are telescoped powers of
/// 1/mu so their compensated sum is exactly 1.
LaminateMeasure staircase_laminate(const T4Config& cfg, int n_splits);

/// Compensated (Neumaier) sums.
double laminate_weight_sum(const LaminateMeasure& lam);
Mat3 laminate_barycenter(const LaminateMeasure& lam);

// --------------------------------------------------- cross-section maps ----

/// Piecewise-affine map [0,1]^2 -> R^3 with an x3-independent gradient.
struct CrossSectionMap {
    int n = 0;  // nodes per side
    std::vector<std::array<double, 3>> u;

    double h() const { return 1.0 / (n - 1); }
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
               static_cast<std::size_t>(i);
    }
    /// Cell-centered gradient embedded as a 3x3 matrix with zero third column.
    Mat3 grad(int ci, int cj) const;
};

/// Simple laminate between a rank-one-connected pair: gradient A on a
/// fraction ~ weight, B on the rest, cutoff bands of total fraction
/// <= 2/stripes (axis-aligned direction). Boundary values are the
/// average-gradient affine map. Throws std::invalid_argument when B - A is
/// not rank-one or has a nonzero third column.
CrossSectionMap laminate_map(const Mat3& a, const Mat3& b, double weight, int stripes, int n);

// ------------------------------------------------------------------ demo ---

struct DemoOptions {
    int stripes = 16;
    int samples_per_side = 256;  // stratified sample lattice for integrals
    int curve_samples = 1024;
    std::uint64_t seed = 7;
};

struct DemoRow {
    int depth;
    double eps_d;   // int dist^2(Du_d, Gamma)
    double m_d;     // inf over curve samples of int |Du_d - M|^2
    double c_mass;  // residual C-region mass (1/mu)^depth
};

/// Nested staircase-laminate maps evaluated analytically; integrals by
/// seeded stratified sampling over the unit square.
std::vector<DemoRow> non_compactness_demo(const T4Config& cfg, const RhoFunction& rho,
                                          int max_depth, const DemoOptions& opt = {});

/// Analytic gradient of the depth-d nested laminate at a point of [0,1]^2;
/// exposed for the construction's own tests.
Mat3 nested_laminate_gradient(const T4Config& cfg, int depth, int stripes, double x1, double x2,
                              int* atom_out = nullptr);
std::array<double, 3> nested_laminate_value(const T4Config& cfg, int depth, int stripes,
                                            double x1, double x2);

}  // namespace ellrig
