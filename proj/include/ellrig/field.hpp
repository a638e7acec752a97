#pragma once

// Globally Lipschitz uniformly monotone vector fields built from curve data:
// extend the anticonformal graph function H, invert F(z) = conj(z) + H(z) by
// contraction, evaluate G and certify its monotonicity constants.

#include <optional>
#include <variant>
#include <vector>

#include "ellrig/curve.hpp"
#include "ellrig/errors.hpp"
#include "ellrig/mat.hpp"
#include "ellrig/parallel.hpp"

namespace ellrig {

enum class ExtendMode { closed_form, mcshane_grid };
enum class FieldSide { G1, G2 };

// -------------------------------------------------------------- extension --

/// H(z) = alpha * conj(z); covers the families whose graph function is
/// globally conjugate-linear (so2: alpha = 0, kc: alpha = c) and their
/// rotated versions used for the second field.
struct ConjLinearH {
    cplx alpha;
};

/// Componentwise infimal-convolution midpoint extension through the curve
/// data points; interpolates the data exactly and each real component is
/// k-Lipschitz, so the pair is sqrt(2) k-Lipschitz.
struct McShaneH {
    std::vector<cplx> points;  // z+ samples
    std::vector<cplx> values;  // z- samples
    double k = 0;              // componentwise constant
};

/// Bilinear interpolation of a (optionally smoothed) node table; evaluation
/// clamps to the box so the Lipschitz certificate extends to all of C.
struct GridH {
    double extent = 0;  // box [-extent, extent]^2
    int n = 0;
    std::vector<double> re, im;  // row-major node values

    cplx eval(cplx z) const;
};

class HExtension {
  public:
    HExtension(ConjLinearH h, double k_ext);
    HExtension(McShaneH h, double k_ext, std::optional<GridH> grid, double eps_mol);

    cplx operator()(cplx z) const;

    double k_ext() const { return k_ext_; }
    double eps_mol() const { return eps_mol_; }
    bool closed_form() const { return std::holds_alternative<ConjLinearH>(h_); }
    const std::optional<GridH>& grid() const { return grid_; }

    /// Max |H(z+(t_i)) - z-(t_i)| over given curve samples.
    double agreement(const std::vector<cplx>& zp, const std::vector<cplx>& zm) const;

  private:
    std::variant<ConjLinearH, McShaneH> h_;
    std::optional<GridH> grid_;  // audit grid / mollified evaluation table
    double k_ext_;
    double eps_mol_ = 0;
};

struct ExtendOptions {
    double grid_extent = 2.0;
    int grid_n = 256;
    double eps_mol = 0.0;    // 0 = no mollification
    int audit_pairs = 100000;
    std::uint64_t seed = 1;
};

/// Swap applied to curve data before building the second field's extension:
/// (z+, z-) -> (-i z+, -i z-), i.e. the curve rotated by -pi/2 on the left.
/// Preserves all pairwise moduli, hence the Lipschitz data.
inline cplx g2_swap(cplx z) { return cplx(0, -1) * z; }

/// Builds the extension for one side. closed_form requires a family with a
/// globally conjugate-linear H (so2, kc); mcshane_grid requires
/// k_measured < 1/sqrt(2) and certifies the achieved constant numerically.
HExtension extend_H(const CurveK& k, ExtendMode mode, FieldSide side, double k_measured,
                    const ExtendOptions& opt = {});

// ------------------------------------------------------------------ field --

struct FixedPointStats {
    int iterations = 0;
    double contraction = 0;  // max observed step ratio
};

class FieldG {
  public:
    FieldG(FieldSide side, HExtension h, double fp_tol = 1e-12);

    FieldSide side() const { return side_; }
    double k_ext() const { return h_.k_ext(); }
    double fp_tol() const { return fp_tol_; }
    const HExtension& extension() const { return h_; }

    /// Solves F(z) = conj(z) + H(z) = w by the contraction z <- conj(w) - conj(H(z)).
    cplx invert_F(cplx w, FixedPointStats* stats = nullptr) const;

    /// G(A) = conj(F^{-1}(A)) - H(F^{-1}(A)).
    cplx eval(cplx a, FixedPointStats* stats = nullptr) const;

    double lambda_hat() const { return lambda_hat_; }
    double Lambda_hat() const { return Lambda_hat_; }
    void set_certificate(double lam, double Lam) {
        lambda_hat_ = lam;
        Lambda_hat_ = Lam;
    }

  private:
    FieldSide side_;
    HExtension h_;
    double fp_tol_;
    double lambda_hat_ = 0, Lambda_hat_ = 0;
};

struct MonotoneCertificate {
    double lambda_hat;  // min monotonicity quotient over sampled pairs
    double Lambda_hat;  // max difference quotient
};

/// Random-pair certification inside [-extent, extent]^2; deterministic for a
/// fixed seed. Throws MonotonicityFailed if the quotient ever drops <= 0.
MonotoneCertificate certify_monotone(const FieldG& f, int n_pairs, double extent,
                                     std::uint64_t seed = 2,
                                     par::Exec ex = par::default_exec());

/// max over curve samples of |G1(A_i) + i B_i| and |-i G2(B_i) - A_i| where
/// A_i, B_i are the rows of M(t_i) under the row -> r1 + i r2 convention.
double graph_residual(const FieldG& g1, const FieldG& g2, const CurveK& k,
                      par::Exec ex = par::default_exec());

struct FieldPair {
    FieldG g1;
    FieldG g2;
    double k_measured = 0;
    double graph_residual_max = 0;
};

/// Full pipeline: conformal data, both extensions, certification, residual.
FieldPair build_fields(const CurveK& k, ExtendMode mode, const ExtendOptions& opt = {},
                       int certify_pairs = 20000, double fp_tol = 1e-12);

// ------------------------------------------------------------ grid cache ---

/// `fieldgrid v1` text format: header, extent, n, then row-major "Gx Gy".
void save_field_grid(const std::string& path, const FieldG& f, double extent, int n);
GridH load_field_grid(const std::string& path);

}  // namespace ellrig
