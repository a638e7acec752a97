#pragma once

// Sampled closed matrix curves K in R^{2x2}: construction from builtin
// families or CSV tables, pairwise scans (ellipticity constant, rank-one
// ratios, conformal Lipschitz data), nearest-point projection with golden
// refinement, tangent projectors and a reach estimate.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ellrig/errors.hpp"
#include "ellrig/mat.hpp"
#include "ellrig/parallel.hpp"

namespace ellrig {

enum class Family { so2, kc, winding2, table };

std::string family_name(Family f);

struct CurveSpec {
    Family family = Family::so2;
    double c = 0.0;  // family parameter (kc, winding2)

    // table mode: parameter values (strictly increasing, one period) + samples
    std::vector<double> ts;
    std::vector<Mat2> ms;

    static CurveSpec so2() { return {Family::so2, 0.0, {}, {}}; }
    static CurveSpec kc(double c) { return {Family::kc, c, {}, {}}; }
    static CurveSpec winding2(double c) { return {Family::winding2, c, {}, {}}; }
    static CurveSpec from_samples(std::vector<double> t, std::vector<Mat2> m);

    /// "builtin:so2", "builtin:kc:c=0.5", "builtin:winding2:c=0.2" or
    /// "file:PATH" / a bare path to a curve CSV. Throws ValidationError.
    static CurveSpec parse(const std::string& text);
};

/// CSV with header `t,m11,m12,m21,m22`, one period, strictly increasing t.
CurveSpec load_curve_csv(const std::string& path);
void save_curve_csv(const std::string& path, const CurveSpec& spec);

class CurveEvaluator {
  public:
    virtual ~CurveEvaluator() = default;
    virtual Mat2 value(double t) const = 0;
    virtual Mat2 deriv(double t) const = 0;
};

/// Densely sampled curve; immutable after build, freely shared by scans.
class CurveK {
  public:
    std::size_t size() const { return t_.size(); }
    double t(std::size_t i) const { return t_[i]; }
    const Mat2& m(std::size_t i) const { return m_[i]; }
    const Mat2& mp(std::size_t i) const { return mp_[i]; }
    cplx zp(std::size_t i) const { return zp_[i]; }
    cplx zm(std::size_t i) const { return zm_[i]; }
    double arclen(std::size_t i) const { return s_[i]; }

    double length() const { return length_; }
    double radius() const { return radius_; }      // max_i |M(t_i)|
    double diam() const { return diam_; }          // max pairwise |M - M'|
    double diam_zp() const { return diam_zp_; }    // diameter of the conformal projection
    double min_det_tangent() const { return min_det_tangent_; }

    Mat2 eval(double t) const { return evaluator_->value(t); }
    Mat2 eval_deriv(double t) const { return evaluator_->deriv(t); }

    Family family() const { return family_; }
    double family_c() const { return c_; }

    friend CurveK build_curve(const CurveSpec&, int);

  private:
    std::vector<double> t_, s_;
    std::vector<Mat2> m_, mp_;
    std::vector<cplx> zp_, zm_;
    double length_ = 0, radius_ = 0, diam_ = 0, diam_zp_ = 0, min_det_tangent_ = 0;
    Family family_ = Family::table;
    double c_ = 0;
    std::shared_ptr<const CurveEvaluator> evaluator_;
};

/// Uniform resampling to n parameter points; analytic derivatives for the
/// builtin families, periodic cubic spline for sample tables.
/// Throws ValidationError for non-closed tables or n < 64.
CurveK build_curve(const CurveSpec& spec, int n);

/// C* = max over sample pairs (and the tangent limit) of |dM|^2 / det(dM).
/// Throws NotElliptic with the witness pair when det(dM) <= 1e-12 |dM|^2.
double ellipticity_constant(const CurveK& k, par::Exec ex = par::default_exec());

/// min over pairs (and the tangent limit) of det(dM) / |dM|^2; may be <= 0.
double rank_one_scan(const CurveK& k, par::Exec ex = par::default_exec());

struct ConformalData {
    double k_measured;  // max |dz-| / |dz+| over pairs and the tangent limit
    double k_bound;     // (C* - 1) / (C* + 1)
};

/// Requires the ellipticity constant (pre: gate passed).
/// Throws InjectivityFailure when two distinct samples share z+.
ConformalData conformal_data(const CurveK& k, double c_star,
                             par::Exec ex = par::default_exec());

struct Projection {
    double t_star;   // parameter of the nearest point, in [0, 2pi)
    Mat2 p;          // M(t_star)
    double dist;     // |M - p| (Frobenius)
    bool multiple;   // two brackets within 1e-9 of the same distance
};

/// Nearest-point projection: sample scan + golden-section refinement of every
/// local bracket to parameter tolerance 1e-10.
Projection project(const CurveK& k, const Mat2& m);

/// Distance only: sample scan plus one refined bracket. Cheaper than project
/// in integration loops; ties across brackets give the same value anyway.
double curve_distance(const CurveK& k, const Mat2& m);

/// I4 - tau tau^T with tau = vec(M'(t)) / |M'(t)|.
/// Throws DegenerateTangent when |M'(t)| vanishes.
Proj4 tangent_projector(const CurveK& k, double t);

/// Tube-radius estimate: min of 1/curvature and half the chord over pairs
/// that double back (arc length >= 2x chord). An estimate, not a certificate.
double reach_estimate(const CurveK& k);

struct CurveReport {
    double c_star = 0;
    double k_measured = 0;
    double k_bound = 0;
    double min_rankone_ratio = 0;
    double reach = 0;
    double length = 0;
    double min_det_tangent = 0;
    bool elliptic = false;
    bool injective = false;
    bool pass = false;
    std::string failure;  // empty when pass
    double witness_t_i = 0, witness_t_j = 0;
};

/// Runs every gate; never throws, failures are recorded in the report.
CurveReport analyze_curve(const CurveK& k, par::Exec ex = par::default_exec());

// ------------------------------------------------------------ utilities ----

/// Golden-section minimizer on [a, b]; returns the abscissa of the minimum.
double golden_min(double a, double b, double tol, const std::function<double(double)>& f);

}  // namespace ellrig
