#include "ellrig/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace ellrig {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double t) {
    double w = std::fmod(t, kTwoPi);
    if (w < 0) w += kTwoPi;
    return w;
}

// ------------------------------------------------------ periodic spline ----

// Natural periodic cubic spline through (t_i, y_i) on a period of length P.
// Moments from the cyclic tridiagonal system, solved by Thomas plus a
// Sherman-Morrison correction.
class PeriodicSpline {
  public:
    PeriodicSpline() = default;

    PeriodicSpline(std::vector<double> t, std::vector<double> y, double period)
        : t_(std::move(t)), y_(std::move(y)), period_(period) {
        const std::size_t n = t_.size();
        h_.resize(n);
        for (std::size_t i = 0; i + 1 < n; ++i) h_[i] = t_[i + 1] - t_[i];
        h_[n - 1] = period_ - (t_[n - 1] - t_[0]);

        std::vector<double> a(n), b(n), c(n), d(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double hm = h_[(i + n - 1) % n];
            const double hi = h_[i];
            a[i] = hm / 6.0;
            b[i] = (hm + hi) / 3.0;
            c[i] = hi / 6.0;
            const double yp = y_[(i + n - 1) % n];
            const double yn = y_[(i + 1) % n];
            d[i] = (yn - y_[i]) / hi - (y_[i] - yp) / hm;
        }
        mom_ = solve_cyclic(a, b, c, d);
    }

    double value(double t) const {
        const auto [i, s] = locate(t);
        const std::size_t j = (i + 1) % t_.size();
        const double h = h_[i];
        const double A = (h - s) / h, B = s / h;
        return A * y_[i] + B * y_[j] +
               ((A * A * A - A) * mom_[i] + (B * B * B - B) * mom_[j]) * h * h / 6.0;
    }

    double deriv(double t) const {
        const auto [i, s] = locate(t);
        const std::size_t j = (i + 1) % t_.size();
        const double h = h_[i];
        const double A = (h - s) / h, B = s / h;
        return (y_[j] - y_[i]) / h +
               ((3.0 * B * B - 1.0) * mom_[j] - (3.0 * A * A - 1.0) * mom_[i]) * h / 6.0;
    }

  private:
    std::pair<std::size_t, double> locate(double t) const {
        double u = t_[0] + std::fmod(t - t_[0], period_);
        if (u < t_[0]) u += period_;
        const auto it = std::upper_bound(t_.begin(), t_.end(), u);
        const std::size_t i = (it == t_.begin()) ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
        return {i, u - t_[i]};
    }

    static std::vector<double> solve_tridiag(std::vector<double> a, std::vector<double> b,
                                             std::vector<double> c, std::vector<double> d) {
        const std::size_t n = b.size();
        for (std::size_t i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        std::vector<double> x(n);
        x[n - 1] = d[n - 1] / b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
        return x;
    }

    static std::vector<double> solve_cyclic(const std::vector<double>& a,
                                            const std::vector<double>& b,
                                            const std::vector<double>& c,
                                            const std::vector<double>& d) {
        const std::size_t n = b.size();
        const double alpha = a[0];    // corner (0, n-1)
        const double beta = c[n - 1]; // corner (n-1, 0)
        const double gamma = -b[0];
        std::vector<double> bb = b;
        bb[0] = b[0] - gamma;
        bb[n - 1] = b[n - 1] - alpha * beta / gamma;
        auto x = solve_tridiag(a, bb, c, d);
        std::vector<double> u(n, 0.0);
        u[0] = gamma;
        u[n - 1] = alpha;
        auto z = solve_tridiag(a, bb, c, u);
        const double fact = (x[0] + beta * x[n - 1] / gamma) /
                            (1.0 + z[0] + beta * z[n - 1] / gamma);
        for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
        return x;
    }

    std::vector<double> t_, y_, h_, mom_;
    double period_ = kTwoPi;
};

// ----------------------------------------------------------- evaluators ----

class So2Evaluator final : public CurveEvaluator {
  public:
    Mat2 value(double t) const override {
        const double c = std::cos(t), s = std::sin(t);
        return {c, -s, s, c};
    }
    Mat2 deriv(double t) const override {
        const double c = std::cos(t), s = std::sin(t);
        return {-s, -c, c, -s};
    }
};

// z+(t) = e^{it}, z-(t) = c e^{-i w t} with winding w in {1, 2}.
class ConformalFamilyEvaluator final : public CurveEvaluator {
  public:
    ConformalFamilyEvaluator(double c, int winding) : c_(c), w_(winding) {}

    Mat2 value(double t) const override {
        const cplx zp = std::polar(1.0, t);
        const cplx zm = c_ * std::polar(1.0, -w_ * t);
        return recompose({zp, zm});
    }
    Mat2 deriv(double t) const override {
        const cplx zp = cplx(0, 1) * std::polar(1.0, t);
        const cplx zm = cplx(0, -w_) * c_ * std::polar(1.0, -w_ * t);
        return recompose({zp, zm});
    }

  private:
    double c_;
    int w_;
};

class SplineEvaluator final : public CurveEvaluator {
  public:
    SplineEvaluator(const std::vector<double>& t, const std::vector<Mat2>& m) {
        std::vector<double> e(t.size());
        for (int k = 0; k < 4; ++k) {
            for (std::size_t i = 0; i < t.size(); ++i) e[i] = m[i].vec()[static_cast<size_t>(k)];
            sp_[static_cast<size_t>(k)] = PeriodicSpline(t, e, kTwoPi);
        }
    }
    Mat2 value(double t) const override {
        return Mat2::from_vec({sp_[0].value(t), sp_[1].value(t), sp_[2].value(t), sp_[3].value(t)});
    }
    Mat2 deriv(double t) const override {
        return Mat2::from_vec({sp_[0].deriv(t), sp_[1].deriv(t), sp_[2].deriv(t), sp_[3].deriv(t)});
    }

  private:
    std::array<PeriodicSpline, 4> sp_;
};

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::so2: return "so2";
        case Family::kc: return "kc";
        case Family::winding2: return "winding2";
        case Family::table: return "table";
    }
    return "?";
}

CurveSpec CurveSpec::from_samples(std::vector<double> t, std::vector<Mat2> m) {
    CurveSpec s;
    s.family = Family::table;
    s.ts = std::move(t);
    s.ms = std::move(m);
    return s;
}

CurveSpec CurveSpec::parse(const std::string& text) {
    if (text.rfind("builtin:", 0) == 0) {
        std::string rest = text.substr(8);
        std::string name = rest, kv;
        if (auto pos = rest.find(':'); pos != std::string::npos) {
            name = rest.substr(0, pos);
            kv = rest.substr(pos + 1);
        }
        double c = 0.0;
        bool has_c = false;
        if (!kv.empty()) {
            if (kv.rfind("c=", 0) != 0)
                throw ValidationError("curve spec: expected c=<value> after '" + name + ":'");
            try {
                c = std::stod(kv.substr(2));
            } catch (const std::exception&) {
                throw ValidationError("curve spec: cannot parse parameter in '" + text + "'");
            }
            has_c = true;
        }
        if (name == "so2") return so2();
        if (name == "kc") return kc(has_c ? c : 0.5);
        if (name == "winding2") return winding2(has_c ? c : 0.2);
        throw ValidationError("curve spec: unknown builtin family '" + name + "'");
    }
    if (text.rfind("file:", 0) == 0) return load_curve_csv(text.substr(5));
    if (text.find('/') != std::string::npos || text.size() > 4) {
        if (text.size() >= 4 && text.substr(text.size() - 4) == ".csv") return load_curve_csv(text);
    }
    throw ValidationError("curve spec: cannot interpret '" + text + "'");
}

CurveSpec load_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open curve file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("curve file '" + path + "' is empty");
    auto strip = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
                s.end());
        return s;
    };
    if (strip(line) != "t,m11,m12,m21,m22")
        throw ValidationError("curve file '" + path + "': expected header t,m11,m12,m21,m22");

    std::vector<double> ts;
    std::vector<Mat2> ms;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) continue;
        std::istringstream row(line);
        double v[5];
        char comma;
        for (int k = 0; k < 5; ++k) {
            if (!(row >> v[k]))
                throw ValidationError("curve file '" + path + "': parse error at line " +
                                      std::to_string(lineno));
            if (k < 4 && !(row >> comma && comma == ','))
                throw ValidationError("curve file '" + path + "': expected ',' at line " +
                                      std::to_string(lineno));
            if (!std::isfinite(v[k]))
                throw ValidationError("curve file '" + path + "': non-finite value at line " +
                                      std::to_string(lineno));
        }
        if (!ts.empty() && v[0] <= ts.back())
            throw ValidationError("curve file '" + path + "': t must be strictly increasing (line " +
                                  std::to_string(lineno) + ")");
        ts.push_back(v[0]);
        ms.push_back({v[1], v[2], v[3], v[4]});
    }
    if (ts.size() < 64)
        throw ValidationError("curve file '" + path + "': need at least 64 samples, got " +
                              std::to_string(ts.size()));
    return CurveSpec::from_samples(std::move(ts), std::move(ms));
}

void save_curve_csv(const std::string& path, const CurveSpec& spec) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write curve file '" + path + "'");
    out << "t,m11,m12,m21,m22\n";
    char buf[256];
    for (std::size_t i = 0; i < spec.ts.size(); ++i) {
        const auto v = spec.ms[i].vec();
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", spec.ts[i], v[0], v[1],
                      v[2], v[3]);
        out << buf;
    }
}

// ------------------------------------------------------------- building ----

CurveK build_curve(const CurveSpec& spec, int n) {
    if (n < 64) throw ValidationError("build_curve: need n >= 64 samples");

    CurveK k;
    k.family_ = spec.family;
    k.c_ = spec.c;

    switch (spec.family) {
        case Family::so2:
            k.evaluator_ = std::make_shared<So2Evaluator>();
            break;
        case Family::kc:
            k.evaluator_ = std::make_shared<ConformalFamilyEvaluator>(spec.c, 1);
            break;
        case Family::winding2:
            k.evaluator_ = std::make_shared<ConformalFamilyEvaluator>(spec.c, 2);
            break;
        case Family::table: {
            if (spec.ts.size() != spec.ms.size() || spec.ts.size() < 64)
                throw ValidationError("build_curve: sample table needs >= 64 rows");
            // normalize the parameter to [0, 2pi); period inferred from the
            // span plus one median spacing
            std::vector<double> gaps(spec.ts.size() - 1);
            for (std::size_t i = 0; i + 1 < spec.ts.size(); ++i)
                gaps[i] = spec.ts[i + 1] - spec.ts[i];
            std::vector<double> sorted = gaps;
            std::sort(sorted.begin(), sorted.end());
            const double median_gap = sorted[sorted.size() / 2];
            const double period = spec.ts.back() - spec.ts.front() + median_gap;

            // closure: the wrap chord must be comparable to interior chords
            double max_chord = 0;
            for (std::size_t i = 0; i + 1 < spec.ms.size(); ++i)
                max_chord = std::max(max_chord, (spec.ms[i + 1] - spec.ms[i]).frob());
            const double wrap_chord = (spec.ms.front() - spec.ms.back()).frob();
            if (wrap_chord > 10.0 * std::max(max_chord, 1e-300))
                throw ValidationError(
                    "build_curve: sample table does not close up (wrap chord " +
                    std::to_string(wrap_chord) + " vs max adjacent chord " +
                    std::to_string(max_chord) + ")");

            std::vector<double> tn(spec.ts.size());
            for (std::size_t i = 0; i < spec.ts.size(); ++i)
                tn[i] = kTwoPi * (spec.ts[i] - spec.ts.front()) / period;
            k.evaluator_ = std::make_shared<SplineEvaluator>(tn, spec.ms);
            break;
        }
    }

    const auto nn = static_cast<std::size_t>(n);
    k.t_.resize(nn);
    k.m_.resize(nn);
    k.mp_.resize(nn);
    k.zp_.resize(nn);
    k.zm_.resize(nn);
    k.s_.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        const double t = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
        k.t_[i] = t;
        k.m_[i] = k.evaluator_->value(t);
        k.mp_[i] = k.evaluator_->deriv(t);
        const auto p = decompose(k.m_[i]);
        k.zp_[i] = p.zp;
        k.zm_[i] = p.zm;
    }

    double s = 0, radius = 0, min_det = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nn; ++i) {
        k.s_[i] = s;
        s += (k.m_[(i + 1) % nn] - k.m_[i]).frob();
        radius = std::max(radius, k.m_[i].frob());
        min_det = std::min(min_det, k.mp_[i].det());
        if (k.mp_[i].frob() == 0.0)
            throw ValidationError("build_curve: zero derivative sample (degenerate curve)");
    }
    k.length_ = s;
    k.radius_ = radius;
    k.min_det_tangent_ = min_det;

    const auto& m = k.m_;
    k.diam_ = std::sqrt(par::pair_max(
        nn, [&m](std::size_t i, std::size_t j) { return (m[i] - m[j]).frob_sq(); },
        par::default_exec()));
    const auto& zp = k.zp_;
    k.diam_zp_ = std::sqrt(par::pair_max(
        nn, [&zp](std::size_t i, std::size_t j) { return std::norm(zp[i] - zp[j]); },
        par::default_exec()));
    return k;
}

// ---------------------------------------------------------------- scans ----

namespace {
// relative floor below which det(dM) counts as a failed ellipticity gate
constexpr double kDetGate = 1e-12;
}  // namespace

double ellipticity_constant(const CurveK& k, par::Exec ex) {
    const std::size_t n = k.size();

    // gate pass: locate any pair with det(dM) <= kDetGate |dM|^2
    const double worst = par::pair_min(
        n,
        [&k](std::size_t i, std::size_t j) {
            const Mat2 d = k.m(i) - k.m(j);
            const double f2 = d.frob_sq();
            return f2 > 0 ? d.det() / f2 : std::numeric_limits<double>::infinity();
        },
        ex);
    if (worst <= kDetGate) {
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const Mat2 d = k.m(i) - k.m(j);
                if (d.frob_sq() > 0 && d.det() <= kDetGate * d.frob_sq())
                    throw NotElliptic("ellipticity gate failed: det(M(t)-M(t')) <= 0", k.t(i),
                                      k.t(j), d.det());
            }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double dd = k.mp(i).det();
        if (dd <= kDetGate * k.mp(i).frob_sq())
            throw NotElliptic("ellipticity gate failed at the tangent limit", k.t(i), k.t(i), dd);
    }

    const double pairs = par::pair_max(
        n,
        [&k](std::size_t i, std::size_t j) {
            const Mat2 d = k.m(i) - k.m(j);
            const double det = d.det();
            return det > 0 ? d.frob_sq() / det : -std::numeric_limits<double>::infinity();
        },
        ex);
    const double diag = par::max_over(
        n, [&k](std::size_t i) { return k.mp(i).frob_sq() / k.mp(i).det(); }, ex);
    return std::max(pairs, diag);
}

double rank_one_scan(const CurveK& k, par::Exec ex) {
    const std::size_t n = k.size();
    const double pairs = par::pair_min(
        n,
        [&k](std::size_t i, std::size_t j) {
            const Mat2 d = k.m(i) - k.m(j);
            const double f2 = d.frob_sq();
            return f2 > 0 ? d.det() / f2 : std::numeric_limits<double>::infinity();
        },
        ex);
    const double diag = par::min_over(
        n, [&k](std::size_t i) { return k.mp(i).det() / k.mp(i).frob_sq(); }, ex);
    return std::min(pairs, diag);
}

ConformalData conformal_data(const CurveK& k, double c_star, par::Exec ex) {
    const std::size_t n = k.size();
    const double inj_tol = 1e-10 * k.diam_zp();

    const double min_dzp = par::pair_min(
        n, [&k](std::size_t i, std::size_t j) { return std::abs(k.zp(i) - k.zp(j)); }, ex);
    if (min_dzp <= inj_tol) {
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (std::abs(k.zp(i) - k.zp(j)) <= inj_tol)
                    throw InjectivityFailure(
                        "conformal projection is not injective on the samples", k.t(i), k.t(j));
    }

    const double pairs = par::pair_max(
        n,
        [&k](std::size_t i, std::size_t j) {
            return std::abs(k.zm(i) - k.zm(j)) / std::abs(k.zp(i) - k.zp(j));
        },
        ex);
    const double diag = par::max_over(
        n,
        [&k](std::size_t i) {
            const auto d = decompose(k.mp(i));
            return std::abs(d.zm) / std::abs(d.zp);
        },
        ex);
    const double k_measured = std::max(pairs, diag);
    return {k_measured, (c_star - 1.0) / (c_star + 1.0)};
}

// ----------------------------------------------------------- projection ----

double golden_min(double a, double b, double tol, const std::function<double(double)>& f) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

Projection project(const CurveK& k, const Mat2& m) {
    const std::size_t n = k.size();
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = (m - k.m(i)).frob_sq();

    // local minima over the periodic sample grid
    std::vector<std::size_t> cands;
    for (std::size_t i = 0; i < n; ++i) {
        const double prev = d2[(i + n - 1) % n], next = d2[(i + 1) % n];
        if (d2[i] <= prev && d2[i] <= next) cands.push_back(i);
    }
    if (cands.size() > 32) {
        std::stable_sort(cands.begin(), cands.end(),
                         [&d2](std::size_t a, std::size_t b) { return d2[a] < d2[b]; });
        cands.resize(32);
        std::sort(cands.begin(), cands.end());
    }

    const double dt = kTwoPi / static_cast<double>(n);
    struct Refined {
        double t, dist;
    };
    std::vector<Refined> refined;
    refined.reserve(cands.size());
    for (std::size_t i : cands) {
        const double tc = k.t(i);
        auto f = [&](double t) { return (m - k.eval(t)).frob_sq(); };
        const double ts = golden_min(tc - dt, tc + dt, 1e-10, f);
        refined.push_back({wrap_2pi(ts), std::sqrt(f(ts))});
    }

    std::sort(refined.begin(), refined.end(), [](const Refined& a, const Refined& b) {
        return a.dist != b.dist ? a.dist < b.dist : a.t < b.t;
    });
    const Refined best = refined.front();
    bool multiple = false;
    double t_star = best.t;
    for (std::size_t i = 1; i < refined.size(); ++i) {
        // distinct bracket at essentially the same distance
        if (refined[i].dist - best.dist <= 1e-9 &&
            std::abs(refined[i].t - best.t) > 16.0 * dt * 1e-3 + 1e-8) {
            multiple = true;
            t_star = std::min(t_star, refined[i].t);
        }
    }
    return {t_star, k.eval(t_star), best.dist, multiple};
}

double curve_distance(const CurveK& k, const Mat2& m) {
    const std::size_t n = k.size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d2 = (m - k.m(i)).frob_sq();
        if (d2 < best) {
            best = d2;
            arg = i;
        }
    }
    const double dt = kTwoPi / static_cast<double>(n);
    const double tc = k.t(arg);
    auto f = [&](double t) { return (m - k.eval(t)).frob_sq(); };
    const double ts = golden_min(tc - dt, tc + dt, 1e-10, f);
    return std::sqrt(std::min(best, f(ts)));
}

Proj4 tangent_projector(const CurveK& k, double t) {
    const Mat2 mp = k.eval_deriv(t);
    const double norm = mp.frob();
    if (!(norm > 1e-14))
        throw DegenerateTangent("tangent_projector: |M'(t)| vanishes at t=" + std::to_string(t));
    auto tau = mp.vec();
    for (double& v : tau) v /= norm;
    return projector_perp(tau);
}

double reach_estimate(const CurveK& k) {
    const std::size_t n = k.size();
    const double dt = kTwoPi / static_cast<double>(n);

    // curvature term: centered differences of the sampled derivative
    double max_kappa = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Mat2 mpp = (1.0 / (2.0 * dt)) * (k.mp((i + 1) % n) - k.mp((i + n - 1) % n));
        const Mat2 mp = k.mp(i);
        const double mp2 = mp.frob_sq();
        const double along = dot(mpp, mp) / mp2;
        const Mat2 perp = mpp - along * mp;
        max_kappa = std::max(max_kappa, perp.frob() / mp2);
    }
    double delta0 = max_kappa > 0 ? 1.0 / max_kappa : std::numeric_limits<double>::infinity();

    // chord term over pairs that double back: arc separation >= 2x chord
    // (same-branch pairs on a convex arc never exceed ratio pi/2)
    const double len = k.length();
    const double chord_term = par::pair_min(
        n,
        [&](std::size_t i, std::size_t j) {
            const double arc = std::min(std::abs(k.arclen(j) - k.arclen(i)),
                                        len - std::abs(k.arclen(j) - k.arclen(i)));
            const double chord = (k.m(i) - k.m(j)).frob();
            if (arc < 2.0 * chord) return std::numeric_limits<double>::infinity();
            return 0.5 * chord;
        },
        par::default_exec());

    return std::min(delta0, chord_term);
}

CurveReport analyze_curve(const CurveK& k, par::Exec ex) {
    CurveReport r;
    r.length = k.length();
    r.min_det_tangent = k.min_det_tangent();
    try {
        r.c_star = ellipticity_constant(k, ex);
        r.elliptic = true;
    } catch (const NotElliptic& e) {
        r.failure = "NotElliptic";
        r.witness_t_i = e.t_i;
        r.witness_t_j = e.t_j;
        r.min_rankone_ratio = rank_one_scan(k, ex);
        return r;
    }
    r.min_rankone_ratio = rank_one_scan(k, ex);
    if (!(r.min_rankone_ratio > 0)) {
        r.failure = "RankOneFound";
        return r;
    }
    try {
        const auto cd = conformal_data(k, r.c_star, ex);
        r.k_measured = cd.k_measured;
        r.k_bound = cd.k_bound;
        r.injective = true;
    } catch (const InjectivityFailure& e) {
        r.failure = "InjectivityFailure";
        r.witness_t_i = e.t_i;
        r.witness_t_j = e.t_j;
        return r;
    }
    r.reach = reach_estimate(k);
    r.pass = r.elliptic && r.injective && r.min_rankone_ratio > 0 && r.k_measured < 1.0 &&
             r.min_det_tangent > 0;
    if (!r.pass && r.failure.empty()) r.failure = "GateFailed";
    return r;
}

}  // namespace ellrig
