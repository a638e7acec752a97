#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ellrig {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input (bad CSV, bad flags, non-closed sample table).
struct ValidationError : Error {
    using Error::Error;
};

/// A sample pair (or tangent) with det(M - M') <= 0; carries the witness.
struct NotElliptic : Error {
    NotElliptic(const std::string& msg, double ti, double tj, double det)
        : Error(msg), t_i(ti), t_j(tj), det_value(det) {}
    double t_i, t_j, det_value;
};

struct RankOneFound : Error {
    RankOneFound(const std::string& msg, double ti, double tj, double r)
        : Error(msg), t_i(ti), t_j(tj), ratio(r) {}
    double t_i, t_j, ratio;
};

/// Two distinct curve points with the same conformal projection.
struct InjectivityFailure : Error {
    InjectivityFailure(const std::string& msg, double ti, double tj)
        : Error(msg), t_i(ti), t_j(tj) {}
    double t_i, t_j;
};

struct DegenerateTangent : Error {
    using Error::Error;
};

/// Componentwise extension cannot certify a contraction (k too large).
struct ExtensionObstruction : Error {
    using Error::Error;
};

struct ExtensionFailed : Error {
    using Error::Error;
};

/// Fixed-point iteration failed its predicted budget; the Lipschitz
/// certificate of the extension is wrong.
struct ContractionViolation : Error {
    using Error::Error;
};

struct MonotonicityFailed : Error {
    MonotonicityFailed(const std::string& msg, double quot) : Error(msg), quotient(quot) {}
    double quotient;
};

struct SolverStalled : Error {
    using Error::Error;
};

struct ParameterExcluded : Error {
    using Error::Error;
};

struct RhoConstructionFailed : Error {
    using Error::Error;
};

/// 3x3 curve tangent dropped below rank 2 at the witness angle.
struct EllipticityFailed : Error {
    EllipticityFailed(const std::string& msg, double th) : Error(msg), theta(th) {}
    double theta;
};

}  // namespace ellrig
