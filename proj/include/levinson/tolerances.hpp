#pragma once

namespace levinson {

/// Numerical thresholds shared by every stage of the pipeline. Reports carry a
/// copy of the instance they were computed with.
struct Tolerances {
  /// |u| below this value counts as the asymptotic (free) region.
  double support_eps = 1e-10;
  /// |1 - (|t|^2 + |b|^2)|
  double unitarity = 1e-6;
  /// |t - t~|
  double time_reversal = 1e-6;
  /// relative deviation from the fitted free wave inside a matching window
  double match = 1e-5;
  /// reflection phases are undefined for |b| below this floor
  double phase_floor = 1e-4;
  /// distance of the Levinson count from the nearest integer
  double round = 0.05;
  /// relative deviation of phi_t(k_max) from the Born estimate
  double born = 0.2;
  /// |Det S - exp(2 i phi_t)|
  double determinant = 1e-5;
  /// |LHS - RHS| of the finite-box density identity
  double identity = 1e-2;
  /// k step for derivatives taken by re-solving at k +/- dk
  double dk_fd = 1e-4;
  /// relative tolerance for adaptive quadrature of moment integrals
  double quadrature = 1e-11;

  /// Uniformly scales the pass/fail thresholds (not the construction
  /// parameters support_eps, dk_fd and quadrature).
  Tolerances scaled(double factor) const {
    Tolerances t = *this;
    t.unitarity *= factor;
    t.time_reversal *= factor;
    t.match *= factor;
    t.round *= factor;
    t.born *= factor;
    t.determinant *= factor;
    t.identity *= factor;
    return t;
  }
};

}  // namespace levinson
