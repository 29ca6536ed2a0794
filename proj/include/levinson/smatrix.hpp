#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "levinson/errors.hpp"
#include "levinson/numerics.hpp"
#include "levinson/potentials.hpp"
#include "levinson/solver.hpp"

namespace levinson {

/// Two-channel S-matrix [[t, b~], [b, t~]] at one k.
struct SMatrix {
  double k = 0.0;
  std::array<std::array<complex, 2>, 2> entries{};
  /// max_ij |(S^dagger S - 1)_ij|
  double unitarity_residual = 0.0;
  /// unitarity residual exceeded 10x the tolerance
  bool degraded = false;

  complex t() const { return entries[0][0]; }
  complex b_z() const { return entries[0][1]; }
  complex b() const { return entries[1][0]; }
  complex t_z() const { return entries[1][1]; }
  complex det() const { return entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0]; }
};

namespace detail {

inline SMatrix make_smatrix(double k, complex t, complex b, complex t_z, complex b_z,
                            const Tolerances& tol) {
  SMatrix s;
  s.k = k;
  s.entries = {{{t, b_z}, {b, t_z}}};
  double r = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      complex acc = std::conj(s.entries[0][i]) * s.entries[0][j] +
                    std::conj(s.entries[1][i]) * s.entries[1][j];
      if (i == j) acc -= 1.0;
      r = std::max(r, std::abs(acc));
    }
  s.unitarity_residual = r;
  s.degraded = r > 10.0 * tol.unitarity;
  return s;
}

}  // namespace detail

/// Builds S(k) from separately solved direct and zurdo problems.
inline SMatrix assemble(const ScatteringSolution& direct, const ScatteringSolution& zurdo,
                        const Tolerances& tol = {}) {
  if (!direct.has_direct || !zurdo.has_zurdo)
    throw InvalidParameter("assemble: need a direct and a zurdo solution");
  if (direct.k != zurdo.k) throw InvalidParameter("assemble: solutions at different k");
  return detail::make_smatrix(direct.k, direct.t, direct.b, zurdo.t_z, zurdo.b_z, tol);
}

/// Builds S(k) from a solution carrying both channels.
inline SMatrix assemble(const ScatteringSolution& both, const Tolerances& tol = {}) {
  return assemble(both, both, tol);
}

/// One k sample of a phase curve. Reflection phases are NaN where |b| is
/// below the phase floor.
struct PhasePoint {
  double k = 0.0;
  complex t, b, t_z, b_z;
  complex det;
  double phi_t = 0.0;
  double phi_r = std::numeric_limits<double>::quiet_NaN();
  double phi_r_z = std::numeric_limits<double>::quiet_NaN();
  /// unwrapped arg Det S
  double det_phase = 0.0;
  double unitarity_residual = 0.0;
  double time_reversal_residual = 0.0;
  double match_residual = 0.0;
  /// |Det S - exp(2 i phi_t)|
  double det_residual = 0.0;

  bool reflection_defined() const { return !std::isnan(phi_r); }
};

/// Unwrapped forward and reflection phases over a k grid. The absolute
/// branch is fixed at k_max by the Born estimate phi_t ~ -<u>/(2k), so
/// phi_t(infinity) = 0.
struct PhaseCurve {
  std::vector<PhasePoint> points;
  double moment0 = 0.0;
  /// -<u> / (2 k_max)
  double born_anchor = 0.0;
  /// phi_t(0+) by quadratic extrapolation of the smallest-k samples
  double phi_t_0 = 0.0;
  double phi_t_inf = 0.0;
  /// arg Det S (0+) by the same extrapolation
  double det_phase_0 = 0.0;
  /// midpoints inserted to keep adjacent phase steps small
  std::size_t refinements = 0;

  std::size_t size() const { return points.size(); }
  double k_min() const { return points.front().k; }
  double k_max() const { return points.back().k; }
  std::vector<double> k() const { return column(&PhasePoint::k); }
  std::vector<double> phi_t() const { return column(&PhasePoint::phi_t); }

  double max_unitarity_residual() const { return max_of(&PhasePoint::unitarity_residual); }
  double max_time_reversal_residual() const {
    return max_of(&PhasePoint::time_reversal_residual);
  }
  double max_det_residual() const { return max_of(&PhasePoint::det_residual); }
  double max_match_residual() const { return max_of(&PhasePoint::match_residual); }
  /// |phi_t(k_max) - born_anchor|
  double born_residual() const { return std::abs(points.back().phi_t - born_anchor); }

 private:
  std::vector<double> column(double PhasePoint::*m) const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.*m);
    return out;
  }
  double max_of(double PhasePoint::*m) const {
    double r = 0.0;
    for (const auto& p : points) r = std::max(r, p.*m);
    return r;
  }
};

struct PhaseCurveOptions {
  SolverOptions solver{};
  /// adjacent unwrapped steps above this trigger midpoint insertion
  double refine_jump = pi / 4.0;
  /// adjacent steps still above this after refinement are an unwrap failure
  double fail_jump = pi / 2.0;
  int max_refine_passes = 24;
  /// points used for the quadratic extrapolation to k = 0+
  std::size_t extrapolation_points = 5;
};

/// Default sweep: 400 geometric points from 1e-3 to 50.
inline std::vector<double> default_k_grid() { return numerics::geometric_grid(1e-3, 50.0, 400); }

namespace detail {

inline PhasePoint make_point(const ScatteringSolution& s) {
  PhasePoint p;
  p.k = s.k;
  p.t = s.t;
  p.b = s.b;
  p.t_z = s.t_z;
  p.b_z = s.b_z;
  p.det = s.t * s.t_z - s.b * s.b_z;
  p.unitarity_residual = s.unitarity_residual();
  p.time_reversal_residual = s.time_reversal_residual();
  p.match_residual = s.match_residual;
  return p;
}

inline std::vector<PhasePoint> solve_points(const Potential& pot, const std::vector<double>& ks,
                                            const SolverOptions& opt) {
  SolverOptions o = opt;
  o.keep_wavefunction = false;
  std::vector<PhasePoint> out(ks.size());
  numerics::parallel_for(ks.size(), [&](std::size_t i) { out[i] = make_point(solve(pot, ks[i], o)); });
  return out;
}

/// Nearest-branch continuity from the top of the grid downward; the top
/// value is the representative nearest to `anchor`.
template <typename RawFn>
std::vector<double> unwrap_downward(std::size_t n, RawFn raw, double anchor) {
  std::vector<double> out(n);
  out[n - 1] = numerics::nearest_branch(raw(n - 1), anchor);
  for (std::size_t i = n - 1; i-- > 0;) out[i] = numerics::nearest_branch(raw(i), out[i + 1]);
  return out;
}

inline void unwrap_reflection(std::vector<PhasePoint>& pts, double phase_floor) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bool in_run = false;
  for (std::size_t i = pts.size(); i-- > 0;) {
    auto& p = pts[i];
    const bool defined = std::abs(p.b) > phase_floor && std::abs(p.b_z) > phase_floor;
    if (!defined) {
      p.phi_r = p.phi_r_z = nan;
      in_run = false;
      continue;
    }
    const double raw = std::arg(p.b);
    const double raw_z = std::arg(p.b_z);
    if (!in_run) {
      p.phi_r = raw;
      // branch for which 2 phi_t - phi_r - phi_r~ is nearest to pi
      p.phi_r_z = numerics::nearest_branch(raw_z, 2.0 * p.phi_t - p.phi_r - pi);
      in_run = true;
    } else {
      p.phi_r = numerics::nearest_branch(raw, pts[i + 1].phi_r);
      p.phi_r_z = numerics::nearest_branch(raw_z, pts[i + 1].phi_r_z);
    }
  }
}

}  // namespace detail

/// Solves both channels at every k, refines the grid where the phase moves
/// quickly, unwraps phi_t, arg Det S and the reflection phases, and
/// extrapolates phi_t(0+).
inline PhaseCurve build_phase_curve(const Potential& pot, std::vector<double> k_grid,
                                    const PhaseCurveOptions& opt = {}) {
  if (k_grid.size() < std::max<std::size_t>(3, opt.extrapolation_points))
    throw InvalidParameter("build_phase_curve: grid too small");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (!(k_grid[i] > 0.0) || !std::isfinite(k_grid[i]))
      throw DomainError("build_phase_curve: k must be positive");
    if (i > 0 && !(k_grid[i] > k_grid[i - 1]))
      throw InvalidParameter("build_phase_curve: k grid must be strictly increasing");
  }

  PhaseCurve curve;
  curve.moment0 = pot.moment0();
  curve.born_anchor = -curve.moment0 / (2.0 * k_grid.back());
  curve.points = detail::solve_points(pot, k_grid, opt.solver);

  auto unwrap_all = [&] {
    auto& pts = curve.points;
    const auto phi = detail::unwrap_downward(
        pts.size(), [&](std::size_t i) { return std::arg(pts[i].t); }, curve.born_anchor);
    const auto det = detail::unwrap_downward(
        pts.size(), [&](std::size_t i) { return std::arg(pts[i].det); }, 2.0 * curve.born_anchor);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      pts[i].phi_t = phi[i];
      pts[i].det_phase = det[i];
    }
  };

  for (int pass = 0;; ++pass) {
    unwrap_all();
    std::vector<double> mids;
    const auto& pts = curve.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double jump = std::max(std::abs(pts[i + 1].phi_t - pts[i].phi_t),
                                   0.5 * std::abs(pts[i + 1].det_phase - pts[i].det_phase));
      const double mid = std::sqrt(pts[i].k * pts[i + 1].k);
      if (jump > opt.refine_jump && mid > pts[i].k && mid < pts[i + 1].k) mids.push_back(mid);
    }
    if (mids.empty()) break;
    if (pass >= opt.max_refine_passes) {
      double worst = 0.0;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        worst = std::max(worst, std::abs(pts[i + 1].phi_t - pts[i].phi_t));
      if (worst > opt.fail_jump)
        throw UnwrapFailure("forward phase jumps by " + std::to_string(worst) +
                            " rad between adjacent k after maximal refinement");
      break;
    }
    auto extra = detail::solve_points(pot, mids, opt.solver);
    curve.refinements += extra.size();
    curve.points.insert(curve.points.end(), extra.begin(), extra.end());
    std::sort(curve.points.begin(), curve.points.end(),
              [](const PhasePoint& a, const PhasePoint& b) { return a.k < b.k; });
  }

  for (auto& p : curve.points) p.det_residual = std::abs(p.det - std::polar(1.0, 2.0 * p.phi_t));
  detail::unwrap_reflection(curve.points, opt.solver.tol.phase_floor);

  const std::size_t m = std::min(opt.extrapolation_points, curve.points.size());
  std::vector<double> ks, phis, dets;
  for (std::size_t i = 0; i < m; ++i) {
    ks.push_back(curve.points[i].k);
    phis.push_back(curve.points[i].phi_t);
    dets.push_back(curve.points[i].det_phase);
  }
  curve.phi_t_0 = numerics::quadratic_extrapolate(ks, phis, 0.0);
  curve.det_phase_0 = numerics::quadratic_extrapolate(ks, dets, 0.0);
  curve.phi_t_inf = 0.0;
  return curve;
}

inline PhaseCurve build_phase_curve(const Potential& pot, const PhaseCurveOptions& opt = {}) {
  return build_phase_curve(pot, default_k_grid(), opt);
}

/// Winding of s(k) = Det S(k) over k in (0, infinity), divided by 2 pi:
/// (arg s(0+) - arg s(infinity)) / (2 pi), with arg s(infinity) = 0 fixed
/// by the Born anchor. Equals N + b(0)/2.
inline double det_winding(const PhaseCurve& curve) {
  if (curve.points.empty()) throw InvalidParameter("det_winding: empty phase curve");
  return curve.det_phase_0 / two_pi;
}

}  // namespace levinson
