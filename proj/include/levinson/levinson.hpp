#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "levinson/errors.hpp"
#include "levinson/numerics.hpp"
#include "levinson/potentials.hpp"
#include "levinson/smatrix.hpp"
#include "levinson/solver.hpp"
#include "levinson/spectral.hpp"

namespace levinson {

/// Outcome of the low-k reflection probe.
struct Classification {
  /// -1 (generic) or 0 (critical)
  double b0 = 0.0;
  bool resonance = true;
  double extrapolated_abs_b = 0.0;
  std::vector<double> probe_k;
  std::vector<double> probe_abs_b;
  /// arg b at the smallest probe k (NaN when |b| is below the phase floor)
  double arg_b_min = std::numeric_limits<double>::quiet_NaN();
};

/// Five geometric points from 1e-2 down to 1e-4.
inline std::vector<double> default_probe_grid() {
  auto g = numerics::geometric_grid(1e-4, 1e-2, 5);
  std::reverse(g.begin(), g.end());
  return g;
}

/// Decides between b(0) = -1 and b(0) = 0 from a quadratic fit of |b(k)|.
inline Classification classify_b0(const Potential& p, std::vector<double> probe = default_probe_grid(),
                                  const SolverOptions& opt = {}) {
  if (probe.size() < 3) throw InvalidParameter("classify_b0: need at least three probe points");
  for (std::size_t i = 0; i < probe.size(); ++i) {
    if (!(probe[i] > 0.0)) throw DomainError("classify_b0: probe k must be positive");
    if (i > 0 && !(probe[i] < probe[i - 1]))
      throw InvalidParameter("classify_b0: probe grid must decrease toward 0");
  }
  Classification c;
  c.probe_k = probe;
  if (p.is_free()) {
    c.probe_abs_b.assign(probe.size(), 0.0);
    return c;
  }
  SolverOptions o = opt;
  o.keep_wavefunction = false;
  std::vector<complex> b(probe.size());
  numerics::parallel_for(probe.size(), [&](std::size_t i) { b[i] = solve_direct(p, probe[i], o).b; });
  for (const auto& v : b) c.probe_abs_b.push_back(std::abs(v));
  c.extrapolated_abs_b = numerics::quadratic_extrapolate(c.probe_k, c.probe_abs_b, 0.0);
  if (std::abs(b.back()) > opt.tol.phase_floor) c.arg_b_min = std::arg(b.back());

  const double e = c.extrapolated_abs_b;
  if (e >= 0.35 && e <= 0.65)
    throw AmbiguousClassification("classify_b0: |b(0+)| extrapolates to " + std::to_string(e) +
                                      " (near-critical potential; refine the probe grid)",
                                  e);
  if (e > 0.5) {
    if (std::isnan(c.arg_b_min) || std::abs(numerics::wrap_angle(c.arg_b_min - pi)) > pi / 4)
      throw AmbiguousClassification("classify_b0: |b| -> 1 but arg b does not approach pi", e);
    c.b0 = -1.0;
    c.resonance = false;
  }
  return c;
}

struct OracleOptions {
  /// initial lattice spacing (further capped by 0.1/sqrt(max|u|))
  double step = 1e-2;
  /// Dirichlet walls at +/-(support_radius + margin)
  double margin = 600.0;
  /// halvings of the step before giving up on a stable count
  int max_halvings = 4;
  /// eigenvalues within this distance of 0 raise the near-threshold flag
  double threshold_band = 1e-8;
};

struct BoundStateCount {
  int count = 0;
  /// nodes of the zero-energy solution in the box
  int node_count = 0;
  bool near_threshold = false;
  double step = 0.0;
  double box_half_width = 0.0;
};

namespace detail {

/// Number of eigenvalues below sigma of tridiag(-1/h^2, 2/h^2 + u_i, -1/h^2),
/// from the signs of the LDL^T pivots.
inline int sturm_count(const std::vector<double>& diag, double h, double sigma) {
  const double off2 = 1.0 / (h * h * h * h);
  int neg = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    q = diag[i] - sigma - (i ? off2 / q : 0.0);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++neg;
  }
  return neg;
}

/// Cell averages of u around interior nodes x_i = -B + i h, with the cell
/// split at discontinuities of u.
inline std::vector<double> cell_averages(const Potential& p, double B, double h, std::size_t n) {
  static constexpr double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const auto& bp = p.breakpoints();
  const double R = p.support_radius();
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -B + static_cast<double>(i + 1) * h;
    const double lo = x - 0.5 * h, hi = x + 0.5 * h;
    if (hi < -R || lo > R) continue;
    double cuts[8];
    int m = 0;
    cuts[m++] = lo;
    for (auto it = std::upper_bound(bp.begin(), bp.end(), lo); it != bp.end() && *it < hi && m < 7; ++it)
      cuts[m++] = *it;
    cuts[m++] = hi;
    double acc = 0.0;
    for (int s = 0; s + 1 < m; ++s) {
      const double a = cuts[s], b = cuts[s + 1];
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int q = 0; q < 3; ++q) acc += gw[q] * half * p.smooth_value_inside(mid + half * gx[q], a, b);
    }
    u[i] = acc / h;
  }
  return u;
}

inline int fd_count(const Potential& p, double B, double h, double sigma) {
  const auto n = static_cast<std::size_t>(std::llround(2.0 * B / h)) - 1;
  auto diag = cell_averages(p, B, h, n);
  for (auto& d : diag) d += 2.0 / (h * h);
  return sturm_count(diag, h, sigma);
}

}  // namespace detail

/// Sign changes of the zero-energy solution with psi(-B) = 0 inside
/// (-B, B). By Sturm oscillation this equals the number of negative
/// Dirichlet eigenvalues on the box. Handles delta terms by their jump.
inline int count_zero_energy_nodes(const Potential& p, double B, double max_step = 1e-2) {
  const double R = p.support_radius();
  if (!(B > R)) throw DomainError("count_zero_energy_nodes: box must contain the support");
  double psi = B - R, dpsi = 1.0;
  if (p.is_free()) return 0;
  int nodes = 0;
  std::vector<double> cuts{-R};
  for (double b : p.breakpoints())
    if (b > -R && b < R) cuts.push_back(b);
  for (const auto& d : p.point_interactions())
    if (d.first > -R && d.first < R) cuts.push_back(d.first);
  cuts.push_back(R);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const auto deltas = p.point_interactions();

  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s], hi = cuts[s + 1];
    for (const auto& d : deltas)
      if (d.first == lo) dpsi += d.second * psi;
    const double umax = p.max_abs_on(lo, hi);
    double h = max_step;
    if (umax > 0.0) h = std::min(h, 0.05 / std::sqrt(umax));
    const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / h));
    h = (hi - lo) / static_cast<double>(steps);
    auto u = [&](double x) { return p.smooth_value_inside(x, lo, hi); };
    for (std::size_t i = 0; i < steps; ++i) {
      const double x = lo + h * static_cast<double>(i);
      const double k1p = dpsi, k1d = u(x) * psi;
      const double k2p = dpsi + 0.5 * h * k1d, k2d = u(x + 0.5 * h) * (psi + 0.5 * h * k1p);
      const double k3p = dpsi + 0.5 * h * k2d, k3d = u(x + 0.5 * h) * (psi + 0.5 * h * k2p);
      const double k4p = dpsi + h * k3d, k4d = u(x + h) * (psi + h * k3p);
      const double np = psi + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
      const double nd = dpsi + h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
      if ((np < 0.0) != (psi < 0.0) && np != 0.0) ++nodes;
      psi = np;
      dpsi = nd;
      // keep magnitudes bounded through long barriers
      const double mag = std::abs(psi) + std::abs(dpsi);
      if (mag > 1e100) {
        psi /= mag;
        dpsi /= mag;
      }
    }
  }
  for (const auto& d : deltas)
    if (d.first == cuts.back()) dpsi += d.second * psi;
  if (dpsi != 0.0) {
    const double x0 = R - psi / dpsi;
    if (x0 > R && x0 < B) ++nodes;
  }
  return nodes;
}

/// Bound states of -d^2/dx^2 + u from the three-point finite-difference
/// Hamiltonian on a Dirichlet box, counted with Sturm sequences. The count
/// must be stable when the spacing is halved and agree with the node count
/// of the zero-energy solution.
inline BoundStateCount count_bound_states_oracle(const Potential& p, const OracleOptions& opt = {}) {
  if (p.is_delta())
    throw InvalidParameter("count_bound_states_oracle: delta kind is counted in closed form");
  BoundStateCount r;
  r.box_half_width = p.support_radius() + opt.margin;
  if (p.is_free()) return r;
  const double B = r.box_half_width;
  const double R = p.support_radius();
  const double umax = p.max_abs_on(-R, R);
  double h = opt.step;
  if (umax > 0.0) h = std::min(h, 0.1 / std::sqrt(umax));
  int prev = detail::fd_count(p, B, h, 0.0);
  bool stable = false;
  for (int i = 0; i < opt.max_halvings; ++i) {
    const int next = detail::fd_count(p, B, 0.5 * h, 0.0);
    h *= 0.5;
    if (next == prev) {
      stable = true;
      break;
    }
    prev = next;
  }
  if (!stable) throw ResolutionError("count_bound_states_oracle: count not stable under refinement");
  r.count = prev;
  r.step = h;
  r.near_threshold = detail::fd_count(p, B, h, -opt.threshold_band) !=
                     detail::fd_count(p, B, h, opt.threshold_band);
  r.node_count = count_zero_energy_nodes(p, B, std::min(h, 1e-2));
  if (r.node_count != r.count)
    throw ResolutionError("count_bound_states_oracle: lattice count " + std::to_string(r.count) +
                          " disagrees with zero-energy node count " + std::to_string(r.node_count));
  return r;
}

/// -2 pi N recovered from the density: twice the k >= 0 integral of the
/// smooth part (with a constant head below k_min and the Born tail beyond
/// k_max) plus the point mass at k = 0.
inline double sum_rule_integral(const SpectralDensity& d) {
  if (d.k.size() < 2) throw InvalidParameter("sum_rule_integral: density too short");
  const double body = numerics::trapezoid(d.k, d.rho_smooth);
  const double head = d.rho_smooth.front() * d.k.front();
  const double tail = d.moment0 / (2.0 * d.k.back());
  return 2.0 * (body + head + tail) + d.delta_weight;
}

struct LevinsonOptions {
  PhaseCurveOptions curve{};
  std::vector<double> k_grid = default_k_grid();
  std::vector<double> probe_grid = default_probe_grid();
  OracleOptions oracle{};
};

struct LevinsonReport {
  std::string potential;
  double moment0 = 0.0;
  double phi_t_0 = 0.0;
  double phi_t_inf = 0.0;
  /// phi_t(0) - phi_t(infinity)
  double delta_phi = 0.0;
  double b0 = 0.0;
  bool resonance = true;
  double extrapolated_abs_b = 0.0;
  /// delta_phi / pi - b0 / 2
  double n_levinson = 0.0;
  int n_oracle = 0;
  /// "closed-form" for the delta kind, "lattice" otherwise
  std::string oracle_method;
  /// lattice count of the narrow-well surrogate (delta kind only)
  std::optional<int> n_surrogate;
  bool near_threshold = false;
  double det_winding = 0.0;
  double sum_rule = 0.0;
  bool pass = false;

  // provenance
  std::size_t n_k = 0;
  double k_min = 0.0, k_max = 0.0;
  std::size_t refinements = 0;
  double born_anchor = 0.0;
  double phi_t_k_max = 0.0;
  double max_unitarity_residual = 0.0;
  double max_time_reversal_residual = 0.0;
  double max_det_residual = 0.0;
  double max_match_residual = 0.0;
  double oracle_step = 0.0;
  double oracle_box = 0.0;
  Tolerances tol{};

  double distance() const { return std::abs(n_levinson - n_oracle); }
  double integer_distance() const { return std::abs(n_levinson - std::round(n_levinson)); }
  std::string verdict() const { return pass ? "pass" : "fail"; }
};

/// Phase drop, b(0) classification and an independent bound-state count,
/// combined into the Levinson sum rule check. `curve` must belong to p.
inline LevinsonReport levinson_verdict(const Potential& p, const PhaseCurve& curve,
                                       const LevinsonOptions& opt = {}) {
  const auto& tol = opt.curve.solver.tol;
  LevinsonReport r;
  r.potential = p.name();
  r.tol = tol;
  r.moment0 = p.moment0();

  const auto cls = classify_b0(p, opt.probe_grid, opt.curve.solver);

  r.phi_t_0 = curve.phi_t_0;
  r.phi_t_inf = curve.phi_t_inf;
  r.delta_phi = r.phi_t_0 - r.phi_t_inf;
  r.b0 = cls.b0;
  r.resonance = cls.resonance;
  r.extrapolated_abs_b = cls.extrapolated_abs_b;
  r.n_levinson = r.delta_phi / pi - r.b0 / 2.0;
  r.det_winding = det_winding(curve);
  r.sum_rule = sum_rule_integral(density_from_phase(curve, r.b0));

  if (const auto g = p.delta_coupling()) {
    r.n_oracle = *g < 0.0 ? 1 : 0;
    r.oracle_method = "closed-form";
    const auto s = count_bound_states_oracle(make_delta_surrogate(*g), opt.oracle);
    r.n_surrogate = s.count;
    r.oracle_step = s.step;
    r.oracle_box = s.box_half_width;
  } else {
    const auto s = count_bound_states_oracle(p, opt.oracle);
    r.n_oracle = s.count;
    r.oracle_method = "lattice";
    r.near_threshold = s.near_threshold;
    r.oracle_step = s.step;
    r.oracle_box = s.box_half_width;
  }

  r.n_k = curve.size();
  r.k_min = curve.k_min();
  r.k_max = curve.k_max();
  r.refinements = curve.refinements;
  r.born_anchor = curve.born_anchor;
  r.phi_t_k_max = curve.points.back().phi_t;
  r.max_unitarity_residual = curve.max_unitarity_residual();
  r.max_time_reversal_residual = curve.max_time_reversal_residual();
  r.max_det_residual = curve.max_det_residual();
  r.max_match_residual = curve.max_match_residual();

  r.pass = std::lround(r.n_levinson) == r.n_oracle && r.integer_distance() < tol.round &&
           (!r.n_surrogate || *r.n_surrogate == r.n_oracle);
  return r;
}

/// Builds the phase curve on opt.k_grid and runs the check.
inline LevinsonReport levinson_verdict(const Potential& p, const LevinsonOptions& opt = {}) {
  return levinson_verdict(p, build_phase_curve(p, opt.k_grid, opt.curve), opt);
}

}  // namespace levinson
