#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "levinson/errors.hpp"
#include "levinson/numerics.hpp"
#include "levinson/potentials.hpp"
#include "levinson/tolerances.hpp"

namespace levinson {

struct SolverOptions {
  /// step <= wavelength / steps_per_wavelength
  int steps_per_wavelength = 40;
  /// absolute cap on the step, in position units
  double max_step = 1e-2;
  /// step <= strength_step / sqrt(max |u|) on each smooth segment
  double strength_step = 0.05;
  /// below low_k both caps shrink by (k / low_k)^(1/4)
  double low_k = 0.1;
  /// matching window length: this many wavelengths, but at most max_window
  double window_wavelengths = 2.0;
  double max_window = 2.0;
  /// keep the sampled direct-channel wavefunction in the result
  bool keep_wavefunction = true;
  Tolerances tol{};
};

/// Sampled complex wavefunction with its derivative on the integration nodes.
struct Wavefunction {
  std::vector<double> x;
  std::vector<complex> psi;
  std::vector<complex> dpsi;
};

/// Per-k scattering data for both channels:
///   direct: exp(ikx) + b exp(-ikx) (x << 0),  t exp(ikx) (x >> 0)
///   zurdo:  exp(-ikx) + b_z exp(ikx) (x >> 0), t_z exp(-ikx) (x << 0)
struct ScatteringSolution {
  double k = 0.0;
  complex t{1.0, 0.0};
  complex b{0.0, 0.0};
  complex t_z{1.0, 0.0};
  complex b_z{0.0, 0.0};
  bool has_direct = false;
  bool has_zurdo = false;
  /// max relative deviation from the fitted free wave in the matching windows
  double match_residual = 0.0;
  double support_radius = 0.0;
  /// direct channel, normalised to unit incident amplitude
  Wavefunction wavefunction;

  double unitarity_residual() const {
    double r = 0.0;
    if (has_direct) r = std::max(r, std::abs(1.0 - (std::norm(t) + std::norm(b))));
    if (has_zurdo) r = std::max(r, std::abs(1.0 - (std::norm(t_z) + std::norm(b_z))));
    return r;
  }
  double time_reversal_residual() const { return std::abs(t - t_z); }

  /// Direct-channel psi(x) and psi'(x): asymptotic forms for |x| >= support
  /// radius, cubic Hermite interpolation between nodes inside.
  std::pair<complex, complex> psi_at(double x) const {
    const complex ik{0.0, k};
    const complex e = std::polar(1.0, k * x);
    if (x <= -support_radius) {
      const complex ie = std::conj(e);
      return {e + b * ie, ik * (e - b * ie)};
    }
    if (x >= support_radius) return {t * e, ik * t * e};
    const auto& xs = wavefunction.x;
    if (xs.size() < 2) throw DomainError("psi_at: wavefunction was not kept");
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t j = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        it - xs.begin(), 1, static_cast<std::ptrdiff_t>(xs.size()) - 1));
    const double x0 = xs[j - 1];
    const double h = xs[j] - x0;
    const double s = (x - x0) / h;
    const complex p0 = wavefunction.psi[j - 1], p1 = wavefunction.psi[j];
    const complex m0 = wavefunction.dpsi[j - 1] * h, m1 = wavefunction.dpsi[j] * h;
    const double s2 = s * s, s3 = s2 * s;
    const complex val = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 +
                        (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
    const complex der = ((6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 +
                         (-6 * s2 + 6 * s) * p1 + (3 * s2 - 2 * s) * m1) /
                        h;
    return {val, der};
  }
};

namespace detail {

struct Segment {
  double lo;
  double hi;
  std::size_t first_node;  // index of the node at `lo`
  std::size_t steps;
};

/// Integration nodes on [-X, X]: piecewise uniform, with nodes at every
/// breakpoint of u, at +/-support radius and at the origin.
struct Grid {
  std::vector<double> x;
  std::vector<Segment> segments;
  double support = 0.0;
  double half_width = 0.0;
};

inline double low_k_factor(double k, const SolverOptions& opt) {
  return k < opt.low_k ? std::sqrt(std::sqrt(k / opt.low_k)) : 1.0;
}

inline double base_step(double k, const SolverOptions& opt) {
  return std::min(two_pi / (opt.steps_per_wavelength * k), opt.max_step * low_k_factor(k, opt));
}

inline double window_length(double k, const SolverOptions& opt) {
  return std::min(opt.window_wavelengths * two_pi / k, opt.max_window);
}

inline Grid make_grid(const Potential& p, double k, const SolverOptions& opt) {
  Grid g;
  g.support = p.support_radius();
  g.half_width = g.support + window_length(k, opt);
  std::vector<double> cuts{-g.half_width, 0.0, g.half_width};
  if (g.support > 0.0) {
    cuts.push_back(-g.support);
    cuts.push_back(g.support);
  }
  for (double b : p.breakpoints())
    if (b > -g.half_width && b < g.half_width) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             cuts.end());
  const double h0 = base_step(k, opt);
  g.x.push_back(cuts.front());
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double lo = cuts[i - 1], hi = cuts[i];
    double h = h0;
    const double umax = p.max_abs_on(lo, hi);
    if (umax > 0.0) h = std::min(h, opt.strength_step * low_k_factor(k, opt) / std::sqrt(umax));
    std::size_t n = static_cast<std::size_t>(std::ceil((hi - lo) / h));
    n = std::max<std::size_t>(2, n + (n % 2));  // even, for Simpson
    g.segments.push_back({lo, hi, g.x.size() - 1, n});
    for (std::size_t j = 1; j < n; ++j)
      g.x.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n));
    g.x.push_back(hi);
  }
  return g;
}

/// Coefficients of psi = A exp(ikx) + B exp(-ikx) under the constraint
/// A' exp(ikx) + B' exp(-ikx) = 0. Free propagation leaves (A, B) constant.
struct Amplitude {
  complex a;
  complex b;
};

inline Amplitude rhs(double x, const Amplitude& y, double u, double k) {
  const complex e = std::polar(1.0, k * x);
  const complex ie = std::conj(e);
  const complex psi = y.a * e + y.b * ie;
  const complex c = u * psi / complex{0.0, 2.0 * k};
  return {c * ie, -c * e};
}

/// Integrates the amplitude equations over the grid from one end to the
/// other, seeded with `seed` at the starting end. Returns (A, B) at every node.
inline std::vector<Amplitude> integrate(const Potential& p, double k, const Grid& g,
                                        Amplitude seed, bool leftward) {
  const std::size_t n = g.x.size();
  std::vector<Amplitude> out(n);
  const auto deltas = p.point_interactions();
  auto apply_jump = [&](double x, Amplitude& y, double sign) {
    for (const auto& [x0, gc] : deltas) {
      if (std::abs(x - x0) > 1e-14) continue;
      // psi'(x0+) - psi'(x0-) = g psi(x0)
      const complex e = std::polar(1.0, k * x0);
      const complex psi = y.a * e + y.b * std::conj(e);
      const complex c = sign * gc * psi / complex{0.0, 2.0 * k};
      y.a += c * std::conj(e);
      y.b -= c * e;
    }
  };
  auto step = [&](const Segment& s, double x, double h, Amplitude y) {
    auto u_at = [&](double xx) { return p.smooth_value_inside(xx, s.lo, s.hi); };
    const double um = u_at(x + 0.5 * h);
    const Amplitude k1 = rhs(x, y, u_at(x), k);
    const Amplitude k2 = rhs(x + 0.5 * h, {y.a + 0.5 * h * k1.a, y.b + 0.5 * h * k1.b}, um, k);
    const Amplitude k3 = rhs(x + 0.5 * h, {y.a + 0.5 * h * k2.a, y.b + 0.5 * h * k2.b}, um, k);
    const Amplitude k4 = rhs(x + h, {y.a + h * k3.a, y.b + h * k3.b}, u_at(x + h), k);
    y.a += (h / 6.0) * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
    y.b += (h / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    return y;
  };

  Amplitude y = seed;
  if (leftward) {
    out[n - 1] = y;
    for (std::size_t si = g.segments.size(); si-- > 0;) {
      const Segment& s = g.segments[si];
      apply_jump(s.hi, y, -1.0);
      if (si + 1 == g.segments.size()) out[n - 1] = y;
      for (std::size_t j = s.steps; j-- > 0;) {
        const std::size_t i = s.first_node + j;
        y = step(s, g.x[i + 1], g.x[i] - g.x[i + 1], y);
        out[i] = y;
      }
    }
  } else {
    out[0] = y;
    for (std::size_t si = 0; si < g.segments.size(); ++si) {
      const Segment& s = g.segments[si];
      apply_jump(s.lo, y, +1.0);
      if (si == 0) out[0] = y;
      for (std::size_t j = 0; j < s.steps; ++j) {
        const std::size_t i = s.first_node + j;
        y = step(s, g.x[i], g.x[i + 1] - g.x[i], y);
        out[i + 1] = y;
      }
    }
  }
  return out;
}

struct WindowFit {
  complex a;
  complex b;
  double residual;  // max |psi - fit| relative to `scale`
};

/// Least-squares fit of (psi, psi'/(ik)) to alpha exp(ikx)(1, 1) +
/// beta exp(-ikx)(1, -1) over the nodes with x in [lo, hi], excluding the
/// node on the support boundary (a point interaction may sit there). The two
/// columns are orthogonal at every node, so the solution is the mean of (A, B).
inline WindowFit fit_window(const Grid& g, const std::vector<Amplitude>& amp, double k,
                            double lo, double hi) {
  auto in_window = [&](double x) {
    const double inner = std::abs(lo) < std::abs(hi) ? lo : hi;
    if (std::abs(x - inner) < 1e-12) return false;
    return x >= lo - 1e-12 && x <= hi + 1e-12;
  };
  complex sa{}, sb{};
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    if (!in_window(g.x[i])) continue;
    sa += amp[i].a;
    sb += amp[i].b;
    ++count;
  }
  if (count == 0) throw DomainError("matching window contains no nodes");
  WindowFit f{sa / static_cast<double>(count), sb / static_cast<double>(count), 0.0};
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    if (!in_window(g.x[i])) continue;
    const complex e = std::polar(1.0, k * g.x[i]);
    const complex dev = (amp[i].a - f.a) * e + (amp[i].b - f.b) * std::conj(e);
    f.residual = std::max(f.residual, std::abs(dev));
  }
  return f;
}

inline void check_k(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("solver: k must be positive and finite");
}

/// Direct channel: seed the pure outgoing wave exp(ikx) at +X, integrate
/// leftward, fit the left window. Fills t, b and the wavefunction.
inline void run_direct(const Potential& p, double k, const Grid& g, const SolverOptions& opt,
                       ScatteringSolution& sol) {
  const auto amp = integrate(p, k, g, {complex{1.0, 0.0}, complex{0.0, 0.0}}, true);
  const auto left = fit_window(g, amp, k, -g.half_width, -g.support);
  const auto right = fit_window(g, amp, k, g.support, g.half_width);
  const double scale = std::abs(left.a);
  const double residual =
      std::max(left.residual / scale,
               std::abs(right.a - 1.0) + std::abs(right.b) + right.residual);
  sol.t = 1.0 / left.a;
  sol.b = left.b / left.a;
  sol.has_direct = true;
  sol.match_residual = std::max(sol.match_residual, residual);
  if (opt.keep_wavefunction) {
    const complex norm = sol.t;
    const complex ik{0.0, k};
    auto& wf = sol.wavefunction;
    wf.x = g.x;
    wf.psi.resize(g.x.size());
    wf.dpsi.resize(g.x.size());
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const complex e = std::polar(1.0, k * g.x[i]);
      const complex ie = std::conj(e);
      wf.psi[i] = norm * (amp[i].a * e + amp[i].b * ie);
      wf.dpsi[i] = norm * ik * (amp[i].a * e - amp[i].b * ie);
    }
  }
  if (!(residual < opt.tol.match)) throw MatchingFailure("direct channel", k, residual);
}

/// Zurdo channel: mirror image, seed exp(-ikx) at -X and integrate rightward.
inline void run_zurdo(const Potential& p, double k, const Grid& g, const SolverOptions& opt,
                      ScatteringSolution& sol) {
  const auto amp = integrate(p, k, g, {complex{0.0, 0.0}, complex{1.0, 0.0}}, false);
  const auto right = fit_window(g, amp, k, g.support, g.half_width);
  const auto left = fit_window(g, amp, k, -g.half_width, -g.support);
  const double scale = std::abs(right.b);
  const double residual =
      std::max(right.residual / scale,
               std::abs(left.b - 1.0) + std::abs(left.a) + left.residual);
  sol.t_z = 1.0 / right.b;
  sol.b_z = right.a / right.b;
  sol.has_zurdo = true;
  sol.match_residual = std::max(sol.match_residual, residual);
  if (!(residual < opt.tol.match)) throw MatchingFailure("zurdo channel", k, residual);
}

}  // namespace detail

/// Left-incident scattering at wavenumber k > 0.
inline ScatteringSolution solve_direct(const Potential& p, double k,
                                       const SolverOptions& opt = {}) {
  detail::check_k(k);
  ScatteringSolution sol;
  sol.k = k;
  sol.support_radius = p.support_radius();
  const auto grid = detail::make_grid(p, k, opt);
  detail::run_direct(p, k, grid, opt, sol);
  return sol;
}

/// Right-incident scattering at wavenumber k > 0.
inline ScatteringSolution solve_zurdo(const Potential& p, double k,
                                      const SolverOptions& opt = {}) {
  detail::check_k(k);
  ScatteringSolution sol;
  sol.k = k;
  sol.support_radius = p.support_radius();
  const auto grid = detail::make_grid(p, k, opt);
  detail::run_zurdo(p, k, grid, opt, sol);
  return sol;
}

/// Both channels on a shared grid.
inline ScatteringSolution solve(const Potential& p, double k, const SolverOptions& opt = {}) {
  detail::check_k(k);
  ScatteringSolution sol;
  sol.k = k;
  sol.support_radius = p.support_radius();
  const auto grid = detail::make_grid(p, k, opt);
  detail::run_direct(p, k, grid, opt, sol);
  detail::run_zurdo(p, k, grid, opt, sol);
  return sol;
}

/// Direct-channel wavefunction with unit incident amplitude on the
/// integration nodes.
inline Wavefunction solve_wavefunction(const Potential& p, double k,
                                       const SolverOptions& opt = {}) {
  SolverOptions o = opt;
  o.keep_wavefunction = true;
  return solve_direct(p, k, o).wavefunction;
}

}  // namespace levinson
