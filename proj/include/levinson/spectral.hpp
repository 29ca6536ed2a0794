#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/interpolators/makima.hpp>

#include "levinson/errors.hpp"
#include "levinson/numerics.hpp"
#include "levinson/potentials.hpp"
#include "levinson/smatrix.hpp"
#include "levinson/solver.hpp"

namespace levinson {

/// Relative spectral density on k >= 0: a smooth part sampled on the grid
/// plus a point mass delta_weight at k = 0.
struct SpectralDensity {
  std::vector<double> k;
  std::vector<double> rho_smooth;
  double delta_weight = 0.0;
  double b0 = 0.0;
  double moment0 = 0.0;

  double k_max() const { return k.back(); }
};

/// rho_smooth = d phi_t / dk on the curve's grid, delta_weight = pi b0.
inline SpectralDensity density_from_phase(const PhaseCurve& curve, double b0) {
  if (curve.size() < 3) throw InvalidParameter("density_from_phase: curve too short");
  if (b0 != 0.0 && b0 != -1.0) throw InvalidParameter("density_from_phase: b0 must be 0 or -1");
  SpectralDensity d;
  d.k = curve.k();
  const auto phi = curve.phi_t();
  d.rho_smooth = numerics::derivative(d.k, phi);
  d.b0 = b0;
  d.delta_weight = pi * b0;
  d.moment0 = curve.moment0;
  return d;
}

/// Box-regularised density int_{-L}^{L} (|psi_k|^2 - 1) dx from a direct
/// solution that kept its wavefunction. Inside the support the Hermite
/// interpolant is integrated with three-point Gauss rules; outside, the
/// asymptotic forms are integrated exactly.
inline double box_density(const ScatteringSolution& sol, double L) {
  const double R = sol.support_radius;
  if (!(L > R)) throw DomainError("box_density: L must exceed the support radius");
  if (!sol.has_direct) throw InvalidParameter("box_density: need a direct-channel solution");
  const double k = sol.k;
  double inner = 0.0;
  if (R > 0.0) {
    const auto& xs = sol.wavefunction.x;
    if (xs.size() < 2) throw DomainError("box_density: wavefunction was not kept");
    static constexpr double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double lo = std::max(xs[i], -R);
      const double hi = std::min(xs[i + 1], R);
      if (!(hi > lo)) continue;
      const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      for (int q = 0; q < 3; ++q) inner += gw[q] * half * std::norm(sol.psi_at(mid + half * gx[q]).first);
    }
  }
  const complex ik{0.0, k};
  // int_{-L}^{-R} |e^{ikx} + b e^{-ikx}|^2 dx
  const complex osc = (std::polar(1.0, 2.0 * k * L) - std::polar(1.0, 2.0 * k * R)) / (2.0 * ik);
  const double left = (L - R) * (1.0 + std::norm(sol.b)) + 2.0 * std::real(sol.b * osc);
  const double right = (L - R) * std::norm(sol.t);
  return inner + left + right - 2.0 * L;
}

inline double box_density(const Potential& p, double k, double L, const SolverOptions& opt = {}) {
  if (!(L > p.support_radius())) throw DomainError("box_density: L must exceed the support radius");
  SolverOptions o = opt;
  o.keep_wavefunction = true;
  return box_density(solve_direct(p, k, o), L);
}

/// Amplitudes and k-derivatives of the phases at one k, from re-solves at
/// k -/+ dk.
struct LocalPhases {
  double k = 0.0;
  complex t, b;
  double phi_t = 0.0, dphi_t = 0.0;
  double phi_r = std::numeric_limits<double>::quiet_NaN();
  double dphi_r = std::numeric_limits<double>::quiet_NaN();

  bool reflection_defined() const { return !std::isnan(phi_r); }
};

inline LocalPhases local_phases(const Potential& p, double k, const SolverOptions& opt = {}) {
  detail::check_k(k);
  SolverOptions o = opt;
  o.keep_wavefunction = false;
  const double dk = std::min(opt.tol.dk_fd, 0.25 * k);
  const auto lo = solve_direct(p, k - dk, o);
  const auto mid = solve_direct(p, k, o);
  const auto hi = solve_direct(p, k + dk, o);
  LocalPhases r;
  r.k = k;
  r.t = mid.t;
  r.b = mid.b;
  r.phi_t = std::arg(mid.t);
  r.dphi_t = (numerics::nearest_branch(std::arg(hi.t), r.phi_t) -
              numerics::nearest_branch(std::arg(lo.t), r.phi_t)) / (2.0 * dk);
  const double floor = opt.tol.phase_floor;
  if (std::abs(lo.b) > floor && std::abs(mid.b) > floor && std::abs(hi.b) > floor) {
    r.phi_r = std::arg(mid.b);
    r.dphi_r = (numerics::nearest_branch(std::arg(hi.b), r.phi_r) -
                numerics::nearest_branch(std::arg(lo.b), r.phi_r)) / (2.0 * dk);
  }
  return r;
}

/// Both sides of the finite-box identity
///   2k rho_L = 2k dphi_t + 2k |b|^2 (dphi_r - dphi_t) + 2 |b| sin(phi_r + 2kL),
/// with rho_L the box density after removing 2L.
struct FiniteLIdentity {
  double k = 0.0, L = 0.0;
  double box = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return std::abs(lhs - rhs); }
};

/// Assembles the identity from local phases and a direct solution (with
/// wavefunction) at the same k.
inline FiniteLIdentity finite_L_identity(const LocalPhases& ph, const ScatteringSolution& sol, double L) {
  if (ph.k != sol.k) throw InvalidParameter("finite_L_identity: phases and solution at different k");
  const double k = ph.k;
  FiniteLIdentity r;
  r.k = k;
  r.L = L;
  r.box = box_density(sol, L);
  r.lhs = 2.0 * k * r.box;
  r.rhs = 2.0 * k * ph.dphi_t + 2.0 * std::imag(ph.b * std::polar(1.0, 2.0 * k * L));
  if (ph.reflection_defined()) r.rhs += 2.0 * k * std::norm(ph.b) * (ph.dphi_r - ph.dphi_t);
  return r;
}

inline FiniteLIdentity finite_L_identity(const Potential& p, double k, double L,
                                         const SolverOptions& opt = {}) {
  if (!(L > p.support_radius()))
    throw DomainError("finite_L_identity: L must exceed the support radius");
  SolverOptions o = opt;
  o.keep_wavefunction = true;
  return finite_L_identity(local_phases(p, k, opt), solve_direct(p, k, o), L);
}

inline double finite_L_identity_residual(const Potential& p, double k, double L,
                                         const SolverOptions& opt = {}) {
  return finite_L_identity(p, k, L, opt).residual();
}

struct AppendixOptions {
  SolverOptions solver{};
  /// Simpson step in the scaled variable k' = 2kL
  double step = 0.05;
  /// amplitude sampling step for k above the geometric head
  double sample_dk = 0.01;
  /// absolute agreement required between step and 2*step evaluations
  double convergence = 1e-4;
};

/// Sum over both channels of int_0^{k_cut} Im[b(k) exp(2ikL)] / k dk,
/// i.e. the integral of b(k) sin(phi_r + 2kL)/k over (-k_cut, k_cut) for
/// the even extension. Tends to pi b(0) as L grows.
inline double appendix_integral(const Potential& p, double L, double k_cut,
                                const AppendixOptions& opt = {}) {
  if (!(L > 0.0) || !(k_cut > 0.0)) throw InvalidParameter("appendix_integral: L and k_cut must be positive");
  if (p.is_free()) return 0.0;
  const double span = 2.0 * L * k_cut;
  const double k_lo = std::min(1e-4, opt.step / (4.0 * L));
  const double k_head = std::min(0.05, 0.5 * k_cut);

  std::vector<double> ks = numerics::geometric_grid(k_lo, k_head, 40);
  const auto n_tail = static_cast<std::size_t>(std::ceil((k_cut - k_head) / opt.sample_dk));
  for (std::size_t i = 1; i <= n_tail; ++i)
    ks.push_back(k_head + (k_cut - k_head) * static_cast<double>(i) / static_cast<double>(n_tail));
  if (ks.back() < k_cut * 1.01) ks.push_back(k_cut * 1.01 + opt.sample_dk);

  SolverOptions so = opt.solver;
  so.keep_wavefunction = false;
  std::vector<complex> b(ks.size()), bz(ks.size());
  numerics::parallel_for(ks.size(), [&](std::size_t i) {
    const auto s = solve(p, ks[i], so);
    b[i] = s.b;
    bz[i] = s.b_z;
  });

  using Interp = boost::math::interpolators::makima<std::vector<double>>;
  auto make = [&](const std::vector<complex>& v, bool imag) {
    std::vector<double> x = ks, y(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = imag ? v[i].imag() : v[i].real();
    return Interp(std::move(x), std::move(y));
  };
  const Interp br = make(b, false), bi = make(b, true), bzr = make(bz, false), bzi = make(bz, true);

  auto integrand = [&](double kp) {
    const double k = kp / (2.0 * L);
    const complex e = std::polar(1.0, kp);
    const complex sum = complex{br(k), bi(k)} + complex{bzr(k), bzi(k)};
    return std::imag(sum * e) / kp;
  };
  auto simpson = [&](double h) {
    auto n = static_cast<std::size_t>(std::ceil(span / h));
    if (n % 2) ++n;
    const double dh = span / static_cast<double>(n);
    std::vector<double> f(n + 1);
    for (std::size_t i = 1; i <= n; ++i) f[i] = integrand(dh * static_cast<double>(i));
    const double xs[3] = {dh, 2 * dh, 3 * dh};
    const double ys[3] = {f[1], f[2], f[3]};
    f[0] = numerics::quadratic_extrapolate(xs, ys, 0.0);
    return numerics::simpson_uniform<double>(f, dh);
  };
  const double fine = simpson(opt.step);
  const double coarse = simpson(2.0 * opt.step);
  if (!(std::abs(fine - coarse) < opt.convergence))
    throw AccuracyError("appendix_integral: oscillatory quadrature did not converge",
                        std::abs(fine - coarse));
  return fine;
}

}  // namespace levinson
