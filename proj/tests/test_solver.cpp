#include <cmath>
#include <vector>

#include <catch_amalgamated.hpp>

#include "levinson/potentials.hpp"
#include "levinson/solver.hpp"

using namespace levinson;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Potential asym() { return make_composite({Gaussian{-3.0, -1.0, 0.5}, Gaussian{-1.5, 1.5, 0.8}}); }

// Sum of the four phases entering the two-channel unitarity relation,
// reduced mod 2 pi.
double phase_relation(const ScatteringSolution& s) {
  const double v = std::arg(s.t) + std::arg(s.t_z) - pi - std::arg(s.b) - std::arg(s.b_z);
  return std::abs(numerics::wrap_angle(v));
}

}  // namespace

TEST_CASE("reflectionless well transmits with t(1) = i", "[solver]") {
  const auto s = solve_direct(make_poschl_teller(1), 1.0);
  CHECK(std::abs(s.t - complex(0.0, 1.0)) < 1e-6);
  CHECK(std::abs(s.b) < 1e-6);
  CHECK(s.match_residual < Tolerances{}.match);
}

TEST_CASE("reflectionless well matches the closed form over the k range", "[solver]") {
  const auto p = make_poschl_teller(1);
  for (double k : numerics::geometric_grid(1e-3, 50.0, 25)) {
    const auto s = solve(p, k);
    const auto cf = *closed_form_amplitudes(p, k);
    INFO("k = " << k);
    CHECK(std::abs(s.t - cf.t) < 1e-6);
    CHECK(std::abs(s.b) < 1e-6);
    CHECK(std::abs(s.t_z - cf.t) < 1e-6);
  }
}

TEST_CASE("free propagation is exact", "[solver]") {
  const auto s = solve(make_free(), 0.7);
  CHECK(s.t == complex(1.0, 0.0));
  CHECK(s.b == complex(0.0, 0.0));
  CHECK(s.t_z == complex(1.0, 0.0));
  CHECK(s.b_z == complex(0.0, 0.0));
  const auto w = solve_wavefunction(make_free(), 0.7);
  for (std::size_t i = 0; i < w.x.size(); ++i) CHECK(std::abs(w.psi[i] - std::polar(1.0, 0.7 * w.x[i])) < 1e-14);
}

TEST_CASE("unitarity of the square well", "[solver]") {
  const auto s = solve(make_square_well(-1.0, 1.0), 2.0);
  CHECK(std::abs(1.0 - std::norm(s.t) - std::norm(s.b)) < 1e-8);
  CHECK(std::abs(std::abs(s.b) - std::abs(s.b_z)) < 1e-8);
}

TEST_CASE("even potentials reflect identically from both sides", "[solver]") {
  for (const auto& p : {make_square_well(-1.0, 1.0), make_gaussian(-2.0, 0.0, 1.0), make_poschl_teller(2)})
    for (double k : {0.05, 0.6, 3.0}) {
      const auto s = solve(p, k);
      CHECK(std::abs(s.b - s.b_z) < 1e-6);
    }
}

TEST_CASE("asymmetric wells: equal transmission, different reflection phases", "[solver]") {
  const auto s = solve(asym(), 1.0);
  CHECK(std::abs(s.t - s.t_z) < 1e-6);
  CHECK(std::abs(numerics::wrap_angle(std::arg(s.b) - std::arg(s.b_z))) > 1e-2);
  CHECK(std::abs(std::abs(s.b) - std::abs(s.b_z)) < 1e-6);
}

TEST_CASE("optical theorem and phase relation", "[solver]") {
  for (const auto& p : {asym(), make_square_well(2.0, 0.5), make_gaussian(-2.0, 0.4, 0.6)})
    for (double k : numerics::geometric_grid(0.01, 20.0, 12)) {
      const auto s = solve(p, k);
      const complex f = s.t - 1.0;
      INFO(p.name() << " k = " << k);
      CHECK(std::abs(std::norm(f) + std::norm(s.b) + 2.0 * f.real()) < 1e-6);
      CHECK(s.unitarity_residual() < 1e-6);
      CHECK(s.time_reversal_residual() < 1e-6);
      if (std::abs(s.b) > 1e-4) CHECK(phase_relation(s) < 1e-5);
    }
}

TEST_CASE("wavefunction of the reflectionless well at x = 0", "[solver]") {
  const auto s = solve_direct(make_poschl_teller(1), 1.0);
  CHECK(std::abs(s.psi_at(0.0).first - complex(0.5, 0.5)) < 1e-6);
  // closed form (ik - tanh x)/(ik + 1) e^{ikx} elsewhere
  for (double x : {-3.0, -0.4, 0.9, 2.5}) {
    const complex ik{0.0, 1.0};
    const complex exact = (ik - std::tanh(x)) / (ik + 1.0) * std::polar(1.0, x);
    CHECK(std::abs(s.psi_at(x).first - exact) < 1e-6);
  }
}

TEST_CASE("zero-energy limit of the reflectionless well is -tanh x", "[solver]") {
  const auto s = solve_direct(make_poschl_teller(1), 1e-4);
  double err = 0.0;
  const complex phase = s.psi_at(3.0).first / -std::tanh(3.0);
  for (double x = -5.0; x <= 5.0; x += 0.01) err = std::max(err, std::abs(s.psi_at(x).first / phase + std::tanh(x)));
  CHECK(err < 1e-2);
}

TEST_CASE("wronskian identity for the real part of psi", "[solver]") {
  // (d/dk Phi) Phi' - Phi (d/dk Phi)' evaluated between -L and L equals
  // 2k int Phi^2 for Phi = Re psi_k.
  const double dk = Tolerances{}.dk_fd;
  for (const auto& p : {make_square_well(-1.0, 1.0), asym(), make_poschl_teller(2)})
    for (double k : {0.3, 0.7, 2.0}) {
      const double L = p.support_radius() + 5.0;
      const auto lo = solve_direct(p, k - dk), mid = solve_direct(p, k), hi = solve_direct(p, k + dk);
      auto bracket = [&](double x) {
        const auto [pl, dl] = lo.psi_at(x);
        const auto [pm, dm] = mid.psi_at(x);
        const auto [ph, dh] = hi.psi_at(x);
        const double dot = (ph.real() - pl.real()) / (2.0 * dk);
        const double dot_prime = (dh.real() - dl.real()) / (2.0 * dk);
        return dot * dm.real() - pm.real() * dot_prime;
      };
      const int n = 40000;
      const double h = 2.0 * L / n;
      double integral = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double v = std::pow(mid.psi_at(-L + h * i).first.real(), 2);
        integral += (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * v;
      }
      integral *= h / 3.0;
      INFO(p.name() << " k = " << k);
      CHECK_THAT(bracket(L) - bracket(-L), WithinRel(2.0 * k * integral, 1e-4));
    }
}

TEST_CASE("halving the step changes amplitudes by less than 10x the tolerance", "[solver]") {
  SolverOptions fine;
  fine.steps_per_wavelength *= 2;
  fine.max_step *= 0.5;
  fine.strength_step *= 0.5;
  for (const auto& p : {asym(), make_square_well(-5.0, 1.0), make_poschl_teller(3)})
    for (double k : {1e-3, 0.2, 4.0, 40.0}) {
      const auto a = solve(p, k), b = solve(p, k, fine);
      INFO(p.name() << " k = " << k);
      CHECK(std::abs(a.t - b.t) < 1e-5);
      CHECK(std::abs(a.b - b.b) < 1e-5);
    }
}

TEST_CASE("delta: exact jump conditions and the narrow-well surrogate", "[solver]") {
  for (double g : {-2.0, -0.5, 0.5, 2.0})
    for (double k : {1e-3, 0.1, 1.0, 10.0}) {
      const auto cf = *closed_form_amplitudes(make_delta(g), k);
      const auto sym = solve(make_delta(g), k);
      const auto sur = solve(make_delta_surrogate(g), k);
      INFO("g = " << g << " k = " << k);
      CHECK(std::abs(sym.t - cf.t) < 1e-10);
      CHECK(std::abs(sym.b - cf.b) < 1e-10);
      CHECK(std::abs(sur.t - cf.t) < 1e-3);
      CHECK(std::abs(sur.b - cf.b) < 1e-3);
    }
}

TEST_CASE("solver errors", "[solver]") {
  const auto p = make_square_well(-1.0, 1.0);
  CHECK_THROWS_AS(solve_direct(p, 0.0), DomainError);
  CHECK_THROWS_AS(solve_zurdo(p, -1.0), DomainError);
  SolverOptions strict;
  strict.tol.match = 1e-30;
  CHECK_THROWS_AS(solve_direct(make_gaussian(-2.0, 0.0, 1.0), 0.5, strict), MatchingFailure);
  SolverOptions no_wf;
  no_wf.keep_wavefunction = false;
  CHECK_THROWS_AS(solve_direct(p, 1.0, no_wf).psi_at(0.0), DomainError);
}
