#include <cmath>
#include <vector>

#include <catch_amalgamated.hpp>

#include "levinson/levinson.hpp"
#include "levinson/spectral.hpp"

using namespace levinson;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Potential asym() { return make_composite({Gaussian{-3.0, -1.0, 0.5}, Gaussian{-1.5, 1.5, 0.8}}); }

// Box density of g delta(x) from the closed-form amplitudes, integrating
// |psi|^2 on the reflected side with a fine Simpson rule.
double delta_box_oracle(double g, double k, double L) {
  const auto a = *closed_form_amplitudes(make_delta(g), k);
  const int n = 200000;
  const double h = L / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -L + h * i;
    const double v = std::norm(std::polar(1.0, k * x) + a.b * std::polar(1.0, -k * x));
    acc += (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * v;
  }
  return acc * h / 3.0 + L * std::norm(a.t) - 2.0 * L;
}

}  // namespace

TEST_CASE("density of the reflectionless well", "[spectral]") {
  const auto c = build_phase_curve(make_poschl_teller(1));
  const auto d = density_from_phase(c, 0.0);
  CHECK(d.delta_weight == 0.0);
  for (std::size_t i = 0; i < d.k.size(); ++i) {
    INFO("k = " << d.k[i]);
    CHECK_THAT(d.rho_smooth[i], WithinAbs(-2.0 / (d.k[i] * d.k[i] + 1.0), 1e-3));
  }
}

TEST_CASE("density of the attractive delta", "[spectral]") {
  const auto d = density_from_phase(build_phase_curve(make_delta(-2.0)), -1.0);
  CHECK_THAT(d.delta_weight, WithinAbs(-pi, 1e-15));
  for (std::size_t i = 0; i < d.k.size(); ++i)
    CHECK_THAT(d.rho_smooth[i], WithinAbs(-4.0 / (4.0 + 4.0 * d.k[i] * d.k[i]), 1e-3));
}

TEST_CASE("density of the free potential vanishes", "[spectral]") {
  const auto d = density_from_phase(build_phase_curve(make_free()), 0.0);
  for (double v : d.rho_smooth) CHECK(v == 0.0);
  CHECK(d.delta_weight == 0.0);
  CHECK_THROWS_AS(density_from_phase(build_phase_curve(make_free()), 0.5), InvalidParameter);
}

TEST_CASE("box density of the reflectionless well is L independent", "[spectral]") {
  const auto p = make_poschl_teller(1);
  CHECK_THAT(box_density(p, 1.0, 20.0), WithinAbs(-1.0, 1e-3));
  for (double k : {0.2, 1.0, 3.0}) {
    const double ref = box_density(p, k, 20.0);
    for (double L : {25.0, 33.3, 47.0, 60.0}) CHECK_THAT(box_density(p, k, L), WithinAbs(ref, 1e-3));
    CHECK_THAT(ref, WithinAbs(-2.0 / (k * k + 1.0), 1e-3));
  }
}

TEST_CASE("box density of the free potential is zero", "[spectral]") {
  for (double k : {0.01, 1.0, 9.0})
    for (double L : {0.5, 10.0, 100.0}) CHECK(std::abs(box_density(make_free(), k, L)) < 1e-12);
}

TEST_CASE("box density of the delta oscillates as predicted", "[spectral]") {
  const double g = -2.0, k = 1.0;
  const double L1 = 10.0, L2 = 10.0 + pi / (2.0 * k);
  const double r1 = box_density(make_delta(g), k, L1), r2 = box_density(make_delta(g), k, L2);
  CHECK_THAT(r1, WithinAbs(delta_box_oracle(g, k, L1), 1e-8));
  CHECK_THAT(r2, WithinAbs(delta_box_oracle(g, k, L2), 1e-8));
  const auto b = closed_form_amplitudes(make_delta(g), k)->b;
  const double predicted = (std::imag(b * std::polar(1.0, 2.0 * k * L2)) - std::imag(b * std::polar(1.0, 2.0 * k * L1))) / k;
  CHECK_THAT(r2 - r1, WithinAbs(predicted, 1e-8));
  CHECK(std::abs(predicted) > 0.1);
}

TEST_CASE("box density requires L beyond the support", "[spectral]") {
  const auto p = make_square_well(-1.0, 1.0);
  CHECK_THROWS_AS(box_density(p, 1.0, 0.5 * p.support_radius()), DomainError);
  CHECK_THROWS_AS(finite_L_identity_residual(p, 1.0, p.support_radius()), DomainError);
}

TEST_CASE("finite-box identity", "[spectral]") {
  CHECK(finite_L_identity_residual(make_poschl_teller(1), 1.0, 20.0) < 1e-3);
  CHECK(finite_L_identity_residual(make_free(), 0.8, 7.0) == 0.0);
  CHECK(finite_L_identity_residual(make_square_well(-1.0, 1.0), 0.7, 30.0) < 1e-2);
  for (const auto& p : {asym(), make_delta(-2.0), make_square_well(2.0, 0.5), make_poschl_teller(2)})
    for (double k : {0.05, 0.4, 2.0, 15.0})
      for (double off : {5.0, 12.5, 31.0}) {
        INFO(p.name() << " k = " << k << " L - R = " << off);
        CHECK(finite_L_identity_residual(p, k, p.support_radius() + off) < 1e-2);
      }
}

TEST_CASE("density tail follows the Born estimate", "[spectral]") {
  for (const auto& p : {asym(), make_gaussian(-2.0, 0.0, 1.0), make_square_well(2.0, 0.5), make_delta(1.5)}) {
    const auto c = build_phase_curve(p);
    const auto d = density_from_phase(c, -1.0);
    const double kmax = d.k_max();
    INFO(p.name());
    CHECK_THAT(d.rho_smooth.back() * 2.0 * kmax * kmax / p.moment0(), WithinAbs(1.0, 0.2));
    double bound = 0.0;
    for (std::size_t i = 0; i < d.k.size(); ++i)
      if (d.k[i] > 5.0) bound = std::max(bound, std::abs(d.k[i] * d.k[i] * d.rho_smooth[i]));
    CHECK(bound < 2.0 * std::abs(p.moment0()));
  }
}

TEST_CASE("appendix integral tends to pi b(0)", "[spectral]") {
  std::vector<double> v;
  for (double L : {50.0, 100.0, 200.0}) v.push_back(appendix_integral(make_delta(-2.0), L, 10.0));
  CHECK(std::abs(v.back() + pi) < 0.05 * pi);
  for (double x : v) CHECK(std::abs(x + pi) < 0.05 * pi);
  CHECK(std::abs(appendix_integral(make_poschl_teller(1), 200.0, 10.0)) < 1e-3);
  CHECK(appendix_integral(make_free(), 200.0, 10.0) == 0.0);
  const auto sq = make_square_well(-1.0, 1.0);
  const double b0 = classify_b0(sq).b0;
  CHECK(std::abs(appendix_integral(sq, 200.0, 10.0) - pi * b0) < 0.05 * pi);
  CHECK_THROWS_AS(appendix_integral(sq, -1.0, 10.0), InvalidParameter);
}
