#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <catch_amalgamated.hpp>

#include "levinson/potentials.hpp"

using namespace levinson;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Composite Simpson on a fine uniform grid, independent of the library's
// Gauss-Kronrod path. Discontinuities must sit on grid nodes.
double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 200000) {
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + h * i);
  return acc * h / 3.0;
}

std::vector<Potential> analytic_fixtures() {
  return {make_poschl_teller(1),
          make_poschl_teller(3),
          make_sech2_well(2.7),
          make_square_well(-1.0, 1.0),
          make_square_well(2.0, 0.5),
          make_gaussian(-2.0, 0.3, 0.7),
          make_composite({Gaussian{-3.0, -1.0, 0.5}, Gaussian{-1.5, 1.5, 0.8}}),
          make_composite({SquareWell{-1.0, 2.0}, Gaussian{0.5, 0.0, 0.3}})};
}

}  // namespace

TEST_CASE("sech^2 well with l = 1 has depth 2 and weight -4", "[potentials]") {
  const auto p = make_poschl_teller(1);
  CHECK_THAT(p(0.0), WithinAbs(-2.0, 1e-15));
  CHECK(std::abs(p(10.0)) < 1e-7);
  CHECK(std::abs(p(-10.0)) < 1e-7);
  const double oracle = simpson([&](double x) { return -2.0 / std::pow(std::cosh(x), 2); }, -40.0, 40.0);
  CHECK_THAT(oracle, WithinAbs(-4.0, 1e-10));
  CHECK_THAT(p.moment0(), WithinAbs(oracle, 1e-8));
  CHECK_THAT(moment_integrals(p).moment0, WithinAbs(-4.0, 1e-8));
}

TEST_CASE("sech^2 family weight is -2 l (l + 1)", "[potentials]") {
  for (int l = 1; l <= 4; ++l) {
    const auto p = make_poschl_teller(l);
    CHECK_THAT(p.moment0(), WithinRel(-2.0 * l * (l + 1), 1e-12));
    CHECK(p.poschl_teller_ell() == l);
  }
  CHECK_THROWS_AS(make_poschl_teller(0), InvalidParameter);
  CHECK_THROWS_AS(make_poschl_teller(-2), InvalidParameter);
  CHECK(make_sech2_well(6.0).poschl_teller_ell() == 2);
  CHECK(make_sech2_well(6.05).poschl_teller_ell() == 0);
}

TEST_CASE("stored moments agree with independent quadrature", "[potentials]") {
  for (const auto& p : analytic_fixtures()) {
    INFO(p.name());
    const double R = p.support_radius();
    // put every breakpoint on a node by integrating piecewise
    std::vector<double> cuts{-R};
    for (double b : p.breakpoints())
      if (b > -R && b < R) cuts.push_back(b);
    cuts.push_back(R);
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = cuts[i], hi = cuts[i + 1];
      auto inside = [&](double x) { return p.smooth_value_inside(x, lo, hi); };
      m0 += simpson(inside, lo, hi, 100000);
      m2 += simpson([&](double x) { return (1.0 + x * x) * std::abs(inside(x)); }, lo, hi, 100000);
    }
    CHECK_THAT(p.moment0(), WithinRel(m0, 1e-8));
    CHECK_THAT(p.moment2(), WithinRel(m2, 1e-8));
    const auto mi = moment_integrals(p);
    CHECK_THAT(mi.moment0, WithinRel(m0, 1e-8));
    CHECK_THAT(mi.moment2, WithinRel(m2, 1e-8));
  }
}

TEST_CASE("potential is negligible beyond the support radius", "[potentials]") {
  for (const auto& p : analytic_fixtures()) {
    INFO(p.name());
    const double R = p.support_radius();
    CHECK(std::abs(p(R)) <= p.support_eps() * (1.0 + 1e-9));
    CHECK(std::abs(p(-R)) <= p.support_eps() * (1.0 + 1e-9));
    CHECK(std::abs(p(R + 3.0)) <= p.support_eps());
  }
}

TEST_CASE("even potentials are mirror symmetric", "[potentials]") {
  for (const auto& p : {make_poschl_teller(2), make_square_well(-3.0, 0.7), make_gaussian(1.0, 0.0, 2.0)})
    for (double x : {0.1, 0.5, 0.69, 1.3, 4.0}) CHECK(p(x) == p(-x));
}

TEST_CASE("delta potential is symbolic", "[potentials]") {
  const auto d = make_delta(-2.0);
  CHECK(d.is_delta());
  CHECK(*d.delta_coupling() == -2.0);
  CHECK(make_delta(1.0).delta_coupling().value() == 1.0);
  CHECK_THROWS_AS(d(0.3), DomainError);
  CHECK_THROWS_AS(make_delta(0.0), InvalidParameter);
  const auto m = moment_integrals(make_delta(3.0));
  CHECK(m.moment0 == 3.0);
  CHECK(m.moment2 == 3.0);
}

TEST_CASE("free potential is the empty composite", "[potentials]") {
  const auto f = make_free();
  CHECK(f.is_free());
  CHECK(f(1.0) == 0.0);
  const auto m = moment_integrals(f);
  CHECK(m.moment0 == 0.0);
  CHECK(m.moment2 == 0.0);
}

TEST_CASE("sampled potentials interpolate and vanish outside", "[potentials]") {
  std::vector<double> x, u;
  for (int i = -100; i <= 100; ++i) {
    x.push_back(0.05 * i);
    u.push_back(-std::exp(-x.back() * x.back()));
  }
  const auto p = make_sampled(x, u);
  CHECK_THAT(p(0.0), WithinAbs(-1.0, 1e-12));
  CHECK_THAT(p(0.123), WithinAbs(-std::exp(-0.123 * 0.123), 1e-4));
  CHECK(p(5.5) == 0.0);
  CHECK(p(-5.5) == 0.0);
  CHECK_THAT(p.moment0(), WithinAbs(-std::sqrt(pi), 1e-4));
  u[50] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(make_sampled(x, u), Error);
}

TEST_CASE("closed-form amplitudes", "[potentials]") {
  const auto pt = *closed_form_amplitudes(make_poschl_teller(1), 1.0);
  CHECK_THAT(std::abs(pt.t - complex(0.0, 1.0)), WithinAbs(0.0, 1e-15));
  CHECK(std::abs(pt.b) == 0.0);

  const auto d = *closed_form_amplitudes(make_delta(-2.0), 1.0);
  CHECK_THAT(std::abs(d.b - complex(-0.5, 0.5)), WithinAbs(0.0, 1e-15));
  CHECK_THAT(std::norm(d.b), WithinAbs(0.5, 1e-15));
  CHECK_THAT(std::abs(d.t - 1.0 - d.b), WithinAbs(0.0, 1e-15));

  for (double g : {-2.0, 0.5, 7.0}) {
    const auto z = *closed_form_amplitudes(make_delta(g), 1e-9);
    CHECK_THAT(std::abs(z.b + 1.0), WithinAbs(0.0, 1e-8));
  }
  CHECK_FALSE(closed_form_amplitudes(make_square_well(-1.0, 1.0), 1.0).has_value());
  CHECK_FALSE(closed_form_amplitudes(make_poschl_teller(2), 1.0).has_value());
  CHECK_THROWS_AS(closed_form_amplitudes(make_delta(1.0), 0.0), DomainError);
  CHECK_THROWS_AS(closed_form_amplitudes(make_delta(1.0), -1.0), DomainError);
}

TEST_CASE("invalid analytic parameters are rejected", "[potentials]") {
  CHECK_THROWS_AS(make_square_well(-1.0, 0.0), InvalidParameter);
  CHECK_THROWS_AS(make_gaussian(-1.0, 0.0, -1.0), InvalidParameter);
  CHECK_THROWS_AS(make_delta_surrogate(0.0), InvalidParameter);
  const auto s = make_delta_surrogate(-2.0, 1e-3);
  CHECK_THAT(s.moment0(), WithinRel(-2.0, 1e-12));
}
