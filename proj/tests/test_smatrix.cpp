#include <cmath>
#include <vector>

#include <catch_amalgamated.hpp>

#include "levinson/smatrix.hpp"

using namespace levinson;
using Catch::Matchers::WithinAbs;

namespace {

Potential asym() { return make_composite({Gaussian{-3.0, -1.0, 0.5}, Gaussian{-1.5, 1.5, 0.8}}); }

}  // namespace

TEST_CASE("assembled S-matrices", "[smatrix]") {
  const auto free = assemble(solve(make_free(), 1.3));
  CHECK(free.t() == complex(1.0, 0.0));
  CHECK(free.t_z() == complex(1.0, 0.0));
  CHECK(free.b() == complex(0.0, 0.0));
  CHECK(free.b_z() == complex(0.0, 0.0));

  const auto pt = assemble(solve_direct(make_poschl_teller(1), 1.0), solve_zurdo(make_poschl_teller(1), 1.0));
  CHECK(std::abs(pt.t() - complex(0.0, 1.0)) < 1e-6);
  CHECK(std::abs(pt.t_z() - complex(0.0, 1.0)) < 1e-6);
  CHECK(std::abs(pt.det() + 1.0) < 1e-6);
  CHECK_FALSE(pt.degraded);

  const auto d = assemble(solve(make_delta(-2.0), 1.0));
  CHECK_THAT(std::abs(d.det()), WithinAbs(1.0, 1e-6));
  CHECK(d.unitarity_residual < 1e-6);
}

TEST_CASE("assemble rejects mismatched inputs and flags degraded matrices", "[smatrix]") {
  const auto p = make_square_well(-1.0, 1.0);
  CHECK_THROWS_AS(assemble(solve_direct(p, 1.0), solve_zurdo(p, 1.1)), InvalidParameter);
  CHECK_THROWS_AS(assemble(solve_direct(p, 1.0), solve_direct(p, 1.0)), InvalidParameter);
  auto broken = solve(p, 1.0);
  broken.t *= 1.01;
  CHECK(assemble(broken).degraded);
}

TEST_CASE("phase curve of the reflectionless well", "[smatrix]") {
  const auto c = build_phase_curve(make_poschl_teller(1));
  REQUIRE(c.size() >= 400);
  for (const auto& p : c.points) {
    // arg((ik-1)/(ik+1)) continued from 0 at infinity
    const double exact = 2.0 * std::atan(1.0 / p.k);
    CHECK(std::abs(p.phi_t - exact) < 1e-6);
    CHECK_FALSE(p.reflection_defined());
  }
  CHECK_THAT(c.phi_t_0, WithinAbs(pi, 1e-3));
  CHECK(c.points.back().phi_t > 0.0);
  CHECK_THAT(c.points.back().phi_t, WithinAbs(c.born_anchor, 2e-4));
  CHECK_THAT(det_winding(c), WithinAbs(1.0, 0.01));
  CHECK(c.max_det_residual() < 1e-5);
}

TEST_CASE("phase curve of the free potential is flat", "[smatrix]") {
  const auto c = build_phase_curve(make_free());
  for (const auto& p : c.points) CHECK(p.phi_t == 0.0);
  CHECK(c.phi_t_0 == 0.0);
  CHECK(det_winding(c) == 0.0);
}

TEST_CASE("phase curve of the attractive delta", "[smatrix]") {
  const auto c = build_phase_curve(make_delta(-2.0));
  CHECK_THAT(c.phi_t_0, WithinAbs(pi / 2.0, 1e-3));
  CHECK_THAT(det_winding(c), WithinAbs(0.5, 0.01));
  for (const auto& p : c.points) {
    const double exact = std::atan2(1.0, p.k);  // arg(ik/(ik+1)) = pi/2 - atan k
    CHECK(std::abs(p.phi_t - exact) < 1e-8);
  }
}

TEST_CASE("unwrapped phases are continuous and obey the channel identity", "[smatrix]") {
  for (const auto& pot : {asym(), make_square_well(-5.0, 1.0), make_poschl_teller(3)}) {
    const auto c = build_phase_curve(pot);
    INFO(pot.name());
    for (std::size_t i = 0; i + 1 < c.size(); ++i) CHECK(std::abs(c.points[i + 1].phi_t - c.points[i].phi_t) < pi);
    for (const auto& p : c.points) {
      CHECK(p.det_residual < 1e-5);
      CHECK(p.unitarity_residual < 1e-6);
      CHECK(p.time_reversal_residual < 1e-6);
      if (p.reflection_defined())
        CHECK(std::abs(numerics::wrap_angle(2.0 * p.phi_t - p.phi_r - p.phi_r_z - pi)) < 1e-4);
    }
    if (pot.moment0() != 0.0) CHECK(c.born_residual() < 0.2 * std::abs(c.born_anchor));
  }
}

TEST_CASE("phase curve does not depend on grid density", "[smatrix]") {
  const auto p = asym();
  const auto coarse = build_phase_curve(p, numerics::geometric_grid(1e-3, 50.0, 200));
  const auto fine = build_phase_curve(p, numerics::geometric_grid(1e-3, 50.0, 399));
  REQUIRE(coarse.refinements == 0);
  REQUIRE(fine.refinements == 0);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    CHECK_THAT(fine.points[2 * i].k, Catch::Matchers::WithinRel(coarse.points[i].k, 1e-12));
    CHECK(std::abs(fine.points[2 * i].phi_t - coarse.points[i].phi_t) < 1e-6);
  }
}

TEST_CASE("sparse grids are refined, and refinement can be exhausted", "[smatrix]") {
  const auto deep = make_square_well(-50.0, 3.0);
  const auto grid = numerics::geometric_grid(0.1, 50.0, 16);
  const auto c = build_phase_curve(deep, grid);
  CHECK(c.refinements > 0);
  for (std::size_t i = 0; i + 1 < c.size(); ++i) CHECK(std::abs(c.points[i + 1].phi_t - c.points[i].phi_t) <= pi / 4);
  PhaseCurveOptions none;
  none.max_refine_passes = 0;
  CHECK_THROWS_AS(build_phase_curve(deep, grid, none), UnwrapFailure);
}

TEST_CASE("phase curve input validation", "[smatrix]") {
  const auto p = make_square_well(-1.0, 1.0);
  CHECK_THROWS_AS(build_phase_curve(p, std::vector<double>{0.1, 0.2}), InvalidParameter);
  CHECK_THROWS_AS(build_phase_curve(p, std::vector<double>{0.1, 0.3, 0.2, 0.4, 0.5}), InvalidParameter);
  CHECK_THROWS_AS(build_phase_curve(p, std::vector<double>{-0.1, 0.3, 0.4, 0.5, 0.6}), DomainError);
}
