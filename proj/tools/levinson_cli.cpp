#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levinson.hpp"
#include "levinson/acceptance.hpp"
#include "levinson/io.hpp"

namespace fs = std::filesystem;
using namespace levinson;

namespace {

struct PotentialArgs {
  std::string name;
  std::string spec;
  int l = 1;
  double g = -2.0;
  double lambda = 2.0;
  double depth = -1.0;
  double half_width = 1.0;
  double amplitude = -2.0;
  double center = 0.0;
  double width = 1.0;
};

struct RunArgs {
  PotentialArgs potential;
  double k_min = 1e-3;
  double k_max = 50.0;
  std::size_t n_k = 400;
  std::vector<double> L;
  std::optional<double> L_box;
  std::vector<std::string> tol;
  std::string out = ".";
  std::string format = "csv";
};

void add_potential_options(CLI::App* cmd, PotentialArgs& a) {
  cmd->add_option("--potential", a.name, "built-in potential")
      ->check(CLI::IsMember({"free", "poschl-teller", "sech2", "delta", "square-well", "gaussian",
                             "asym-double-gaussian"}));
  cmd->add_option("--spec", a.spec, "JSON potential spec file")->check(CLI::ExistingFile);
  cmd->add_option("--l", a.l, "poschl-teller: l (u = -l(l+1) sech^2 x)");
  cmd->add_option("--g", a.g, "delta: coupling g");
  cmd->add_option("--lambda", a.lambda, "sech2: strength (u = -lambda sech^2 x)");
  cmd->add_option("--depth", a.depth, "square-well: value of u inside");
  cmd->add_option("--half-width", a.half_width, "square-well: half width");
  cmd->add_option("--amplitude", a.amplitude, "gaussian: amplitude");
  cmd->add_option("--center", a.center, "gaussian: center");
  cmd->add_option("--width", a.width, "gaussian: width");
}

void add_run_options(CLI::App* cmd, RunArgs& a) {
  add_potential_options(cmd, a.potential);
  cmd->add_option("--k-min", a.k_min, "smallest k of the sweep")->capture_default_str();
  cmd->add_option("--k-max", a.k_max, "largest k of the sweep")->capture_default_str();
  cmd->add_option("--n-k", a.n_k, "number of geometric k points (>= 16)")->capture_default_str();
  cmd->add_option("--tol", a.tol, "tolerance override NAME=VALUE (repeatable)");
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
}

Potential build_potential(const PotentialArgs& a) {
  if (!a.spec.empty() && !a.name.empty()) throw InvalidParameter("give either --potential or --spec, not both");
  if (!a.spec.empty()) return io::load_potential(a.spec);
  if (a.name.empty()) throw InvalidParameter("a potential is required (--potential or --spec)");
  if (a.name == "free") return make_free();
  if (a.name == "poschl-teller") return make_poschl_teller(a.l);
  if (a.name == "sech2") return make_sech2_well(a.lambda);
  if (a.name == "delta") return make_delta(a.g);
  if (a.name == "square-well") return make_square_well(a.depth, a.half_width);
  if (a.name == "gaussian") return make_gaussian(a.amplitude, a.center, a.width);
  return io::make_asym_double_gaussian();
}

Tolerances build_tolerances(const std::vector<std::string>& overrides) {
  Tolerances t;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw InvalidParameter("--tol expects NAME=VALUE, got " + o);
    double v = 0.0;
    try {
      v = std::stod(o.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidParameter("--tol value is not a number: " + o);
    }
    if (!(v > 0.0)) throw InvalidParameter("--tol values must be positive: " + o);
    if (!io::set_tolerance(t, o.substr(0, eq), v)) throw InvalidParameter("unknown tolerance " + o.substr(0, eq));
  }
  return t;
}

std::vector<double> build_grid(const RunArgs& a) {
  if (!(a.k_min > 0.0)) throw InvalidParameter("--k-min must be positive");
  if (!(a.k_min < a.k_max)) throw InvalidParameter("--k-min must be below --k-max");
  if (a.n_k < 16) throw InvalidParameter("--n-k must be at least 16");
  return numerics::geometric_grid(a.k_min, a.k_max, a.n_k);
}

PhaseCurveOptions curve_options(const Tolerances& tol) {
  PhaseCurveOptions o;
  o.solver.tol = tol;
  return o;
}

void print_residuals(const PhaseCurve& c, const Tolerances& tol) {
  std::printf("  points                 %zu (%zu inserted by refinement)\n", c.size(), c.refinements);
  std::printf("  max unitarity residual %.3e (tol %.1e)\n", c.max_unitarity_residual(), tol.unitarity);
  std::printf("  max |t - t~|           %.3e (tol %.1e)\n", c.max_time_reversal_residual(), tol.time_reversal);
  std::printf("  max |Det S - e^{2i phi_t}| %.3e (tol %.1e)\n", c.max_det_residual(), tol.determinant);
  std::printf("  max match residual     %.3e (tol %.1e)\n", c.max_match_residual(), tol.match);
}

bool residuals_ok(const PhaseCurve& c, const Tolerances& tol) {
  return c.max_unitarity_residual() < tol.unitarity && c.max_time_reversal_residual() < tol.time_reversal &&
         c.max_det_residual() < tol.determinant;
}

io::json curve_json(const PhaseCurve& c, const std::string& name, const Tolerances& tol) {
  io::json pts = io::json::array();
  auto num = [](double v) { return std::isnan(v) ? io::json(nullptr) : io::json(v); };
  for (const auto& p : c.points)
    pts.push_back({{"k", p.k},
                   {"t", {p.t.real(), p.t.imag()}},
                   {"b", {p.b.real(), p.b.imag()}},
                   {"t_z", {p.t_z.real(), p.t_z.imag()}},
                   {"b_z", {p.b_z.real(), p.b_z.imag()}},
                   {"phi_t", p.phi_t},
                   {"phi_r", num(p.phi_r)},
                   {"phi_r_z", num(p.phi_r_z)},
                   {"det_residual", p.det_residual},
                   {"unitarity_residual", p.unitarity_residual}});
  return {{"potential", name},  {"phi_t_0", c.phi_t_0},       {"born_anchor", c.born_anchor},
          {"moment0", c.moment0}, {"tolerances", io::to_json(tol)}, {"points", pts}};
}

int cmd_scatter(const RunArgs& a) {
  const auto tol = build_tolerances(a.tol);
  const auto p = build_potential(a.potential);
  const auto curve = build_phase_curve(p, build_grid(a), curve_options(tol));
  const fs::path dir(a.out);
  fs::path file;
  if (a.format == "json") {
    file = dir / "phase_curve.json";
    io::write_file(file, curve_json(curve, p.name(), tol).dump(2) + "\n");
  } else {
    file = dir / "phase_curve.csv";
    io::write_file(file, io::phase_curve_csv(curve));
  }
  std::printf("scatter %s\n", p.name().c_str());
  print_residuals(curve, tol);
  std::printf("  wrote %s\n", file.string().c_str());
  return residuals_ok(curve, tol) ? 0 : 1;
}

int cmd_density(const RunArgs& a) {
  const auto tol = build_tolerances(a.tol);
  const auto p = build_potential(a.potential);
  auto L = a.L;
  if (L.empty()) L.push_back(p.support_radius() + 20.0);
  const auto opts = curve_options(tol);
  const auto curve = build_phase_curve(p, build_grid(a), opts);
  const auto cls = classify_b0(p, default_probe_grid(), opts.solver);
  const auto table = io::density_table(p, curve, cls.b0, L, opts.solver);
  double worst = 0.0;
  for (double r : table.identity_residual) worst = std::max(worst, r);

  const fs::path dir(a.out);
  auto sidecar = io::density_sidecar(table, p.name(), tol);
  sidecar["max_identity_residual"] = worst;
  if (a.format == "json") {
    sidecar["k"] = table.density.k;
    sidecar["rho_smooth"] = table.density.rho_smooth;
    sidecar["rho_box"] = table.box;
    sidecar["identity_residual"] = table.identity_residual;
    io::write_file(dir / "density.json", sidecar.dump(2) + "\n");
  } else {
    io::write_file(dir / "density.csv", io::density_csv(table));
    io::write_file(dir / "density.json", sidecar.dump(2) + "\n");
  }
  std::printf("density %s\n", p.name().c_str());
  std::printf("  b0 = %g, delta weight = %.6f\n", table.density.b0, table.density.delta_weight);
  std::printf("  sum rule integral      %.6f\n", sum_rule_integral(table.density));
  std::printf("  max identity residual  %.3e (tol %.1e) over %zu k and %zu L\n", worst, tol.identity,
              table.density.k.size(), L.size());
  print_residuals(curve, tol);
  std::printf("  wrote %s\n", (dir / (a.format == "json" ? "density.json" : "density.csv")).string().c_str());
  return worst < tol.identity && residuals_ok(curve, tol) ? 0 : 1;
}

int cmd_levinson(const RunArgs& a) {
  const auto tol = build_tolerances(a.tol);
  const auto p = build_potential(a.potential);
  LevinsonOptions opt;
  opt.curve = curve_options(tol);
  opt.k_grid = build_grid(a);
  if (a.L_box) {
    if (!(*a.L_box > p.support_radius())) throw DomainError("--L-box must exceed the support radius");
    opt.oracle.margin = *a.L_box - p.support_radius();
  }
  const auto r = levinson_verdict(p, opt);
  const fs::path file = fs::path(a.out) / "levinson_report.json";
  io::write_file(file, io::to_json(r).dump(2) + "\n");
  std::printf("levinson %s\n", r.potential.c_str());
  std::printf("  delta_phi / pi   %.6f\n", r.delta_phi / pi);
  std::printf("  b0               %g (%s)\n", r.b0, r.resonance ? "critical, zero-energy resonance" : "generic");
  std::printf("  n_levinson       %.6f\n", r.n_levinson);
  std::printf("  n_oracle         %d (%s)%s\n", r.n_oracle, r.oracle_method.c_str(),
              r.near_threshold ? "  warning: eigenvalue within 1e-8 of threshold" : "");
  if (r.n_surrogate) std::printf("  n_surrogate      %d\n", *r.n_surrogate);
  std::printf("  det winding      %.6f\n", r.det_winding);
  std::printf("  sum rule         %.6f (expected %.6f)\n", r.sum_rule, -2.0 * pi * r.n_oracle);
  std::printf("  verdict          %s\n", r.verdict().c_str());
  std::printf("  wrote %s\n", file.string().c_str());
  return r.pass ? 0 : 1;
}

int cmd_verify(bool fast, double scale) {
  if (!(scale > 0.0)) throw InvalidParameter("--tol-scale must be positive");
  acceptance::Options opt;
  opt.fast = fast;
  opt.scale = scale;
  const auto results = acceptance::run(opt, [](const acceptance::Result& r) {
    std::printf("%s\n", acceptance::format(r).c_str());
    std::fflush(stdout);
  });
  std::vector<int> failed;
  for (const auto& r : results)
    if (r.ran && !r.pass) failed.push_back(r.id);
  if (failed.empty()) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::string ids;
  for (int id : failed) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
  std::printf("FAILED criteria: %s\n", ids.c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattering data, spectral densities and Levinson's theorem for 1D potentials"};
  app.require_subcommand(1);

  RunArgs scatter, density, lev;
  auto* s = app.add_subcommand("scatter", "sweep k, write the phase-curve table");
  add_run_options(s, scatter);
  s->add_option("--format", scatter.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* d = app.add_subcommand("density", "spectral density, box densities and identity residuals");
  add_run_options(d, density);
  d->add_option("--L", density.L, "box half-width for a box-density column (repeatable)");
  d->add_option("--format", density.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* l = app.add_subcommand("levinson", "Levinson sum rule verdict, JSON report");
  add_run_options(l, lev);
  l->add_option("--L-box", lev.L_box, "half-width of the Dirichlet box used by the bound-state count");

  bool fast = false;
  double scale = 1.0;
  auto* v = app.add_subcommand("verify", "run the acceptance suite");
  v->add_flag("--fast", fast, "quick subset");
  v->add_option("--tol-scale", scale, "multiply every acceptance threshold (values < 1 tighten)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (s->parsed()) return cmd_scatter(scatter);
    if (d->parsed()) return cmd_density(density);
    if (l->parsed()) return cmd_levinson(lev);
    return cmd_verify(fast, scale);
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
