#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "levinson/errors.hpp"
#include "levinson/levinson.hpp"
#include "levinson/potentials.hpp"
#include "levinson/smatrix.hpp"
#include "levinson/spectral.hpp"
#include "levinson/tolerances.hpp"

namespace levinson::io {

using json = nlohmann::json;

namespace detail {

inline double number(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidParameter(std::string("potential spec: missing \"") + key + "\"");
  if (!j.at(key).is_number())
    throw InvalidParameter(std::string("potential spec: \"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

inline double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

inline AnalyticTerm term_from_json(const json& j) {
  const std::string kind = j.value("kind", "");
  if (kind == "poschl-teller") {
    const int l = static_cast<int>(number(j, "l"));
    if (l < 1 || l != number(j, "l")) throw InvalidParameter("poschl-teller: l must be an integer >= 1");
    return PoschlTeller{static_cast<double>(l) * (l + 1), l};
  }
  if (kind == "sech2") return PoschlTeller{number(j, "lambda"), 0};
  if (kind == "square-well") return SquareWell{number(j, "depth"), number(j, "half_width")};
  if (kind == "gaussian")
    return Gaussian{number(j, "amplitude"), number_or(j, "center", 0.0), number(j, "width")};
  if (kind == "delta") throw InvalidParameter("composite terms cannot be delta potentials");
  throw InvalidParameter("unknown composite term kind \"" + kind + "\"");
}

}  // namespace detail

/// The asymmetric two-Gaussian well used as a built-in fixture.
inline Potential make_asym_double_gaussian() {
  return make_composite({Gaussian{-3.0, -1.0, 0.5}, Gaussian{-1.5, 1.5, 0.8}});
}

/// Builds a potential from a JSON spec:
///   {"kind": "free" | "poschl-teller" | "sech2" | "delta" | "square-well" |
///            "gaussian" | "asym-double-gaussian" | "composite" | "sampled",
///    parameters..., "samples": [[x, u], ...], "support_eps": ...}
inline Potential potential_from_json(const json& j) {
  if (!j.is_object()) throw InvalidParameter("potential spec must be a JSON object");
  std::string kind = j.value("kind", j.contains("samples") ? "sampled" : "");
  if (kind.empty()) throw InvalidParameter("potential spec: missing \"kind\"");
  const double eps = detail::number_or(j, "support_eps", Tolerances{}.support_eps);

  if (kind == "free") return Potential(Composite{}, eps);
  if (kind == "poschl-teller") {
    const auto t = detail::term_from_json(j);
    return Potential(std::get<PoschlTeller>(t), eps);
  }
  if (kind == "sech2") return Potential(PoschlTeller{detail::number(j, "lambda"), 0}, eps);
  if (kind == "delta") {
    const double g = detail::number(j, "g");
    if (g == 0.0) throw InvalidParameter("delta: g must be non-zero (use kind \"free\")");
    return Potential(Delta{g}, eps);
  }
  if (kind == "square-well" || kind == "gaussian") {
    return std::visit([eps](const auto& t) { return Potential(t, eps); }, detail::term_from_json(j));
  }
  if (kind == "asym-double-gaussian") return make_asym_double_gaussian();
  if (kind == "composite") {
    if (!j.contains("terms") || !j.at("terms").is_array())
      throw InvalidParameter("composite: \"terms\" must be an array");
    std::vector<AnalyticTerm> terms;
    for (const auto& t : j.at("terms")) terms.push_back(detail::term_from_json(t));
    return Potential(Composite{std::move(terms)}, eps);
  }
  if (kind == "sampled") {
    if (!j.contains("samples") || !j.at("samples").is_array())
      throw InvalidParameter("sampled: \"samples\" must be an array of [x, u] pairs");
    std::vector<double> x, u;
    for (const auto& s : j.at("samples")) {
      if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
        throw InvalidParameter("sampled: each sample must be [x, u]");
      x.push_back(s[0].get<double>());
      u.push_back(s[1].get<double>());
    }
    return Potential(Sampled{std::move(x), std::move(u)}, eps);
  }
  throw InvalidParameter("unknown potential kind \"" + kind + "\"");
}

inline Potential potential_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidParameter(std::string("potential spec is not valid JSON: ") + e.what());
  }
  return potential_from_json(j);
}

inline Potential load_potential(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open potential spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return potential_from_json_text(ss.str());
}

/// Full-precision decimal rendering; NaN prints as "nan".
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Phase curve table: k, Re t, Im t, Re b, Im b, |t|^2, |b|^2, phi_t,
/// phi_r, phi_r_z, det_residual.
inline std::string phase_curve_csv(const PhaseCurve& c) {
  std::string out = "k,re_t,im_t,re_b,im_b,abs_t2,abs_b2,phi_t,phi_r,phi_r_z,det_residual\n";
  for (const auto& p : c.points) {
    const double v[] = {p.k, p.t.real(), p.t.imag(), p.b.real(), p.b.imag(), std::norm(p.t), std::norm(p.b),
                        p.phi_t, p.phi_r, p.phi_r_z, p.det_residual};
    for (std::size_t i = 0; i < std::size(v); ++i) out += (i ? "," : "") + fmt(v[i]);
    out += '\n';
  }
  return out;
}

/// Sets one tolerance by its field name; returns false for unknown names.
inline bool set_tolerance(Tolerances& t, const std::string& name, double value) {
  double Tolerances::*fields[] = {&Tolerances::support_eps, &Tolerances::unitarity, &Tolerances::time_reversal,
                                  &Tolerances::match,       &Tolerances::phase_floor, &Tolerances::round,
                                  &Tolerances::born,        &Tolerances::determinant, &Tolerances::identity,
                                  &Tolerances::dk_fd,       &Tolerances::quadrature};
  const char* names[] = {"support_eps", "unitarity",   "time_reversal", "match",
                         "phase_floor", "round",       "born",          "determinant",
                         "identity",    "dk_fd",       "quadrature"};
  for (std::size_t i = 0; i < std::size(names); ++i)
    if (name == names[i]) {
      t.*fields[i] = value;
      return true;
    }
  return false;
}

inline json to_json(const Tolerances& t) {
  return {{"support_eps", t.support_eps}, {"unitarity", t.unitarity},   {"time_reversal", t.time_reversal},
          {"match", t.match},             {"phase_floor", t.phase_floor}, {"round", t.round},
          {"born", t.born},               {"determinant", t.determinant}, {"identity", t.identity},
          {"dk_fd", t.dk_fd},             {"quadrature", t.quadrature}};
}

/// Density table with one box-density column per L and the largest
/// finite-box identity residual over those L.
struct DensityTable {
  SpectralDensity density;
  std::vector<double> L;
  /// box[j][i]: box density at k_i for L_j
  std::vector<std::vector<double>> box;
  std::vector<double> identity_residual;
};

/// Evaluates the box densities and identity residuals for every k of the
/// curve and every L.
inline DensityTable density_table(const Potential& p, const PhaseCurve& curve, double b0,
                                  std::vector<double> L, const SolverOptions& opt = {}) {
  DensityTable d;
  d.density = density_from_phase(curve, b0);
  d.L = std::move(L);
  const std::size_t n = d.density.k.size();
  d.box.assign(d.L.size(), std::vector<double>(n));
  d.identity_residual.assign(n, 0.0);
  for (double l : d.L)
    if (!(l > p.support_radius())) throw DomainError("density: every L must exceed the support radius");
  SolverOptions o = opt;
  o.keep_wavefunction = true;
  numerics::parallel_for(n, [&](std::size_t i) {
    const double k = d.density.k[i];
    const auto ph = local_phases(p, k, opt);
    const auto sol = solve_direct(p, k, o);
    for (std::size_t j = 0; j < d.L.size(); ++j) {
      const auto id = finite_L_identity(ph, sol, d.L[j]);
      d.box[j][i] = id.box;
      d.identity_residual[i] = std::max(d.identity_residual[i], id.residual());
    }
  });
  return d;
}

inline std::string density_csv(const DensityTable& d) {
  std::string out = "k,rho_smooth";
  for (double L : d.L) out += ",rho_box(L=" + fmt(L) + ")";
  out += ",identity_residual\n";
  for (std::size_t i = 0; i < d.density.k.size(); ++i) {
    out += fmt(d.density.k[i]) + "," + fmt(d.density.rho_smooth[i]);
    for (const auto& col : d.box) out += "," + fmt(col[i]);
    out += "," + fmt(d.identity_residual[i]) + "\n";
  }
  return out;
}

inline json density_sidecar(const DensityTable& d, const std::string& potential, const Tolerances& tol) {
  return {{"potential", potential},
          {"delta_weight", d.density.delta_weight},
          {"b0", d.density.b0},
          {"moment0", d.density.moment0},
          {"L", d.L},
          {"n_k", d.density.k.size()},
          {"k_min", d.density.k.front()},
          {"k_max", d.density.k.back()},
          {"tolerances", to_json(tol)}};
}

inline json to_json(const LevinsonReport& r) {
  json j = {{"potential", r.potential},
            {"delta_phi", r.delta_phi},
            {"phi_t_0", r.phi_t_0},
            {"phi_t_inf", r.phi_t_inf},
            {"b0", r.b0},
            {"resonance", r.resonance},
            {"extrapolated_abs_b0", r.extrapolated_abs_b},
            {"n_levinson", r.n_levinson},
            {"n_oracle", r.n_oracle},
            {"oracle_method", r.oracle_method},
            {"near_threshold", r.near_threshold},
            {"det_winding", r.det_winding},
            {"sum_rule", r.sum_rule},
            {"distance", r.distance()},
            {"integer_distance", r.integer_distance()},
            {"verdict", r.verdict()},
            {"moment0", r.moment0}};
  if (r.n_surrogate) j["n_surrogate"] = *r.n_surrogate;
  j["provenance"] = {{"n_k", r.n_k},
                     {"k_min", r.k_min},
                     {"k_max", r.k_max},
                     {"refinements", r.refinements},
                     {"born_anchor", r.born_anchor},
                     {"phi_t_k_max", r.phi_t_k_max},
                     {"max_unitarity_residual", r.max_unitarity_residual},
                     {"max_time_reversal_residual", r.max_time_reversal_residual},
                     {"max_det_residual", r.max_det_residual},
                     {"max_match_residual", r.max_match_residual},
                     {"oracle_step", r.oracle_step},
                     {"oracle_box_half_width", r.oracle_box},
                     {"tolerances", to_json(r.tol)}};
  return j;
}

/// Writes through a temporary file and a rename so readers never see a
/// partial file.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace levinson::io
