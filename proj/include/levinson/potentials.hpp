#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/interpolators/makima.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levinson/errors.hpp"
#include "levinson/numerics.hpp"
#include "levinson/tolerances.hpp"

namespace levinson {

using complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Potential kinds. Energies are in units where E = k^2 and the Schroedinger
// equation reads psi'' + k^2 psi = u(x) psi.
// ---------------------------------------------------------------------------

/// u(x) = -strength / cosh^2(x). `ell` is the integer l when strength equals
/// l(l+1) (the reflectionless family), 0 otherwise.
struct PoschlTeller {
  double strength;
  int ell = 0;
};

/// u(x) = g delta(x). Handled symbolically: no grid can sample it.
struct Delta {
  double g;
};

/// u(x) = depth for |x| < half_width, 0 otherwise. depth < 0 is attractive.
struct SquareWell {
  double depth;
  double half_width;
};

/// u(x) = amplitude exp(-(x - center)^2 / (2 width^2)).
struct Gaussian {
  double amplitude;
  double center;
  double width;
};

using AnalyticTerm = std::variant<PoschlTeller, Delta, SquareWell, Gaussian>;

/// Sum of analytic terms; the empty composite is the free potential.
struct Composite {
  std::vector<AnalyticTerm> terms;
};

/// Tabulated potential, interpolated by a C^1 cubic (modified Akima) between
/// samples and zero outside the open sample range.
struct Sampled {
  std::vector<double> x;
  std::vector<double> u;
};

using PotentialKind =
    std::variant<Sampled, PoschlTeller, Delta, SquareWell, Gaussian, Composite>;

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double term_value(const AnalyticTerm& term, double x) {
  return std::visit(
      overloaded{
          [x](const PoschlTeller& p) {
            const double c = std::cosh(x);
            return -p.strength / (c * c);
          },
          [](const Delta&) -> double {
            throw DomainError("delta potential is symbolic-only; it has no pointwise value");
          },
          [x](const SquareWell& s) { return std::abs(x) < s.half_width ? s.depth : 0.0; },
          [x](const Gaussian& g) {
            const double z = (x - g.center) / g.width;
            return g.amplitude * std::exp(-0.5 * z * z);
          }},
      term);
}

/// Smallest R with |term(x)| <= eps for |x| >= R.
inline double term_support(const AnalyticTerm& term, double eps) {
  return std::visit(
      overloaded{
          [eps](const PoschlTeller& p) {
            // sech^2 x < 4 exp(-2|x|)
            const double a = std::abs(p.strength);
            return a <= eps ? 0.0 : 0.5 * std::log(4.0 * a / eps);
          },
          [](const Delta&) { return 0.0; },
          [](const SquareWell& s) { return s.half_width; },
          [eps](const Gaussian& g) {
            const double a = std::abs(g.amplitude);
            if (a <= eps) return std::abs(g.center);
            return std::abs(g.center) + g.width * std::sqrt(2.0 * std::log(a / eps));
          }},
      term);
}

inline double term_moment0(const AnalyticTerm& term) {
  return std::visit(
      overloaded{[](const PoschlTeller& p) { return -2.0 * p.strength; },
                 [](const Delta& d) { return d.g; },
                 [](const SquareWell& s) { return 2.0 * s.half_width * s.depth; },
                 [](const Gaussian& g) {
                   return g.amplitude * g.width * std::sqrt(two_pi);
                 }},
      term);
}

/// Closed form of int (1 + x^2)|u| dx for a single term.
inline double term_moment2(const AnalyticTerm& term) {
  return std::visit(
      overloaded{[](const PoschlTeller& p) {
                   // int sech^2 = 2, int x^2 sech^2 = pi^2 / 6
                   return std::abs(p.strength) * (2.0 + pi * pi / 6.0);
                 },
                 [](const Delta& d) { return std::abs(d.g); },
                 [](const SquareWell& s) {
                   const double a = s.half_width;
                   return std::abs(s.depth) * (2.0 * a + 2.0 * a * a * a / 3.0);
                 },
                 [](const Gaussian& g) {
                   const double norm = std::abs(g.amplitude) * g.width * std::sqrt(two_pi);
                   return norm * (1.0 + g.width * g.width + g.center * g.center);
                 }},
      term);
}

inline void term_breakpoints(const AnalyticTerm& term, std::vector<double>& out) {
  if (const auto* s = std::get_if<SquareWell>(&term)) {
    out.push_back(-s->half_width);
    out.push_back(s->half_width);
  } else if (std::holds_alternative<Delta>(term)) {
    out.push_back(0.0);
  }
}

inline void validate_term(const AnalyticTerm& term) {
  std::visit(overloaded{[](const PoschlTeller& p) {
                          if (!std::isfinite(p.strength))
                            throw InvalidParameter("sech^2 well: strength must be finite");
                        },
                        [](const Delta& d) {
                          if (!std::isfinite(d.g) || d.g == 0.0)
                            throw InvalidParameter(
                                "delta: coupling g must be finite and non-zero "
                                "(build the free potential as an empty composite)");
                        },
                        [](const SquareWell& s) {
                          if (!std::isfinite(s.depth) || !(s.half_width > 0.0) ||
                              !std::isfinite(s.half_width))
                            throw InvalidParameter("square well: need finite depth and half_width > 0");
                        },
                        [](const Gaussian& g) {
                          if (!std::isfinite(g.amplitude) || !std::isfinite(g.center) ||
                              !(g.width > 0.0) || !std::isfinite(g.width))
                            throw InvalidParameter("gaussian: need finite amplitude/center and width > 0");
                        }},
             term);
}

inline std::string term_name(const AnalyticTerm& term) {
  std::ostringstream os;
  os.precision(6);
  std::visit(overloaded{[&](const PoschlTeller& p) {
                          if (p.ell > 0)
                            os << "poschl-teller(l=" << p.ell << ")";
                          else
                            os << "sech2(lambda=" << p.strength << ")";
                        },
                        [&](const Delta& d) { os << "delta(g=" << d.g << ")"; },
                        [&](const SquareWell& s) {
                          os << "square-well(depth=" << s.depth << ",half_width=" << s.half_width
                             << ")";
                        },
                        [&](const Gaussian& g) {
                          os << "gaussian(amplitude=" << g.amplitude << ",center=" << g.center
                             << ",width=" << g.width << ")";
                        }},
             term);
  return os.str();
}

}  // namespace detail

/// A real local potential together with the metadata the solvers need:
/// support radius, moment integrals and discontinuity locations.
/// Immutable after construction and cheap to copy.
class Potential {
 public:
  /// Validates the kind and precomputes metadata. Throws InvalidParameter for
  /// malformed parameters and DomainError when int (1+x^2)|u| is not finite.
  explicit Potential(PotentialKind kind, double support_eps = Tolerances{}.support_eps)
      : kind_(std::move(kind)), support_eps_(support_eps) {
    if (!(support_eps_ > 0.0)) throw InvalidParameter("support_eps must be positive");
    std::visit(detail::overloaded{
                   [this](const Sampled& s) { init_sampled(s); },
                   [this](const Composite& c) { init_composite(c); },
                   [this](const auto& term) { init_terms({AnalyticTerm{term}}, true); }},
               kind_);
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()),
                       breakpoints_.end());
    if (!std::isfinite(moment2_))
      throw DomainError("potential violates the scattering condition int (1+x^2)|u| dx < inf");
  }

  const PotentialKind& kind() const noexcept { return kind_; }

  /// u(x). Throws DomainError for the symbolic delta kind.
  double operator()(double x) const {
    if (is_delta()) return detail::term_value(std::get<Delta>(kind_), x);
    return smooth_value(x);
  }
  double evaluate(double x) const { return (*this)(x); }

  /// Regular part of u(x); point interactions (delta) contribute zero here and
  /// are reported separately by point_interactions().
  double smooth_value(double x) const {
    return std::visit(
        detail::overloaded{
            [x, this](const Sampled& s) {
              if (!(x > s.x.front() && x < s.x.back())) return 0.0;
              return (*interp_)(x);
            },
            [x](const Composite& c) {
              double acc = 0.0;
              for (const auto& t : c.terms) acc += detail::term_value(t, x);
              return acc;
            },
            [](const Delta&) { return 0.0; },
            [x](const auto& term) { return detail::term_value(AnalyticTerm{term}, x); }},
        kind_);
  }

  /// Value of the regular part on the open interval (lo, hi), taking the
  /// one-sided limit when x sits on an endpoint (a discontinuity).
  double smooth_value_inside(double x, double lo, double hi) const {
    const double nudge = 1e-12 * (1.0 + std::abs(x));
    if (x - lo < nudge) x = std::min(lo + nudge, 0.5 * (lo + hi));
    if (hi - x < nudge) x = std::max(hi - nudge, 0.5 * (lo + hi));
    return smooth_value(x);
  }

  /// (position, coupling) of delta-function terms.
  std::vector<std::pair<double, double>> point_interactions() const {
    if (const auto* d = std::get_if<Delta>(&kind_)) return {{0.0, d->g}};
    return {};
  }

  bool is_delta() const noexcept { return std::holds_alternative<Delta>(kind_); }
  std::optional<double> delta_coupling() const {
    if (const auto* d = std::get_if<Delta>(&kind_)) return d->g;
    return std::nullopt;
  }
  bool is_free() const noexcept {
    const auto* c = std::get_if<Composite>(&kind_);
    return c != nullptr && c->terms.empty();
  }
  /// l for the reflectionless integer sech^2 wells, 0 otherwise.
  int poschl_teller_ell() const noexcept {
    const auto* p = std::get_if<PoschlTeller>(&kind_);
    return p ? p->ell : 0;
  }

  /// |u(x)| <= support_eps for |x| >= support_radius().
  double support_radius() const noexcept { return support_radius_; }
  double support_eps() const noexcept { return support_eps_; }
  /// <u> = int u dx
  double moment0() const noexcept { return moment0_; }
  /// int (1 + x^2) |u| dx
  double moment2() const noexcept { return moment2_; }
  /// Sorted locations where u (or its regular part) is discontinuous.
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

  /// Upper bound estimate of |u| on [lo, hi] from dense sampling.
  double max_abs_on(double lo, double hi) const {
    if (is_delta() || is_free()) return 0.0;
    constexpr int n = 64;
    double m = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / n;
      m = std::max(m, std::abs(smooth_value_inside(x, lo, hi)));
    }
    return m;
  }

  std::string name() const {
    return std::visit(
        detail::overloaded{
            [](const Sampled& s) {
              return "sampled(" + std::to_string(s.x.size()) + " points)";
            },
            [](const Composite& c) {
              if (c.terms.empty()) return std::string("free");
              std::string out = "composite[";
              for (std::size_t i = 0; i < c.terms.size(); ++i)
                out += (i ? "+" : "") + detail::term_name(c.terms[i]);
              return out + "]";
            },
            [](const auto& term) { return detail::term_name(AnalyticTerm{term}); }},
        kind_);
  }

 private:
  void init_terms(const std::vector<AnalyticTerm>& terms, bool single) {
    moment0_ = 0.0;
    support_radius_ = 0.0;
    const double eps_each = support_eps_ / static_cast<double>(std::max<std::size_t>(1, terms.size()));
    for (const auto& t : terms) {
      detail::validate_term(t);
      moment0_ += detail::term_moment0(t);
      support_radius_ = std::max(support_radius_, detail::term_support(t, eps_each));
      detail::term_breakpoints(t, breakpoints_);
    }
    if (single) {
      moment2_ = detail::term_moment2(terms.front());
    } else if (terms.empty()) {
      moment2_ = 0.0;
    } else {
      moment2_ = integrate_moment(/*weighted=*/true).first;
    }
  }

  void init_composite(const Composite& c) {
    for (const auto& t : c.terms)
      if (std::holds_alternative<Delta>(t))
        throw InvalidParameter("composite potentials cannot contain delta terms");
    init_terms(c.terms, false);
  }

  void init_sampled(const Sampled& s) {
    if (s.x.size() != s.u.size() || s.x.size() < 4)
      throw InvalidParameter("sampled potential: need >= 4 (x, u) pairs of equal length");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.u[i]))
        throw InvalidParameter("sampled potential: non-finite sample");
      if (i > 0 && !(s.x[i] > s.x[i - 1]))
        throw InvalidParameter("sampled potential: x must be strictly increasing");
    }
    auto xs = s.x;
    auto us = s.u;
    interp_ = std::make_shared<const Interpolator>(std::move(xs), std::move(us));
    support_radius_ = std::max(std::abs(s.x.front()), std::abs(s.x.back()));
    breakpoints_ = {s.x.front(), s.x.back()};
    const auto [m0, m2] = integrate_moments();
    moment0_ = m0;
    moment2_ = m2;
  }

  std::pair<double, double> integrate_moments() const {
    return {integrate_moment(false).first, integrate_moment(true).first};
  }

 public:
  /// Adaptive Gauss-Kronrod of u (or (1+x^2)|u| when weighted) over the
  /// support, split at breakpoints. Returns (value, error estimate).
  std::pair<double, double> integrate_moment(bool weighted) const {
    using boost::math::quadrature::gauss_kronrod;
    std::vector<double> cuts{-support_radius_, support_radius_};
    for (double b : breakpoints_)
      if (b > -support_radius_ && b < support_radius_) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    double err_total = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      const double lo = cuts[i - 1];
      const double hi = cuts[i];
      if (!(hi > lo)) continue;
      auto f = [&](double x) {
        const double u = smooth_value_inside(x, lo, hi);
        return weighted ? (1.0 + x * x) * std::abs(u) : u;
      };
      double err = 0.0;
      total += gauss_kronrod<double, 31>::integrate(f, lo, hi, 20, 1e-13, &err);
      err_total += err;
    }
    return {total, err_total};
  }

 private:
  using Interpolator = boost::math::interpolators::makima<std::vector<double>>;

  PotentialKind kind_;
  double support_eps_;
  double support_radius_ = 0.0;
  double moment0_ = 0.0;
  double moment2_ = 0.0;
  std::vector<double> breakpoints_;
  std::shared_ptr<const Interpolator> interp_;

};

struct MomentIntegrals {
  double moment0;
  double moment2;
  double error_estimate;
};

/// Recomputes <u> and int (1+x^2)|u| by adaptive quadrature over
/// [-support_radius, support_radius]. Delta: (g, |g|) by definition.
inline MomentIntegrals moment_integrals(const Potential& p, const Tolerances& tol = {}) {
  if (const auto g = p.delta_coupling()) return {*g, std::abs(*g), 0.0};
  if (p.is_free()) return {0.0, 0.0, 0.0};
  const auto [m0, e0] = p.integrate_moment(false);
  const auto [m2, e2] = p.integrate_moment(true);
  const double err = std::max(e0, e2);
  if (!(err <= tol.quadrature * std::max(1.0, std::abs(m2))))
    throw AccuracyError("moment quadrature did not converge", err);
  return {m0, m2, err};
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// u(x) = -l(l+1) / cosh^2 x, reflectionless for integer l >= 1.
inline Potential make_poschl_teller(int ell) {
  if (ell < 1) throw InvalidParameter("poschl-teller: l must be >= 1");
  return Potential(PoschlTeller{static_cast<double>(ell) * (ell + 1), ell});
}

/// u(x) = -lambda / cosh^2 x for arbitrary real lambda.
inline Potential make_sech2_well(double lambda) {
  int ell = 0;
  // recognise the integer family so closed forms stay available
  const double nu = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * std::max(lambda, 0.0)));
  if (lambda > 0.0 && std::abs(nu - std::round(nu)) < 1e-14 && std::round(nu) >= 1.0)
    ell = static_cast<int>(std::round(nu));
  return Potential(PoschlTeller{lambda, ell});
}

inline Potential make_delta(double g) { return Potential(Delta{g}); }

inline Potential make_square_well(double depth, double half_width) {
  return Potential(SquareWell{depth, half_width});
}

inline Potential make_gaussian(double amplitude, double center, double width) {
  return Potential(Gaussian{amplitude, center, width});
}

inline Potential make_composite(std::vector<AnalyticTerm> terms) {
  return Potential(Composite{std::move(terms)});
}

inline Potential make_free() { return Potential(Composite{}); }

inline Potential make_sampled(std::vector<double> x, std::vector<double> u) {
  return Potential(Sampled{std::move(x), std::move(u)});
}

/// Narrow square well of width w and depth g / w standing in for g delta(x)
/// on the generic numerical path.
inline Potential make_delta_surrogate(double g, double width = 1e-3) {
  if (g == 0.0 || !std::isfinite(g)) throw InvalidParameter("delta surrogate: g must be non-zero");
  if (!(width > 0.0)) throw InvalidParameter("delta surrogate: width must be positive");
  return make_square_well(g / width, 0.5 * width);
}

/// Transmission and reflection amplitudes in closed form.
struct Amplitudes {
  complex t;
  complex b;
};

/// Closed-form t(k), b(k) where known: the l = 1 sech^2 well
/// (t = (ik-1)/(ik+1), b = 0) and the delta (b = g/(2ik-g), t = 1 + b).
/// Other kinds return nullopt.
inline std::optional<Amplitudes> closed_form_amplitudes(const Potential& p, double k) {
  if (!(k > 0.0)) throw DomainError("closed_form_amplitudes: k must be positive");
  const complex ik{0.0, k};
  if (p.poschl_teller_ell() == 1) return Amplitudes{(ik - 1.0) / (ik + 1.0), complex{0.0, 0.0}};
  if (const auto g = p.delta_coupling()) {
    const complex b = *g / (2.0 * ik - *g);
    return Amplitudes{1.0 + b, b};
  }
  return std::nullopt;
}

}  // namespace levinson
