#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace levinson {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

namespace numerics {

/// Geometrically spaced grid of n points from lo to hi inclusive.
inline std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("geometric_grid: need n >= 2 and 0 < lo < hi");
  std::vector<double> g(n);
  const double ratio = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo * std::exp(ratio * static_cast<double>(i));
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// Representative of `raw` (mod 2 pi) nearest to `reference`.
inline double nearest_branch(double raw, double reference) {
  return raw + two_pi * std::round((reference - raw) / two_pi);
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, two_pi);
  if (a <= -pi) a += two_pi;
  return a;
}

/// Least-squares polynomial of degree 2 through (x, y), evaluated at x0.
/// Falls back to lower degree when fewer than three points are supplied.
inline double quadratic_extrapolate(std::span<const double> x,
                                    std::span<const double> y, double x0) {
  const std::size_t n = x.size();
  if (n == 0 || n != y.size())
    throw std::invalid_argument("quadratic_extrapolate: size mismatch");
  if (n == 1) return y[0];
  // Shift and scale the abscissa for conditioning.
  double xm = 0.0;
  for (double v : x) xm += v;
  xm /= static_cast<double>(n);
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v - xm));
  if (scale == 0.0) scale = 1.0;
  const std::size_t deg = n >= 3 ? 2 : 1;
  const std::size_t m = deg + 1;
  double ata[3][3] = {};
  double aty[3] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (x[i] - xm) / scale;
    const double basis[3] = {1.0, s, s * s};
    for (std::size_t r = 0; r < m; ++r) {
      aty[r] += basis[r] * y[i];
      for (std::size_t c = 0; c < m; ++c) ata[r][c] += basis[r] * basis[c];
    }
  }
  // Gaussian elimination with partial pivoting on the (at most) 3x3 system.
  double coef[3] = {};
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(ata[r][col]) > std::abs(ata[piv][col])) piv = r;
    std::swap(ata[col], ata[piv]);
    std::swap(aty[col], aty[piv]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = ata[r][col] / ata[col][col];
      for (std::size_t c = col; c < m; ++c) ata[r][c] -= f * ata[col][c];
      aty[r] -= f * aty[col];
    }
  }
  for (std::size_t r = m; r-- > 0;) {
    double acc = aty[r];
    for (std::size_t c = r + 1; c < m; ++c) acc -= ata[r][c] * coef[c];
    coef[r] = acc / ata[r][r];
  }
  const double s0 = (x0 - xm) / scale;
  return coef[0] + coef[1] * s0 + (deg == 2 ? coef[2] * s0 * s0 : 0.0);
}

/// First derivative of samples y(x) on a strictly increasing, possibly
/// non-uniform grid. Interior points use the three-point centred formula,
/// endpoints the three-point one-sided formula (both second order).
inline std::vector<double> derivative(std::span<const double> x,
                                      std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3)
    throw std::invalid_argument("derivative: need at least three samples");
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = x[i] - x[i - 1];
    const double hr = x[i + 1] - x[i];
    d[i] = (-hr / (hl * (hl + hr))) * y[i - 1] + ((hr - hl) / (hl * hr)) * y[i] +
           (hl / (hr * (hl + hr))) * y[i + 1];
  }
  {
    const double h1 = x[1] - x[0];
    const double h2 = x[2] - x[1];
    d[0] = (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * y[0] +
           ((h1 + h2) / (h1 * h2)) * y[1] - (h1 / (h2 * (h1 + h2))) * y[2];
  }
  {
    const double h1 = x[n - 2] - x[n - 3];
    const double h2 = x[n - 1] - x[n - 2];
    d[n - 1] = (h2 / (h1 * (h1 + h2))) * y[n - 3] -
               ((h1 + h2) / (h1 * h2)) * y[n - 2] +
               ((2.0 * h2 + h1) / (h2 * (h1 + h2))) * y[n - 1];
  }
  return d;
}

inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i)
    acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

/// Composite Simpson rule over n (even) equal panels of width h.
template <typename T>
T simpson_uniform(std::span<const T> f, double h) {
  const std::size_t n = f.size() - 1;
  if (f.size() < 3 || n % 2 != 0)
    throw std::invalid_argument("simpson_uniform: need an even number of panels");
  T acc = f[0] + f[n];
  for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f[i];
  return acc * (h / 3.0);
}

/// Number of worker threads; LEVINSON_THREADS caps the hardware count.
inline unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LEVINSON_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Calls body(i) for i in [0, n) across thread_count() workers. Each index
/// is handled exactly once; the first exception thrown is rethrown.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace numerics
}  // namespace levinson
