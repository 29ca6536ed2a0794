#pragma once

#include <stdexcept>
#include <string>

namespace levinson {

//! Base class for every failure raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! A constructor or operation received a parameter outside its domain
//! (e.g. l < 1 for a sech^2 well, g = 0 for a delta).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

//! A numerical argument lies outside the operation's domain (k <= 0, L <= R).
class DomainError : public Error {
 public:
  using Error::Error;
};

//! Quadrature or another iterative numerical step did not reach its target.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double estimate)
      : Error(what + " (residual estimate " + std::to_string(estimate) + ")"),
        estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

//! The integrated solution does not match a free wave in the matching window.
class MatchingFailure : public Error {
 public:
  MatchingFailure(const std::string& what, double k, double residual)
      : Error(what + " at k=" + std::to_string(k) +
              " (match residual " + std::to_string(residual) + ")"),
        k_(k),
        residual_(residual) {}
  double k() const noexcept { return k_; }
  double residual() const noexcept { return residual_; }

 private:
  double k_;
  double residual_;
};

//! Phase continuity could not be established between adjacent grid points.
class UnwrapFailure : public Error {
 public:
  using Error::Error;
};

//! |b(0+)| extrapolates into the band where generic and critical overlap.
class AmbiguousClassification : public Error {
 public:
  AmbiguousClassification(const std::string& what, double extrapolated)
      : Error(what + " (|b(0+)| ~ " + std::to_string(extrapolated) + ")"),
        extrapolated_(extrapolated) {}
  double extrapolated() const noexcept { return extrapolated_; }

 private:
  double extrapolated_;
};

//! The bound-state count changed under grid refinement.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace levinson
