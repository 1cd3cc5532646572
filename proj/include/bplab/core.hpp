#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bplab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(const std::string& what, std::size_t expected, std::size_t got)
      : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

/// Raised for block sizes that admit no orthogonal rotation family.
class UnsupportedKappa : public Error {
 public:
  explicit UnsupportedKappa(int kappa)
      : Error("kappa = " + std::to_string(kappa) +
              " is unsupported: a family {I, J_1, ..., J_{kappa-1}} of pairwise anticommuting "
              "orthogonal skew matrices exists only for kappa in {1, 2, 4, 8} "
              "(Hurwitz-Radon); these are the real, complex, quaternion and octonion cases"),
        kappa_(kappa) {}
  int kappa() const { return kappa_; }

 private:
  int kappa_;
};

/// A (kappa, n) pair or exponent for which no Fourier route is implemented.
class UnsupportedCase : public Error {
 public:
  using Error::Error;
};

/// Root finding, positivity or other numerical contract failed.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class NoNegativityFound : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kPi = std::numbers::pi;

/// Surface area |S^{d-1}| of the unit sphere in R^d.
inline double sphere_area(int d) {
  if (d < 1) throw InvalidArgument("sphere_area: dimension must be >= 1");
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Volume of the unit Euclidean ball in R^d.
inline double ball_volume(int d) { return sphere_area(d) / d; }

}  // namespace bplab
