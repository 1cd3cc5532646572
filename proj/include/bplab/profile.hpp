#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bplab/core.hpp"

namespace bplab {

/// Smooth bump in the angle between a block-norm profile and `center`.
///
/// With b = center (b_i >= 0, sum b_i^2 = 1) and s the squared block-norm profile of
/// theta, the angle is arccos(sum_i b_i sqrt(s_i)), the geodesic distance from theta
/// to the set of unit vectors whose block norms equal b. The bump is
/// exp(1 - 1 / (1 - (angle / width)^2)) inside `width` and 0 outside; its peak is 1.
struct BlockNormBump {
  std::vector<double> center;
  double width = 0.4;
};

/// sum_j coeff_j prod_i s_i^{exponents_j[i]}, s the squared block-norm profile.
struct BlockNormPolynomial {
  struct Term {
    std::vector<int> exponents;
    double coeff = 0.0;
  };
  std::vector<Term> terms;
};

/// Perturbation function h on the sphere. It depends on x only through the block
/// norms, so it is even and invariant under every block rotation.
struct PerturbationProfile {
  std::variant<BlockNormBump, BlockNormPolynomial> shape;
};

inline std::string profile_name(const PerturbationProfile& p) {
  return std::holds_alternative<BlockNormBump>(p.shape) ? "block_norm_bump" : "block_norm_polynomial";
}

inline void validate_profile(const PerturbationProfile& p, int n) {
  if (const auto* bump = std::get_if<BlockNormBump>(&p.shape)) {
    if (static_cast<int>(bump->center.size()) != n)
      throw DimensionMismatch("BlockNormBump center", n, bump->center.size());
    double s = 0.0;
    for (double b : bump->center) {
      if (b < 0.0) throw InvalidArgument("BlockNormBump: center entries must be >= 0");
      s += b * b;
    }
    if (std::abs(s - 1.0) > 1e-9) throw InvalidArgument("BlockNormBump: center must have unit norm");
    if (!(bump->width > 0.0)) throw InvalidArgument("BlockNormBump: width must be positive");
  } else {
    const auto& poly = std::get<BlockNormPolynomial>(p.shape);
    for (const auto& t : poly.terms) {
      if (static_cast<int>(t.exponents.size()) != n)
        throw DimensionMismatch("BlockNormPolynomial term", n, t.exponents.size());
      for (int a : t.exponents)
        if (a < 0) throw InvalidArgument("BlockNormPolynomial: negative exponent");
    }
  }
}

/// h evaluated at a point with squared block-norm profile s (sum s_i = 1).
inline double profile_value(const PerturbationProfile& p, std::span<const double> s) {
  if (const auto* bump = std::get_if<BlockNormBump>(&p.shape)) {
    double c = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) c += bump->center[i] * std::sqrt(std::max(s[i], 0.0));
    const double angle = std::acos(std::clamp(c, -1.0, 1.0));
    const double z = angle / bump->width;
    if (z >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - z * z));
  }
  const auto& poly = std::get<BlockNormPolynomial>(p.shape);
  constexpr int kMaxBlocks = 16, kMaxDegree = 24;
  if (s.size() > kMaxBlocks) throw InvalidArgument("BlockNormPolynomial: too many blocks");
  double pw[kMaxBlocks][kMaxDegree + 1];
  for (std::size_t i = 0; i < s.size(); ++i) {
    pw[i][0] = 1.0;
    for (int a = 1; a <= kMaxDegree; ++a) pw[i][a] = pw[i][a - 1] * s[i];
  }
  double total = 0.0;
  for (const auto& t : poly.terms) {
    double term = t.coeff;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (t.exponents[i] > kMaxDegree) throw InvalidArgument("BlockNormPolynomial: degree too high");
      term *= pw[i][t.exponents[i]];
    }
    total += term;
  }
  return total;
}

}  // namespace bplab
