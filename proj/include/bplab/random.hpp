#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "bplab/core.hpp"

namespace bplab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Sub-seed for stream `stream` of a computation seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t s = derive_seed(seed, stream);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

/// Uniform point on S^{dim-1} by Gaussian normalization; writes into `out`.
inline void sample_sphere(Rng& rng, std::span<double> out) {
  const std::size_t dim = out.size();
  if (dim == 0) throw InvalidArgument("sample_sphere: dim must be >= 1");
  if (dim == 1) {
    out[0] = (rng() >> 63) ? 1.0 : -1.0;
    return;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (double& v : out) {
      v = normal(rng);
      r2 += v * v;
    }
  } while (r2 < 1e-300);
  const double inv = 1.0 / std::sqrt(r2);
  for (double& v : out) v *= inv;
}

inline std::vector<double> sample_sphere(int dim, Rng& rng) {
  if (dim < 1) throw InvalidArgument("sample_sphere: dim must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(dim));
  sample_sphere(rng, v);
  return v;
}

namespace detail {

inline constexpr std::array<int, 24> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                                41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

inline double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace detail

/// Deterministic low-discrepancy points on S^{dim-1}: a Cranley-Patterson shifted
/// Halton sequence pushed through the inverse normal CDF and normalized.
inline std::vector<std::vector<double>> low_discrepancy_sphere(int dim, int count, std::uint64_t seed) {
  if (dim < 1 || dim > static_cast<int>(detail::kPrimes.size()))
    throw InvalidArgument("low_discrepancy_sphere: dim out of range");
  if (count < 0) throw InvalidArgument("low_discrepancy_sphere: negative count");
  Rng rng = make_rng(seed, 0x5eed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> shift(dim);
  for (double& s : shift) s = unif(rng);

  std::vector<std::vector<double>> pts;
  pts.reserve(count);
  for (std::uint64_t i = 1; pts.size() < static_cast<std::size_t>(count); ++i) {
    std::vector<double> v(dim);
    double r2 = 0.0;
    for (int c = 0; c < dim; ++c) {
      double u = detail::radical_inverse(i, detail::kPrimes[c]) + shift[c];
      u -= std::floor(u);
      u = std::clamp(u, 1e-12, 1.0 - 1e-12);
      v[c] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
      r2 += v[c] * v[c];
    }
    if (r2 < 1e-24) continue;
    const double inv = 1.0 / std::sqrt(r2);
    for (double& c : v) c *= inv;
    pts.push_back(std::move(v));
  }
  return pts;
}

}  // namespace bplab
