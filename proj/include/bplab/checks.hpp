#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "bplab/body.hpp"
#include "bplab/estimate.hpp"
#include "bplab/random.hpp"
#include "bplab/rotation.hpp"

namespace bplab {

/// Max over sampled (x, sigma) of |gauge(R_sigma x) - gauge(x)| / gauge(x), sigma Haar on SO(kappa).
inline double check_invariance(const BodySpec& body, std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw InvalidArgument("check_invariance: n_samples must be >= 1");
  const int dim = body.dim();
  const std::size_t chunks = chunk_count(n_samples);
  std::vector<double> worst(chunks, 0.0);
  parallel_chunks(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, c);
    std::vector<double> x(dim), y(dim);
    for (std::int64_t i = 0; i < chunk_length(c, n_samples); ++i) {
      sample_sphere(rng, x);
      const Eigen::MatrixXd sigma = random_rotation(body.kappa, rng);
      block_rotate_into(sigma, x, y);
      const double gx = gauge_unchecked(body, x);
      worst[c] = std::max(worst[c], std::abs(gauge_unchecked(body, y) - gx) / gx);
    }
  });
  double w = 0.0;
  for (double v : worst) w = std::max(w, v);
  return w;
}

struct ConvexityReport {
  std::int64_t n_pairs = 0;
  std::int64_t violations = 0;
  double worst_margin = 0.0;  // max of gauge((x + y) / 2) - 1
  std::vector<double> witness_x, witness_y;
  std::uint64_t seed = 0;
};

/// Midpoint test on pairs of boundary points; a violation is gauge((x + y) / 2) > 1 + 1e-9.
///
/// Half the pairs are independent uniform directions. The other half are local pairs:
/// x has a random subset of blocks zeroed with probability 1/2, and y is x moved by a
/// log-uniform step in [1e-3, 0.5], half the time only inside the zeroed blocks.
/// Local pairs probe curvature, including the faces where some block norm vanishes.
inline ConvexityReport check_convexity(const BodySpec& body, std::int64_t n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw InvalidArgument("check_convexity: n_pairs must be >= 1");
  const int dim = body.dim(), kappa = body.kappa, n = body.n;
  const std::size_t chunks = chunk_count(n_pairs);
  std::vector<ConvexityReport> part(chunks);
  parallel_chunks(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, 0xc0de0000ULL + c);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> x(dim), y(dim), v(dim), mid(dim);
    std::vector<bool> zeroed(n);
    ConvexityReport& r = part[c];
    r.worst_margin = -std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < chunk_length(c, n_pairs); ++i) {
      const bool local = (i % 2) == 1;
      sample_sphere(rng, x);
      if (!local) {
        sample_sphere(rng, y);
      } else {
        std::fill(zeroed.begin(), zeroed.end(), false);
        bool any_zero = false;
        if (unif(rng) < 0.5) {
          for (int b = 0; b < n; ++b) zeroed[b] = unif(rng) < 0.5;
          int kept = 0;
          for (int b = 0; b < n; ++b) kept += zeroed[b] ? 0 : 1;
          if (kept == 0) zeroed[rng() % n] = false;
          for (int b = 0; b < n; ++b)
            if (zeroed[b]) {
              any_zero = true;
              for (int k = 0; k < kappa; ++k) x[b * kappa + k] = 0.0;
            }
        }
        sample_sphere(rng, v);
        if (any_zero && unif(rng) < 0.5)
          for (int b = 0; b < n; ++b)
            if (!zeroed[b])
              for (int k = 0; k < kappa; ++k) v[b * kappa + k] = 0.0;
        const double gx = gauge_unchecked(body, x);
        const double step = std::exp(std::log(1e-3) + unif(rng) * std::log(500.0)) / gauge_unchecked(body, v);
        for (int k = 0; k < dim; ++k) y[k] = x[k] / gx + step * v[k];
      }
      const double gx = gauge_unchecked(body, x), gy = gauge_unchecked(body, y);
      for (int k = 0; k < dim; ++k) {
        x[k] /= gx;
        y[k] /= gy;
        mid[k] = 0.5 * (x[k] + y[k]);
      }
      const double margin = gauge_unchecked(body, mid) - 1.0;
      if (margin > r.worst_margin) {
        r.worst_margin = margin;
        r.witness_x = x;
        r.witness_y = y;
      }
      if (margin > 1e-9) ++r.violations;
    }
  });
  ConvexityReport out;
  out.n_pairs = n_pairs;
  out.seed = seed;
  out.worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& r : part) {
    out.violations += r.violations;
    if (r.worst_margin > out.worst_margin) {
      out.worst_margin = r.worst_margin;
      out.witness_x = r.witness_x;
      out.witness_y = r.witness_y;
    }
  }
  return out;
}

}  // namespace bplab
