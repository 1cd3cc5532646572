#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bplab/body.hpp"
#include "bplab/estimate.hpp"
#include "bplab/frame.hpp"
#include "bplab/integrate.hpp"
#include "bplab/random.hpp"
#include "bplab/rotation.hpp"

namespace bplab {

enum class RouteKind { SectionVolume, EvenInteger, Fractional };

/// How the transform of ||x||^{-p} is obtained: q = kappa n - p - kappa.
struct FtRoute {
  RouteKind kind = RouteKind::SectionVolume;
  int m = 0;
  double q = 0.0;
};

inline std::string route_name(const FtRoute& r) {
  switch (r.kind) {
    case RouteKind::SectionVolume:
      return "section_volume";
    case RouteKind::EvenInteger:
      return "even_integer(m=" + std::to_string(r.m) + ")";
    case RouteKind::Fractional:
      break;
  }
  std::ostringstream os;
  os << "fractional(q=" << r.q << ")";
  return os.str();
}

/// (||x||^{-exponent})^ evaluated at the unit direction xi.
struct FtValue {
  BlockVector xi;
  double exponent = 0.0;
  Estimate value;
  FtRoute route;
};

/// c with (|x|_2^{-p})^ = c |xi|_2^{-N+p} on R^N, 0 < p < N.
inline double ball_ft_oracle(double p, int N) {
  if (!(p > 0.0 && p < N)) throw InvalidArgument("ball_ft_oracle: p must lie in (0, N)");
  return std::pow(2.0, N - p) * std::pow(kPi, 0.5 * N) * std::tgamma(0.5 * (N - p)) / std::tgamma(0.5 * p);
}

/// Route for exponent p on R^{kappa n}: q = 0 sections, q = 2m even differences
/// (1 <= m < (kappa n - kappa) / 2), q in (0, 2) or (2, 4) fractional.
inline FtRoute route_for_exponent(int kappa, int n, double p) {
  const int N = kappa * n;
  const double q = N - p - kappa;
  const double tol = 1e-12;
  if (std::abs(q) < tol) return {RouteKind::SectionVolume, 0, 0.0};
  for (int m = 1; m <= 2; ++m)
    if (std::abs(q - 2.0 * m) < tol) {
      if (2 * m >= N - kappa) break;
      return {RouteKind::EvenInteger, m, 2.0 * m};
    }
  if ((q > 1e-3 && q < 2.0 - 1e-3) || (q > 2.0 + 1e-3 && q < 4.0 - 1e-3)) return {RouteKind::Fractional, 0, q};
  std::ostringstream os;
  os << "no Fourier route for (kappa=" << kappa << ", n=" << n << ") at exponent " << p << ": q = " << q
     << " is outside {0} u (0,2) u {2} u (2,4) u {4}";
  throw UnsupportedCase(os.str());
}

/// Route for the kappa-intersection test, exponent kappa, q = kappa (n - 2).
inline FtRoute route_for_pair(int kappa, int n) {
  if (kappa != 1 && kappa != 2 && kappa != 4 && kappa != 8) throw UnsupportedKappa(kappa);
  return route_for_exponent(kappa, n, kappa);
}

struct ConstancyProbe {
  double max_z = 0.0;            // worst |S(eta) - S(xi)| in combined standard errors
  double max_rel_dev = 0.0;      // worst |S(eta) - S(xi)| / S(xi)
  int n_xi = 0, n_eta = 0;
  bool pass = true;
};

namespace detail {

// Points of S^{kappa-1}: a uniform circle for kappa = 2, seeded low-discrepancy points otherwise.
inline std::vector<std::vector<double>> circle_points(int kappa, int count, std::uint64_t seed) {
  if (kappa == 2) {
    std::vector<std::vector<double>> pts;
    for (int k = 0; k < count; ++k) {
      const double phi = 2.0 * kPi * (k + 0.5) / count;
      pts.push_back({std::cos(phi), std::sin(phi)});
    }
    return pts;
  }
  return low_discrepancy_sphere(kappa, count, seed);
}

inline ConstancyProbe probe_at(const BodySpec& body, const RotationFamily& fam, const BlockVector& xi, int n_eta,
                               const QuadratureParams& params, std::uint64_t seed) {
  ConstancyProbe r;
  r.n_xi = 1;
  r.n_eta = n_eta;
  const SubspaceFrame f = section_frame(xi, fam);
  const Estimate base = section_volume(body, f, params, seed);
  for (const auto& a : circle_points(body.kappa, n_eta, seed)) {
    BlockVector eta(body.kappa, body.n);
    f.embed_perp(a, eta.coords());
    eta = eta.normalized();
    const Estimate s = section_volume(body, section_frame(eta, fam), params, seed);
    r.max_z = std::max(r.max_z, z_distance(s, base));
    r.max_rel_dev = std::max(r.max_rel_dev, std::abs(s.value - base.value) / base.value);
  }
  r.pass = r.max_z <= 3.0;
  return r;
}

}  // namespace detail

/// Constancy of xi -> Vol(K ∩ H_xi) on S ∩ H_xi^perp at n_xi random xi and n_eta points each.
/// Each eta reuses the sample seed of its xi.
inline ConstancyProbe constancy_probe(const BodySpec& body, int n_xi, int n_eta, const QuadratureParams& params,
                                        std::uint64_t seed) {
  const RotationFamily fam = hurwitz_radon_family(body.kappa);
  ConstancyProbe total;
  Rng rng = make_rng(seed, 0x1e33a);
  for (int i = 0; i < n_xi; ++i) {
    const BlockVector xi(body.kappa, body.n, sample_sphere(body.dim(), rng));
    const ConstancyProbe p = detail::probe_at(body, fam, xi, n_eta, params, derive_seed(seed, i));
    total.max_z = std::max(total.max_z, p.max_z);
    total.max_rel_dev = std::max(total.max_rel_dev, p.max_rel_dev);
    total.pass = total.pass && p.pass;
  }
  total.n_xi = n_xi;
  total.n_eta = n_eta;
  return total;
}

namespace detail {

// kappa = 4 and 8 collapse the H^perp sphere integral only after a local constancy probe.
inline void require_constancy(const BodySpec& body, const RotationFamily& fam, const BlockVector& xi,
                              const QuadratureParams& params, std::uint64_t seed) {
  if (body.kappa <= 2) return;
  QuadratureParams small = params;
  small.n_samples = std::min<std::int64_t>(params.n_samples, 4096);
  const ConstancyProbe p = probe_at(body, fam, xi, 4, small, derive_seed(seed, 0xc0457));
  if (!p.pass)
    throw UnsupportedCase("section volumes are not constant on S ∩ H_xi^perp for this body (max z = " +
                          std::to_string(p.max_z) + "); the H^perp sphere integral cannot be collapsed");
}

inline BlockVector checked_unit(const BodySpec& body, const BlockVector& xi) {
  if (xi.kappa() != body.kappa || xi.n() != body.n) throw DimensionMismatch("xi", body.dim(), xi.dim());
  if (std::abs(xi.norm() - 1.0) > 1e-12) throw InvalidArgument("xi must be a unit vector");
  return xi;
}

}  // namespace detail

/// Exponent kappa n - kappa: Vol(K ∩ H_xi) (kappa n - kappa) Gamma(kappa/2) 2^{kappa-1} pi^{kappa/2}.
inline FtValue ft_via_sections(const BodySpec& body, const BlockVector& xi, const QuadratureParams& params,
                               std::uint64_t seed) {
  detail::checked_unit(body, xi);
  const int kappa = body.kappa, d = body.section_dim();
  const SubspaceFrame f = section_frame(xi, hurwitz_radon_family(kappa));
  const double c = d * std::tgamma(0.5 * kappa) * std::pow(2.0, kappa - 1) * std::pow(kPi, 0.5 * kappa);
  return {xi, static_cast<double>(d), section_volume(body, f, params, seed).scaled(c),
          {RouteKind::SectionVolume, 0, 0.0}};
}

/// Exponent kappa n - 2m - kappa: (-1)^m (2 pi)^kappa (kappa n - 2m - kappa) Delta^m A(0) / |S^{kappa-1}|.
inline FtValue ft_even_integer(const BodySpec& body, const BlockVector& xi, int m, const QuadratureParams& params,
                               std::uint64_t seed) {
  detail::checked_unit(body, xi);
  const int kappa = body.kappa, N = body.dim();
  if (m == 0) return ft_via_sections(body, xi, params, seed);
  if (m < 1 || 2 * m >= N - kappa)
    throw UnsupportedCase("ft_even_integer: need 1 <= m < (kappa n - kappa) / 2, got m = " + std::to_string(m));
  const RotationFamily fam = hurwitz_radon_family(kappa);
  detail::require_constancy(body, fam, xi, params, seed);
  const SubspaceFrame f = section_frame(xi, fam);
  const double c = (m % 2 ? -1.0 : 1.0) * std::pow(2.0 * kPi, kappa) * (N - 2 * m - kappa) / sphere_area(kappa);
  return {xi, static_cast<double>(N - 2 * m - kappa), laplacian_A_at_zero(body, f, m, params, seed).scaled(c),
          {RouteKind::EvenInteger, m, 2.0 * m}};
}

inline double ft_fractional_factor(int kappa, int n, double q) {
  const int N = kappa * n;
  return std::tgamma(0.5 * (q + kappa)) * (N - q - kappa) * std::pow(2.0, q + kappa) * std::pow(kPi, 0.5 * kappa) /
         sphere_area(kappa);
}

/// Exponent kappa n - q - kappa for q in (0, 2) or (2, 4):
/// frac_action(q) Gamma((q + kappa)/2) (kappa n - q - kappa) 2^{q+kappa} pi^{kappa/2} / |S^{kappa-1}|.
inline FtValue ft_fractional(const BodySpec& body, const BlockVector& xi, double q, const QuadratureParams& params,
                             std::uint64_t seed) {
  detail::checked_unit(body, xi);
  const int kappa = body.kappa, N = body.dim();
  if (std::abs(q - (N - kappa)) < 1e-12) throw UnsupportedCase("ft_fractional: q = kappa n - kappa gives exponent 0");
  const RotationFamily fam = hurwitz_radon_family(kappa);
  detail::require_constancy(body, fam, xi, params, seed);
  const SubspaceFrame f = section_frame(xi, fam);
  return {xi, N - q - kappa, frac_action(body, f, q, params, seed).scaled(ft_fractional_factor(kappa, body.n, q)),
          {RouteKind::Fractional, 0, q}};
}

inline FtValue ft_value(const BodySpec& body, const BlockVector& xi, const FtRoute& route,
                        const QuadratureParams& params, std::uint64_t seed) {
  switch (route.kind) {
    case RouteKind::SectionVolume:
      return ft_via_sections(body, xi, params, seed);
    case RouteKind::EvenInteger:
      return ft_even_integer(body, xi, route.m, params, seed);
    case RouteKind::Fractional:
      break;
  }
  return ft_fractional(body, xi, route.q, params, seed);
}

/// Scan directions: n_dirs seeded low-discrepancy points, then e_{kappa i} for each block
/// i, then the normalized sum of those.
inline std::vector<BlockVector> scan_directions(int kappa, int n, int n_dirs, std::uint64_t seed) {
  std::vector<BlockVector> dirs;
  for (auto& v : low_discrepancy_sphere(kappa * n, n_dirs, seed)) dirs.emplace_back(kappa, n, std::move(v));
  BlockVector diag(kappa, n);
  for (int i = 0; i < n; ++i) {
    BlockVector e(kappa, n);
    e[static_cast<std::size_t>(i) * kappa] = 1.0;
    dirs.push_back(e);
    diag[static_cast<std::size_t>(i) * kappa] = 1.0;
  }
  dirs.push_back(diag.normalized());
  return dirs;
}

struct ScanReport {
  std::string body_id;
  double exponent = 0.0;
  FtRoute route;
  std::vector<BlockVector> directions;
  std::vector<FtValue> values;
  double min_value = 0.0;
  double min_z = 0.0;                     // min of value / sigma; the margin of the scan
  std::vector<std::size_t> negative_witnesses;  // indices with value < -3 sigma
  std::size_t inconclusive = 0;
};

/// Transform of ||x||^{-kappa} on scan_directions(n_dirs); direction j uses seed derive_seed(seed, j).
inline ScanReport kappa_intersection_scan(const BodySpec& body, int n_dirs, const QuadratureParams& params,
                                          std::uint64_t seed) {
  validate_body(body);
  ScanReport r;
  r.body_id = describe(body);
  r.route = route_for_pair(body.kappa, body.n);
  r.exponent = body.kappa;
  r.directions = scan_directions(body.kappa, body.n, n_dirs, seed);
  r.min_value = std::numeric_limits<double>::infinity();
  r.min_z = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < r.directions.size(); ++j) {
    FtValue v = ft_value(body, r.directions[j], r.route, params, derive_seed(seed, j));
    const double s = v.value.sigma();
    r.min_value = std::min(r.min_value, v.value.value);
    const double z = s > 0.0 ? v.value.value / s : (v.value.value < 0 ? -1e300 : 1e300);
    r.min_z = std::min(r.min_z, z);
    if (v.value.value < -3.0 * s) r.negative_witnesses.push_back(j);
    if (v.value.inconclusive) ++r.inconclusive;
    r.values.push_back(std::move(v));
  }
  return r;
}

struct ParsevalResult {
  Estimate lhs, rhs;
  double rel_error = 0.0;
  int n_dirs = 0;
};

/// int_S (||x||_K^{-p})^ (||x||_L^{-N+p})^ against (2 pi)^N int_S ||x||_K^{-p} ||x||_L^{-N+p}.
inline ParsevalResult parseval_check(const BodySpec& K, const BodySpec& L, double p, int n_dirs,
                                     const QuadratureParams& params, std::uint64_t seed) {
  if (K.kappa != L.kappa || K.n != L.n) throw InvalidArgument("parseval_check: bodies live in different spaces");
  const int N = K.dim();
  const FtRoute rk = route_for_exponent(K.kappa, K.n, p);
  const FtRoute rl = route_for_exponent(K.kappa, K.n, N - p);
  const double area = sphere_area(N);

  SampleStats prod;
  double propagated = 0.0, numerical = 0.0;
  const auto dirs = low_discrepancy_sphere(N, n_dirs, seed);
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const BlockVector xi(K.kappa, K.n, dirs[j]);
    const Estimate a = ft_value(K, xi, rk, params, derive_seed(seed, 2 * j)).value;
    const Estimate b = ft_value(L, xi, rl, params, derive_seed(seed, 2 * j + 1)).value;
    prod.add(area * a.value * b.value);
    propagated += std::pow(area * std::hypot(a.std_error * b.value, b.std_error * a.value), 2);
    numerical += area * (std::abs(a.numerical_error * b.value) + std::abs(b.numerical_error * a.value));
  }
  ParsevalResult r;
  r.n_dirs = n_dirs;
  r.lhs.value = prod.mean();
  r.lhs.std_error = std::hypot(prod.std_error(), std::sqrt(propagated) / n_dirs);
  r.lhs.numerical_error = numerical / n_dirs;
  r.lhs.n_samples = n_dirs;
  r.lhs.seed = seed;

  const std::size_t chunks = chunk_count(params.n_samples);
  std::vector<SampleStats> part(chunks);
  const double c = std::pow(2.0 * kPi, N) * area;
  parallel_chunks(chunks, [&](std::size_t ch) {
    Rng rng = make_rng(derive_seed(seed, 0x9a75e), ch);
    std::vector<double> theta(N);
    for (std::int64_t i = 0; i < chunk_length(ch, params.n_samples); ++i) {
      sample_sphere(rng, theta);
      part[ch].add(c * std::pow(gauge_unchecked(K, theta), -p) * std::pow(gauge_unchecked(L, theta), p - N));
    }
  });
  SampleStats total;
  for (const auto& s : part) total.merge(s);
  r.rhs = detail::to_estimate(total, seed);
  r.rel_error = std::abs(r.lhs.value - r.rhs.value) / std::abs(r.rhs.value);
  return r;
}

}  // namespace bplab
