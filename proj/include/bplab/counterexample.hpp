#pragma once

#include <algorithm>
#include <functional>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bplab/body.hpp"
#include "bplab/checks.hpp"
#include "bplab/estimate.hpp"
#include "bplab/fourier.hpp"
#include "bplab/frame.hpp"
#include "bplab/integrate.hpp"
#include "bplab/section_transform.hpp"

namespace bplab {

/// B_q^{kappa n}: unit ball of (sum_i |x_i|^q)^{1/q} over the kappa-blocks.
inline BodySpec build_bq_ball(int kappa, int n, double q) {
  if (kappa != 1 && kappa != 2 && kappa != 4 && kappa != 8) throw UnsupportedKappa(kappa);
  return make_block_q_ball(kappa, n, q);
}

/// Witness directions of a scan grouped by block-norm profile.
struct WitnessCluster {
  std::vector<double> profile;  // sorted block norms b_1 >= ... >= b_n, sum b_i^2 = 1
  std::vector<std::size_t> members;  // indices into the scan
  double worst_z = 0.0;              // most negative value / sigma among members
};

struct WitnessRegion {
  int kappa = 1, n = 2;
  std::vector<WitnessCluster> clusters;  // most negative first
  std::vector<BlockVector> directions;
};

inline std::vector<double> sorted_block_norms(const BlockVector& x) {
  auto b = x.normalized().block_norms();
  std::sort(b.begin(), b.end(), std::greater<>());
  return b;
}

/// Profiles of the negative witnesses of `scan`, clustered greedily within distance 0.1
/// of a cluster's first member. Profiles are invariant under every block rotation.
inline WitnessRegion negativity_witness(const BodySpec& body, const ScanReport& scan) {
  if (scan.negative_witnesses.empty())
    throw NoNegativityFound("no direction with transform below -3 sigma for " + describe(body) +
                            "; the body may be a kappa-intersection body");
  WitnessRegion r{body.kappa, body.n, {}, {}};
  for (std::size_t j : scan.negative_witnesses) {
    const auto& v = scan.values[j].value;
    const double z = v.sigma() > 0.0 ? v.value / v.sigma() : -1e300;
    const auto b = sorted_block_norms(scan.directions[j]);
    r.directions.push_back(scan.directions[j]);
    bool placed = false;
    for (auto& c : r.clusters) {
      double d2 = 0.0;
      for (int i = 0; i < body.n; ++i) d2 += (b[i] - c.profile[i]) * (b[i] - c.profile[i]);
      if (std::sqrt(d2) < 0.1) {
        c.members.push_back(j);
        c.worst_z = std::min(c.worst_z, z);
        placed = true;
        break;
      }
    }
    if (!placed) r.clusters.push_back({b, {j}, z});
  }
  std::sort(r.clusters.begin(), r.clusters.end(),
            [](const WitnessCluster& a, const WitnessCluster& b) { return a.worst_z < b.worst_z; });
  return r;
}

/// K with ||x||_K^{-d} = ||x||_L^{-d} - epsilon |x|^{-d} h(x / |x|), d = kappa n - kappa.
inline BodySpec build_perturbed_pair(const BodySpec& L, const PerturbationProfile& profile, double epsilon) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("build_perturbed_pair: epsilon must be >= 0");
  if (epsilon == 0.0) return L;
  return make_perturbed(L, profile, epsilon);
}

struct ConvexitySearchStep {
  double epsilon = 0.0;
  std::int64_t violations = 0;
  double worst_margin = 0.0;
};

struct ConvexitySearchResult {
  double epsilon = 0.0;      // largest epsilon that passed
  double epsilon_star = 0.0; // star-body bound
  std::uint64_t seed = 0;    // certificate sample seed
  std::int64_t n_pairs = 0;
  std::vector<ConvexitySearchStep> trail;
};

/// Bisection on epsilon in (0, epsilon_star] for zero check_convexity violations.
inline ConvexitySearchResult convexity_search(const BodySpec& L, const PerturbationProfile& profile,
                                              std::int64_t n_pairs = 100000, std::uint64_t seed = 1,
                                              int steps = 24) {
  const ConvexityReport base = check_convexity(L, n_pairs, seed);
  if (base.violations > 0) throw InvalidArgument("convexity_search: L fails the convexity check");
  ConvexitySearchResult r;
  r.seed = seed;
  r.n_pairs = n_pairs;
  r.epsilon_star = admissible_epsilon(L, profile, 200000, seed);
  if (!std::isfinite(r.epsilon_star)) r.epsilon_star = 1e6;
  auto passes = [&](double eps) {
    const BodySpec K = make_perturbed_unchecked(L, profile, eps);
    ConvexityReport c;
    try {
      c = check_convexity(K, n_pairs, seed);
    } catch (const NumericalFailure&) {
      c.violations = n_pairs;
      c.worst_margin = std::numeric_limits<double>::infinity();
    }
    r.trail.push_back({eps, c.violations, c.worst_margin});
    return c.violations == 0;
  };
  double lo = 0.0, hi = r.epsilon_star * (1.0 - 1e-9);
  if (passes(hi)) {
    r.epsilon = hi;
    return r;
  }
  for (int s = 0; s < steps; ++s) {
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    if (lo == 0.0 && mid < 1e-7) break;
    (passes(mid) ? lo : hi) = mid;
  }
  if (!(lo > 1e-6))
    throw NumericalFailure("convexity_search: no epsilon above 1e-6 keeps the perturbed body convex "
                           "(degenerate profile)");
  r.epsilon = lo;
  return r;
}

enum class Verdict { Reversal, NoReversal, Inconclusive };

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Reversal:
      return "Reversal";
    case Verdict::NoReversal:
      return "NoReversal";
    case Verdict::Inconclusive:
      break;
  }
  return "Inconclusive";
}

struct SectionComparison {
  BlockVector xi;
  Estimate section_K, section_L;
  Estimate difference;  // paired, K - L
  bool leq = true;      // difference <= 3 sigma(difference)
};

struct BpComparisonReport {
  int n_directions = 0;
  double fraction_sections_leq = 0.0;
  Estimate vol_K, vol_L;
  Estimate vol_difference;  // paired, K - L
  Verdict verdict = Verdict::Inconclusive;
  std::vector<SectionComparison> sections;
  double max_section_z = 0.0;  // max over directions of difference / sigma
};

struct CompareParams {
  std::int64_t section_samples = 128000;
  std::int64_t volume_samples = 2000000;
};

namespace detail {

// Paired estimator: fn(rng, scratch, out) draws one sample and writes n_out values.
// Each chunk owns its scratch buffer of `scratch_size` doubles.
template <class Fn>
std::vector<SampleStats> paired_samples(std::int64_t n_samples, std::uint64_t seed, std::size_t n_out,
                                        std::size_t scratch_size, Fn&& fn) {
  const std::size_t chunks = chunk_count(n_samples);
  std::vector<std::vector<SampleStats>> part(chunks, std::vector<SampleStats>(n_out));
  parallel_chunks(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, c);
    std::vector<double> out(n_out), scratch(scratch_size);
    for (std::int64_t i = 0; i < chunk_length(c, n_samples); ++i) {
      fn(rng, std::span<double>(scratch), std::span<double>(out));
      for (std::size_t j = 0; j < n_out; ++j) part[c][j].add(out[j]);
    }
  });
  std::vector<SampleStats> total(n_out);
  for (const auto& p : part)
    for (std::size_t j = 0; j < n_out; ++j) total[j].merge(p[j]);
  return total;
}

}  // namespace detail

/// Paired section comparison at one direction: the same sample directions serve K and L.
inline SectionComparison compare_section(const BodySpec& K, const BodySpec& L, const BlockVector& xi,
                                         std::int64_t n_samples, std::uint64_t seed) {
  const SubspaceFrame f = section_frame(xi, hurwitz_radon_family(K.kappa));
  const int d = f.section_dim(), dim = K.dim();
  const double scale = sphere_area(d) / d;
  const auto st = detail::paired_samples(
      n_samples, seed, 3, d + dim, [&](Rng& rng, std::span<double> buf, std::span<double> out) {
        const auto z = buf.first(d);
        const auto th = buf.subspan(d, dim);
        sample_sphere(rng, z);
        f.embed_in(z, th);
        const double k = scale * std::pow(detail::checked_direction_gauge(K, th), -d);
        const double l = scale * std::pow(detail::checked_direction_gauge(L, th), -d);
        out[0] = k;
        out[1] = l;
        out[2] = k - l;
      });
  SectionComparison c{xi, detail::to_estimate(st[0], seed), detail::to_estimate(st[1], seed),
                      detail::to_estimate(st[2], seed), true};
  c.leq = c.difference.value <= 3.0 * c.difference.sigma();
  return c;
}

/// Sections at scan_directions(n_dirs) plus `extra` directions, and total volumes, all paired.
inline BpComparisonReport bp_compare(const BodySpec& K, const BodySpec& L, int n_dirs, const CompareParams& params,
                                     std::uint64_t seed, const std::vector<BlockVector>& extra = {}) {
  if (K.kappa != L.kappa || K.n != L.n) throw InvalidArgument("bp_compare: bodies live in different spaces");
  BpComparisonReport r;
  auto dirs = scan_directions(K.kappa, K.n, n_dirs, derive_seed(seed, 0xd125));
  dirs.insert(dirs.end(), extra.begin(), extra.end());
  r.n_directions = static_cast<int>(dirs.size());
  int leq = 0;
  r.max_section_z = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    SectionComparison c = compare_section(K, L, dirs[j], params.section_samples, derive_seed(seed, j));
    const double s = c.difference.sigma();
    const double z = s > 0.0 ? c.difference.value / s : (c.difference.value > 0.0 ? 1e300 : 0.0);
    r.max_section_z = std::max(r.max_section_z, z);
    leq += c.leq ? 1 : 0;
    r.sections.push_back(std::move(c));
  }
  r.fraction_sections_leq = static_cast<double>(leq) / r.n_directions;

  const int dim = K.dim();
  const double scale = sphere_area(dim) / dim;
  const std::uint64_t vseed = derive_seed(seed, 0x701);
  const auto st = detail::paired_samples(
      params.volume_samples, vseed, 3, dim, [&](Rng& rng, std::span<double> th, std::span<double> out) {
        sample_sphere(rng, th);
        const double k = scale * std::pow(detail::checked_direction_gauge(K, th), -dim);
        const double l = scale * std::pow(detail::checked_direction_gauge(L, th), -dim);
        out[0] = k;
        out[1] = l;
        out[2] = k - l;
      });
  r.vol_K = detail::to_estimate(st[0], vseed);
  r.vol_L = detail::to_estimate(st[1], vseed);
  r.vol_difference = detail::to_estimate(st[2], vseed);

  const double gap = r.vol_difference.value, sg = 3.0 * r.vol_difference.sigma();
  if (r.fraction_sections_leq < 1.0 || gap < -sg)
    r.verdict = Verdict::NoReversal;
  else if (gap > sg)
    r.verdict = Verdict::Reversal;
  else if (gap == 0.0 && sg == 0.0)
    r.verdict = Verdict::NoReversal;
  else
    r.verdict = Verdict::Inconclusive;
  return r;
}

/// Tunables of the counterexample pipeline.
struct CounterexampleOptions {
  int scan_dirs = 16;
  QuadratureParams scan_params{20000, {}, 0.04, 1e-13};
  double delta = 0.05;            // curvature regularization of L
  std::vector<int> degrees{6, 8, 10};
  double floor_fraction = 0.5;    // share of the first-order volume gain spent on the section floor
  std::int64_t design_samples = 200000;
  std::int64_t convexity_pairs = 100000;
  double epsilon_fraction = 0.5;  // epsilon = fraction * largest convex epsilon
  int compare_dirs = 256;
  CompareParams compare;
};

/// Candidate degree in the signed-profile design.
struct DesignCandidate {
  int degree = 0;
  double residual = 0.0;      // relative collocation residual of R h = g
  double min_singular = 0.0;
  Estimate objective;         // int ||theta||_L^{-kappa} h over S^{N-1}, floor included
  double floor = 0.0;         // beta: g >= beta on the whole sphere
  double per_sample_snr = 0.0;
};

/// Signed perturbation profile designed against the witness cluster.
///
/// h = R^{-1} g, R the section transform, g(s) = sum over distinct permutations p of the
/// witness profile c of (sum_i c_{p(i)} s_i)^k + beta (sum_i s_i)^k, s the squared block
/// norms. Then Vol(K ∩ H_xi) - Vol(L ∩ H_xi) = -(epsilon / d) g(xi) <= -(epsilon / d) beta for
/// every xi, and the first-order volume change is -(epsilon / d) int ||theta||_L^{-kappa} h.
struct ProfileDesign {
  PerturbationProfile profile;
  std::vector<double> center;  // squared witness profile
  int degree = 0;
  double beta = 0.0;
  std::vector<DesignCandidate> candidates;
};

namespace detail {

inline double orbit_power_sum(const std::vector<double>& c, std::span<const double> s, int k) {
  std::vector<double> p = c;
  std::sort(p.begin(), p.end());
  double total = 0.0;
  do {
    double dotp = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) dotp += p[i] * s[i];
    total += std::pow(dotp, k);
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

// int_{S^{N-1}} ||theta||_L^{-kappa} f(theta) for each f in fs, on one sample stream.
inline std::vector<SampleStats> weighted_sphere_integrals(const BodySpec& L,
                                                          const std::vector<PerturbationProfile>& fs,
                                                          std::int64_t n_samples, std::uint64_t seed) {
  const int dim = L.dim();
  const double area = sphere_area(dim);
  return paired_samples(
      n_samples, seed, fs.size(), dim + L.n, [&](Rng& rng, std::span<double> buf, std::span<double> out) {
        const auto th = buf.first(dim);
        const auto s = buf.subspan(dim, L.n);
        sample_sphere(rng, th);
        block_profile(th, L.kappa, s);
        const double w = area * std::pow(gauge_unchecked(L, th), -L.kappa);
        for (std::size_t j = 0; j < fs.size(); ++j) out[j] = w * profile_value(fs[j], s);
      });
}

}  // namespace detail

inline ProfileDesign design_profile(const BodySpec& L, const WitnessRegion& region, const CounterexampleOptions& opt,
                                    std::uint64_t seed) {
  if (region.clusters.empty()) throw NoNegativityFound("design_profile: empty witness region");
  const int n = L.n, d = L.section_dim();
  std::vector<double> c;
  for (double b : region.clusters.front().profile) c.push_back(b * b);
  ProfileDesign best;
  best.center = c;
  double best_snr = std::numeric_limits<double>::infinity();
  const double area_d = sphere_area(d);
  for (int k : opt.degrees) {
    const SectionTransform R(L.kappa, n, k);
    const auto sol = R.invert([&](std::span<const double> s) { return detail::orbit_power_sum(c, s, k); });
    DesignCandidate cand;
    cand.degree = k;
    cand.residual = sol.residual;
    cand.min_singular = sol.min_singular;
    if (sol.residual > 1e-8) {
      best.candidates.push_back(cand);
      continue;
    }
    // constant part: R[1] = |S^{d-1}|, so the floor beta costs beta / |S^{d-1}| per unit weight
    BlockNormPolynomial one;
    one.terms.push_back({std::vector<int>(n, 0), 1.0});
    const auto st = detail::weighted_sphere_integrals(L, {PerturbationProfile{sol.h}, PerturbationProfile{one}},
                                                      opt.design_samples, derive_seed(seed, k));
    const double J = st[0].mean(), W = st[1].mean();
    if (!(J < 0.0)) {
      cand.objective = detail::to_estimate(st[0], seed);
      best.candidates.push_back(cand);
      continue;
    }
    const double beta = opt.floor_fraction * (-J) * area_d / W;
    BlockNormPolynomial h = sol.h;
    h.terms.push_back({std::vector<int>(n, 0), beta / area_d});
    const auto full = detail::weighted_sphere_integrals(L, {PerturbationProfile{h}}, opt.design_samples,
                                                        derive_seed(seed, 100 + k));
    cand.objective = detail::to_estimate(full[0], seed);
    cand.floor = beta;
    const double sd = full[0].std_error() * std::sqrt(static_cast<double>(full[0].count()));
    cand.per_sample_snr = sd > 0.0 ? cand.objective.value / sd : 0.0;
    best.candidates.push_back(cand);
    if (cand.objective.value < 0.0 && cand.per_sample_snr < best_snr) {
      best_snr = cand.per_sample_snr;
      best.degree = k;
      best.beta = beta;
      best.profile = PerturbationProfile{h};
    }
  }
  if (best.degree == 0)
    throw NoNegativityFound("design_profile: no degree gives a negative first-order volume objective");
  return best;
}

struct CounterexampleCertificate {
  int kappa = 1, n = 2;
  double q = 4.0;
  std::uint64_t seed = 0;
  ScanReport scan;
  WitnessRegion region;
  BodySpec L_scan;   // B_q ball used for the witness scan
  BodySpec L;        // regularized B_q body used in the comparison
  ProfileDesign design;
  ConvexitySearchResult convexity;
  double epsilon = 0.0;
  BodySpec K;
  double invariance_K = 0.0;
  ConvexityReport convexity_K, convexity_L;
  BpComparisonReport comparison;
};

/// Scan B_q for witnesses, design the signed profile, pick epsilon, compare sections and volumes.
inline CounterexampleCertificate run_counterexample(int kappa, int n, double q, const CounterexampleOptions& opt,
                                                    std::uint64_t seed) {
  CounterexampleCertificate cert;
  cert.kappa = kappa;
  cert.n = n;
  cert.q = q;
  cert.seed = seed;
  cert.L_scan = build_bq_ball(kappa, n, q);
  cert.scan = kappa_intersection_scan(cert.L_scan, opt.scan_dirs, opt.scan_params, derive_seed(seed, 1));
  cert.region = negativity_witness(cert.L_scan, cert.scan);
  cert.L = opt.delta > 0.0 ? make_block_norm_body(kappa, n, q, std::vector<double>(n, 1.0), opt.delta) : cert.L_scan;
  cert.design = design_profile(cert.L, cert.region, opt, derive_seed(seed, 2));
  cert.convexity = convexity_search(cert.L, cert.design.profile, opt.convexity_pairs, derive_seed(seed, 3));
  cert.epsilon = opt.epsilon_fraction * cert.convexity.epsilon;
  cert.K = build_perturbed_pair(cert.L, cert.design.profile, cert.epsilon);
  cert.invariance_K = check_invariance(cert.K, 10000, derive_seed(seed, 4));
  cert.convexity_K = check_convexity(cert.K, opt.convexity_pairs, derive_seed(seed, 5));
  cert.convexity_L = check_convexity(cert.L, opt.convexity_pairs, derive_seed(seed, 5));
  cert.comparison = bp_compare(cert.K, cert.L, opt.compare_dirs, opt.compare, derive_seed(seed, 6), cert.region.directions);
  return cert;
}

}  // namespace bplab
