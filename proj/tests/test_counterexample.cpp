#include <cmath>

#include <gtest/gtest.h>

#include "bplab/counterexample.hpp"
#include "bplab/io.hpp"

using namespace bplab;

namespace {

QuadratureParams samples(std::int64_t n) {
  QuadratureParams p;
  p.n_samples = n;
  return p;
}

BlockNormBump bump_at(std::vector<double> c, double width) {
  double s = 0.0;
  for (double v : c) s += v * v;
  for (double& v : c) v /= std::sqrt(s);
  return {c, width};
}

}  // namespace

TEST(BuildBqBall, Examples) {
  const BodySpec b = build_bq_ball(2, 4, 4.0);
  EXPECT_EQ(b.dim(), 8);
  EXPECT_EQ(check_convexity(b, 100000, 1).violations, 0);
  BlockVector e(2, 4);
  e[0] = 1.0;
  EXPECT_DOUBLE_EQ(gauge(b, e), 1.0);
  EXPECT_EQ(build_bq_ball(1, 5, 4.0).dim(), 5);
  EXPECT_THROW(build_bq_ball(3, 4, 4.0), UnsupportedKappa);
}

TEST(NegativityWitness, BlockFourBallHasWitnesses) {
  const BodySpec b = build_bq_ball(2, 4, 4.0);
  const ScanReport s = kappa_intersection_scan(b, 16, samples(20000), 1);
  const WitnessRegion r = negativity_witness(b, s);
  ASSERT_FALSE(r.clusters.empty());
  EXPECT_EQ(r.directions.size(), s.negative_witnesses.size());
  for (const auto& c : r.clusters) {
    double s2 = 0.0;
    for (std::size_t i = 0; i < c.profile.size(); ++i) {
      s2 += c.profile[i] * c.profile[i];
      if (i) {
        EXPECT_LE(c.profile[i], c.profile[i - 1]);
      }
    }
    EXPECT_NEAR(s2, 1.0, 1e-12);
    EXPECT_LT(c.worst_z, -3.0);
  }
  for (std::size_t i = 1; i < r.clusters.size(); ++i) EXPECT_LE(r.clusters[i - 1].worst_z, r.clusters[i].worst_z);
}

TEST(NegativityWitness, BallAndSmallQHaveNone) {
  for (const BodySpec& b : {make_ball(2, 4), build_bq_ball(2, 4, 1.5)}) {
    const ScanReport s = kappa_intersection_scan(b, 16, samples(20000), 2);
    EXPECT_THROW(negativity_witness(b, s), NoNegativityFound) << describe(b) << " min z " << s.min_z;
  }
}

TEST(PerturbedPair, ZeroEpsilonIsIdentity) {
  const BodySpec L = build_bq_ball(2, 4, 4.0);
  const BodySpec K = build_perturbed_pair(L, {bump_at({1, 0, 0, 0}, 0.4)}, 0.0);
  EXPECT_EQ(body_to_json(K).dump(), body_to_json(L).dump());
  EXPECT_THROW(build_perturbed_pair(L, {bump_at({1, 0, 0, 0}, 0.4)}, -1.0), InvalidArgument);
}

TEST(PerturbedPair, NonNegativeBumpShrinks) {
  const BodySpec L = build_bq_ball(2, 4, 4.0);
  const BodySpec K = build_perturbed_pair(L, {bump_at({1, 1, 0, 0}, 0.6)}, 0.3);
  Rng rng = make_rng(1, 0);
  for (int i = 0; i < 10000; ++i) {
    const auto x = sample_sphere(8, rng);
    ASSERT_GE(gauge(K, std::span<const double>(x)), gauge(L, std::span<const double>(x)));
  }
  EXPECT_LE(check_invariance(K, 10000, 2), 1e-10);
}

TEST(PerturbedPair, StarBoundEnforced) {
  const BodySpec L = build_bq_ball(2, 4, 4.0);
  const PerturbationProfile h{bump_at({1, 0, 0, 0}, 0.4)};
  const double eps_star = admissible_epsilon(L, h, 20000, 1);
  EXPECT_THROW(build_perturbed_pair(L, h, 1.5 * eps_star), NumericalFailure);
  try {
    build_perturbed_pair(L, h, 1.5 * eps_star);
  } catch (const NumericalFailure& e) {
    EXPECT_NE(std::string(e.what()).find("maximal admissible epsilon"), std::string::npos);
  }
}

TEST(ConvexitySearch, TinyPerturbationOfBallPasses) {
  const BodySpec ball = make_ball(2, 3);
  const BodySpec K = build_perturbed_pair(ball, {bump_at({1, 1, 1}, 0.5)}, 1e-4);
  EXPECT_EQ(check_convexity(K, 100000, 3).violations, 0);
}

TEST(ConvexitySearch, SharperBumpsAdmitSmallerEpsilon) {
  const BodySpec ball = make_ball(2, 3);
  double prev = std::numeric_limits<double>::infinity();
  for (double width : {0.8, 0.5, 0.3}) {
    const ConvexitySearchResult r = convexity_search(ball, {bump_at({1, 1, 1}, width)}, 20000, 4, 16);
    EXPECT_GT(r.epsilon, 1e-6);
    EXPECT_LE(r.epsilon, r.epsilon_star);
    EXPECT_LT(r.epsilon, prev) << "width " << width;
    EXPECT_FALSE(r.trail.empty());
    EXPECT_EQ(check_convexity(build_perturbed_pair(ball, {bump_at({1, 1, 1}, width)}, r.epsilon), 20000, 4).violations,
              0);
    prev = r.epsilon;
  }
}

TEST(ConvexitySearch, RejectsNonConvexBase) {
  EXPECT_THROW(convexity_search(build_bq_ball(2, 3, 0.5), {bump_at({1, 1, 1}, 0.5)}, 20000, 1), InvalidArgument);
}

TEST(BpCompare, IdenticalBodies) {
  const BodySpec L = build_bq_ball(2, 3, 4.0);
  const BpComparisonReport r = bp_compare(L, L, 8, {2000, 20000}, 1);
  EXPECT_EQ(r.fraction_sections_leq, 1.0);
  EXPECT_EQ(r.vol_difference.value, 0.0);
  EXPECT_EQ(r.verdict, Verdict::NoReversal);
}

TEST(BpCompare, SmallerBallIsNoReversal) {
  const BpComparisonReport r = bp_compare(make_ball(2, 3, 0.9), make_ball(2, 3), 8, {5000, 50000}, 2);
  EXPECT_EQ(r.fraction_sections_leq, 1.0);
  EXPECT_LT(r.vol_difference.value, 0.0);
  EXPECT_EQ(r.verdict, Verdict::NoReversal);
  EXPECT_NEAR(r.vol_K.value, std::pow(0.9, 6) * ball_volume(6), 1e-9);
}

TEST(BpCompare, LargerBodyFailsSections) {
  const BpComparisonReport r = bp_compare(make_ball(2, 3, 1.1), make_ball(2, 3), 8, {5000, 50000}, 3);
  EXPECT_LT(r.fraction_sections_leq, 1.0);
  EXPECT_EQ(r.verdict, Verdict::NoReversal);
}

TEST(SignedProfile, SectionDifferenceIsExact) {
  // With h = R^{-1} g the section difference is -(epsilon / d) g(xi) for every xi.
  const int kappa = 2, n = 4, k = 6, d = 6;
  const SectionTransform R(kappa, n, k);
  auto g = [&](std::span<const double> s) {
    double a = 0.0, t = 0.0;
    for (int i = 0; i < n; ++i) {
      a += std::pow(s[i], k);
      t += s[i];
    }
    return a + 0.05 * std::pow(t, k);
  };
  const auto sol = R.invert(g);
  const BodySpec L = make_block_norm_body(kappa, n, 4.0, std::vector<double>(n, 1.0), 0.05);
  const double eps = 0.02;
  const BodySpec K = make_perturbed(L, {sol.h}, eps);
  Rng rng = make_rng(5, 0);
  for (int t = 0; t < 4; ++t) {
    const BlockVector xi(kappa, n, sample_sphere(kappa * n, rng));
    const SectionComparison c = compare_section(K, L, xi, 20000, derive_seed(5, t));
    std::vector<double> s(n);
    block_profile(xi.coords(), kappa, s);
    EXPECT_TRUE(within_sigma(c.difference, -eps / d * g(s)))
        << c.difference.value << " +- " << c.difference.sigma() << " vs " << -eps / d * g(s);
    EXPECT_TRUE(c.leq);
  }
}

TEST(CertificateJson, ContainsTheEssentials) {
  CounterexampleCertificate c;
  c.L = c.L_scan = c.K = build_bq_ball(2, 4, 4.0);
  c.design.profile = {bump_at({1, 0, 0, 0}, 0.4)};
  const Json j = certificate_to_json(c);
  for (const char* key : {"K", "L", "epsilon", "seed", "comparison", "verdict", "design", "convexity_search"})
    EXPECT_TRUE(j.contains(key)) << key;
}
