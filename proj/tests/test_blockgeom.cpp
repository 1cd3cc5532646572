#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "bplab/body.hpp"
#include "bplab/checks.hpp"
#include "bplab/frame.hpp"
#include "bplab/io.hpp"
#include "bplab/rotation.hpp"

using namespace bplab;

namespace {

std::vector<BodySpec> invariant_fixtures(int kappa, int n) {
  std::vector<BodySpec> v{make_ball(kappa, n, 1.3), make_block_q_ball(kappa, n, 1.5), make_block_q_ball(kappa, n, 4.0),
                          make_random_block_norm_body(kappa, n, 7)};
  BlockNormBump bump{std::vector<double>(n, 1.0 / std::sqrt(static_cast<double>(n))), 0.5};
  v.push_back(make_perturbed(make_block_q_ball(kappa, n, 3.0), {bump}, 0.05));
  return v;
}

BlockVector random_vector(int kappa, int n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  BlockVector x(kappa, n);
  for (auto& c : x.coords()) c = g(rng);
  return x;
}

}  // namespace

TEST(BlockVector, BlocksAndDimensions) {
  BlockVector x(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(x.dim(), 6);
  EXPECT_EQ(x.block(1)[0], 3);
  EXPECT_EQ(x.block(2)[1], 6);
  EXPECT_DOUBLE_EQ(x.block_norm(0), std::sqrt(5.0));
  EXPECT_THROW(BlockVector(2, 3, {1, 2, 3}), DimensionMismatch);
  EXPECT_THROW(BlockVector(2, 1), InvalidArgument);
  EXPECT_THROW(x.block(3), InvalidArgument);
}

TEST(Gauge, SpecExamples) {
  BlockVector x(2, 3, {0, 2, 0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(gauge(make_ball(2, 3), x), 2.0);
  const BodySpec b4 = make_block_q_ball(2, 4, 4.0);
  EXPECT_DOUBLE_EQ(gauge(b4, BlockVector(2, 4, {1, 0, 0, 0, 0, 0, 0, 0})), 1.0);
  const double s = std::sqrt(0.5);
  EXPECT_NEAR(gauge(b4, BlockVector(2, 4, {s, s, 1, 0, 0, -1, 0.6, 0.8})), std::pow(4.0, 0.25), 1e-15);
}

TEST(Gauge, DimensionMismatch) {
  EXPECT_THROW(gauge(make_ball(2, 3), BlockVector(2, 4)), DimensionMismatch);
  std::vector<double> v(5, 1.0);
  EXPECT_THROW(gauge(make_ball(2, 3), std::span<const double>(v)), DimensionMismatch);
}

TEST(Gauge, HomogeneityAndEvenness) {
  Rng rng = make_rng(11, 0);
  std::uniform_real_distribution<double> t(0.01, 100.0);
  for (int kappa : {1, 2, 4}) {
    for (const BodySpec& b : invariant_fixtures(kappa, 3)) {
      for (int i = 0; i < 1000; ++i) {
        const BlockVector x = random_vector(kappa, 3, rng);
        BlockVector tx = x, mx = x;
        const double s = t(rng);
        for (auto& c : tx.coords()) c *= s;
        for (auto& c : mx.coords()) c = -c;
        const double g = gauge(b, x), gt = gauge(b, tx);
        ASSERT_LE(std::abs(gt - s * g), 1e-10 * gt) << describe(b);
        ASSERT_EQ(gauge(b, mx), g) << describe(b);
        ASSERT_GT(g, 0.0);
      }
    }
  }
}

TEST(Gauge, PerturbedIdentity) {
  // ||x||_K^{-d} = ||x||_L^{-d} - eps |x|^{-d} h(x / |x|), checked against an independent evaluation.
  const BodySpec L = make_block_q_ball(2, 3, 4.0);
  BlockNormBump bump{{1.0, 0.0, 0.0}, 0.6};
  const BodySpec K = make_perturbed(L, {bump}, 0.1);
  Rng rng = make_rng(3, 0);
  for (int i = 0; i < 200; ++i) {
    const BlockVector x = random_vector(2, 3, rng);
    const double r = x.norm();
    const double angle = std::acos(std::min(1.0, x.block_norm(0) / r));
    const double z = angle / 0.6;
    const double h = z < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0;
    const double lhs = std::pow(gauge(K, x), -4.0);
    const double rhs = std::pow(gauge(L, x), -4.0) - 0.1 * std::pow(r, -4.0) * h;
    ASSERT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs));
  }
}

TEST(Gauge, PerturbedBracketRejected) {
  BlockNormBump bump{{1.0, 0.0}, 0.5};
  EXPECT_THROW(make_perturbed(make_ball(2, 2), {bump}, 1.5), NumericalFailure);
  const BodySpec bad = make_perturbed_unchecked(make_ball(2, 2), {bump}, 1.5);
  EXPECT_THROW(gauge(bad, BlockVector(2, 2, {1, 0, 0, 0})), NumericalFailure);
}

TEST(BlockRotate, Examples) {
  BlockVector x(2, 2, {1, 0, 0, 1});
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_EQ(block_rotate(I, x), x);
  Eigen::MatrixXd r(2, 2);
  r << 0, -1, 1, 0;
  EXPECT_EQ(block_rotate(r, x), BlockVector(2, 2, {0, 1, -1, 0}));

  // Convention: J_1 e_0 = e_1 (left multiplication by the first imaginary unit).
  const auto fam = hurwitz_radon_family(4);
  BlockVector e0(4, 2);
  e0[0] = 1.0;
  BlockVector e1(4, 2);
  e1[1] = 1.0;
  EXPECT_EQ(block_rotate(fam.matrices[1], e0), e1);

  Eigen::MatrixXd bad = 1.01 * I;
  EXPECT_THROW(block_rotate(bad, x), InvalidArgument);
}

TEST(BlockRotate, PreservesNorm) {
  Rng rng = make_rng(5, 0);
  for (int kappa : {2, 4, 8}) {
    for (int i = 0; i < 50; ++i) {
      const BlockVector x = random_vector(kappa, 2, rng);
      const BlockVector y = block_rotate(random_rotation(kappa, rng), x);
      EXPECT_NEAR(y.norm(), x.norm(), 1e-12);
    }
  }
}

TEST(HurwitzRadon, ExactIntegerIdentities) {
  for (int kappa : {1, 2, 4, 8}) {
    const auto fam = hurwitz_radon_family(kappa);
    ASSERT_EQ(static_cast<int>(fam.matrices.size()), kappa);
    EXPECT_EQ(fam.matrices[0], Eigen::MatrixXd::Identity(kappa, kappa));
    for (const auto& J : fam.matrices)
      for (int r = 0; r < kappa; ++r)
        for (int c = 0; c < kappa; ++c) ASSERT_TRUE(J(r, c) == 0.0 || std::abs(J(r, c)) == 1.0);
    for (int m = 0; m < kappa; ++m) {
      const auto& Jm = fam.matrices[m];
      EXPECT_EQ(Jm.transpose() * Jm, Eigen::MatrixXd::Identity(kappa, kappa)) << "kappa " << kappa << " m " << m;
      if (m >= 1) {
        EXPECT_EQ(Jm + Jm.transpose(), Eigen::MatrixXd::Zero(kappa, kappa));
      }
      for (int l = m + 1; l < kappa; ++l) {
        const auto& Jl = fam.matrices[l];
        EXPECT_EQ(Jm.transpose() * Jl + Jl.transpose() * Jm, Eigen::MatrixXd::Zero(kappa, kappa))
            << "kappa " << kappa << " pair " << m << "," << l;
      }
    }
  }
  Eigen::MatrixXd j1(2, 2);
  j1 << 0, -1, 1, 0;
  EXPECT_EQ(hurwitz_radon_family(2).matrices[1], j1);
}

TEST(HurwitzRadon, OrthonormalOrbits) {
  Rng rng = make_rng(9, 0);
  for (int kappa : {2, 4, 8}) {
    const auto fam = hurwitz_radon_family(kappa);
    for (int i = 0; i < 20; ++i) {
      const BlockVector x = random_vector(kappa, 3, rng);
      const double r2 = x.norm() * x.norm();
      for (int m = 0; m < kappa; ++m)
        for (int l = 0; l < kappa; ++l) {
          const BlockVector a = block_rotate(fam.matrices[m], x), b = block_rotate(fam.matrices[l], x);
          EXPECT_NEAR(dot(a.coords(), b.coords()), m == l ? r2 : 0.0, 1e-12 * r2);
        }
    }
  }
}

TEST(HurwitzRadon, UnsupportedKappa) {
  for (int kappa : {0, 3, 5, 6, 7, 9, 16}) EXPECT_THROW(hurwitz_radon_family(kappa), UnsupportedKappa) << kappa;
  try {
    hurwitz_radon_family(3);
  } catch (const UnsupportedKappa& e) {
    EXPECT_NE(std::string(e.what()).find("Hurwitz-Radon"), std::string::npos);
    EXPECT_EQ(e.kappa(), 3);
  }
}

TEST(SectionFrame, Examples) {
  const auto f1 = section_frame(BlockVector(1, 3, {0, 1, 0}), hurwitz_radon_family(1));
  EXPECT_EQ(f1.e_perp.size(), 1u);
  EXPECT_EQ(f1.section_dim(), 2);
  const auto f2 = section_frame(BlockVector(2, 2, {1, 0, 0, 0}), hurwitz_radon_family(2));
  EXPECT_EQ(f2.e_perp[0], (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(f2.e_perp[1], (std::vector<double>{0, 1, 0, 0}));
}

TEST(SectionFrame, GramIdentity) {
  Rng rng = make_rng(2, 0);
  for (int kappa : {1, 2, 4, 8}) {
    const auto fam = hurwitz_radon_family(kappa);
    for (int i = 0; i < 100; ++i) {
      const BlockVector xi = random_vector(kappa, 2, rng).normalized();
      const SubspaceFrame f = section_frame(xi, fam);
      EXPECT_LE(frame_gram_defect(f), 1e-12);
      EXPECT_EQ(f.e_perp[0], xi.vec());
      ASSERT_EQ(f.section_dim(), kappa);
      for (int m = 1; m < kappa; ++m) EXPECT_EQ(f.e_perp[m], block_rotate(fam.matrices[m], xi).vec());
    }
  }
}

TEST(SectionFrame, Deterministic) {
  const BlockVector xi = BlockVector(4, 3, std::vector<double>(12, 1.0)).normalized();
  const auto a = section_frame(xi, hurwitz_radon_family(4));
  const auto b = section_frame(xi, hurwitz_radon_family(4));
  EXPECT_EQ(a.e_in, b.e_in);
}

TEST(SectionFrame, Kappa2CircleIsRotationOrbit) {
  Rng rng = make_rng(4, 0);
  const auto fam = hurwitz_radon_family(2);
  for (int i = 0; i < 50; ++i) {
    const BlockVector xi = random_vector(2, 3, rng).normalized();
    const SubspaceFrame f = section_frame(xi, fam);
    const double phi = 2.0 * kPi * std::uniform_real_distribution<double>(0, 1)(rng);
    BlockVector eta(2, 3);
    for (int c = 0; c < 6; ++c) eta[c] = std::cos(phi) * f.e_perp[0][c] + std::sin(phi) * f.e_perp[1][c];
    const double angle = std::atan2(dot(eta.coords(), f.e_perp[1]), dot(eta.coords(), f.e_perp[0]));
    Eigen::MatrixXd sigma(2, 2);
    sigma << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    const BlockVector r = block_rotate(sigma, xi);
    double err = 0.0;
    for (int c = 0; c < 6; ++c) err = std::max(err, std::abs(r[c] - eta[c]));
    EXPECT_LE(err, 1e-10);
  }
}

TEST(Invariance, BlockBodies) {
  for (int kappa : {2, 4, 8})
    for (const BodySpec& b : invariant_fixtures(kappa, 2)) EXPECT_LE(check_invariance(b, 2000, 1), 1e-12) << describe(b);
  BlockNormBump bump{{0.6, 0.8, 0.0}, 0.5};
  const BodySpec k = make_perturbed(make_block_q_ball(2, 3, 4.0), {bump}, 0.2);
  EXPECT_LE(check_invariance(k, 10000, 3), 1e-10);
}

TEST(Invariance, AxisWeightedFixtureIsNotInvariant) {
  const BodySpec b{2, 3, AxisWeightedQBall{3.0, {1.0, 3.0, 1.0, 0.5, 2.0, 1.0}}};
  validate_body(b);
  EXPECT_GT(check_invariance(b, 2000, 1), 0.01);
  EXPECT_FALSE(is_block_norm_body(b));
}

TEST(Invariance, Deterministic) {
  const BodySpec b{2, 3, AxisWeightedQBall{3.0, {1.0, 3.0, 1.0, 0.5, 2.0, 1.0}}};
  EXPECT_EQ(check_invariance(b, 3000, 17), check_invariance(b, 3000, 17));
}

TEST(Convexity, Examples) {
  EXPECT_EQ(check_convexity(make_ball(2, 3), 20000, 1).violations, 0);
  EXPECT_EQ(check_convexity(make_block_q_ball(2, 4, 4.0), 100000, 1).violations, 0);
  EXPECT_EQ(check_convexity(make_block_q_ball(1, 4, 1.0), 20000, 1).violations, 0);
  const ConvexityReport r = check_convexity(make_block_q_ball(2, 4, 0.5), 20000, 1);
  EXPECT_GT(r.violations, 0);
  EXPECT_GT(r.worst_margin, 1e-9);
  // The reported witness pair really violates the midpoint inequality.
  std::vector<double> mid(r.witness_x.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (r.witness_x[i] + r.witness_y[i]);
  const BodySpec b = make_block_q_ball(2, 4, 0.5);
  EXPECT_NEAR(gauge(b, std::span<const double>(r.witness_x)), 1.0, 1e-9);
  EXPECT_GT(gauge(b, std::span<const double>(mid)), 1.0 + 1e-9);
}

TEST(Convexity, Gallery) {
  for (int kappa : {1, 2, 4})
    for (const BodySpec& b : invariant_fixtures(kappa, 3))
      EXPECT_EQ(check_convexity(b, 20000, 2).violations, 0) << describe(b);
}

TEST(BodyJson, RoundTrip) {
  BlockNormBump bump{{0.6, 0.8, 0.0}, 0.5};
  for (const BodySpec& b : {make_ball(2, 3, 2.0), make_block_q_ball(2, 3, 4.0), make_random_block_norm_body(2, 3, 5),
                            make_perturbed(make_block_q_ball(2, 3, 4.0), {bump}, 0.1)}) {
    const Json j = body_to_json(b);
    const BodySpec back = body_from_json(j);
    EXPECT_EQ(body_to_json(back).dump(), j.dump());
    std::vector<double> x{0.3, -0.2, 0.5, 0.1, -0.7, 0.2};
    EXPECT_EQ(gauge(back, std::span<const double>(x)), gauge(b, std::span<const double>(x)));
  }
}

TEST(BodyJson, ErrorsCarryPaths) {
  try {
    body_from_json(Json::parse(R"({"kind":"block_q_ball","kappa":2,"n":4})"), "/bodies/3");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/bodies/3/q"), std::string::npos);
  }
  EXPECT_THROW(body_from_json(Json::parse(R"({"kind":"cube","kappa":2,"n":4})")), ConfigError);
  EXPECT_THROW(body_from_json(Json::parse(R"({"kind":"block_q_ball","kappa":3,"n":4,"q":2})")), ConfigError);
  EXPECT_THROW(body_from_json(Json::parse(R"({"kind":"block_q_ball","kappa":2,"n":4,"q":-1})")), ConfigError);
}
