#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bplab/block_vector.hpp"
#include "bplab/core.hpp"
#include "bplab/profile.hpp"
#include "bplab/random.hpp"

namespace bplab {

struct BodySpec;

struct EuclideanBall {
  double radius = 1.0;
};

/// Unit ball of (sum_i |x_i|_2^q)^{1/q} over the n blocks x_i.
struct BlockQBall {
  double q = 2.0;
};

/// Gauge F(r_1, ..., r_n) of the block norms r_i:
///   F(r) = (sum_i w_i r_i^p + delta (sum_i r_i^2)^{p/2})^{1/p},  p >= 1, w_i > 0, delta >= 0.
/// F is an l_p norm of nonnegative convex functions of x, hence convex; delta > 0
/// gives positive curvature where some block vanishes.
struct BlockNormBody {
  double p = 2.0;
  std::vector<double> weights;
  double delta = 0.0;
};

/// ||x||_K^{-d} = ||x||_base^{-d} - epsilon |x|^{-d} h(x / |x|), d = kappa n - kappa.
struct PerturbedBody {
  std::shared_ptr<const BodySpec> base;
  PerturbationProfile profile;
  double epsilon = 0.0;
};

/// (sum_j w_j |x_j|^q)^{1/q} over single coordinates. Not block-rotation invariant
/// for kappa >= 2 unless all weights agree; used as a negative control.
struct AxisWeightedQBall {
  double q = 2.0;
  std::vector<double> weights;
};

/// Origin-symmetric star body in R^{kappa n} given by its Minkowski functional.
struct BodySpec {
  int kappa = 1;
  int n = 2;
  std::variant<EuclideanBall, BlockQBall, BlockNormBody, PerturbedBody, AxisWeightedQBall> shape;

  int dim() const { return kappa * n; }
  /// Dimension of the sections K ∩ H_xi.
  int section_dim() const { return kappa * n - kappa; }
};

inline constexpr int kMaxBlocks = 16;

namespace detail {

inline double pow_half(double r2, double q) {
  if (q == 2.0) return r2;
  if (q == 4.0) return r2 * r2;
  if (q == 1.0) return std::sqrt(r2);
  return std::pow(r2, 0.5 * q);
}

inline void squared_block_norms(std::span<const double> x, int kappa, int n, double* r2) {
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* xi = x.data() + static_cast<std::size_t>(i) * kappa;
    for (int c = 0; c < kappa; ++c) acc += xi[c] * xi[c];
    r2[i] = acc;
  }
}

}  // namespace detail

inline double gauge_unchecked(const BodySpec& body, std::span<const double> x);

namespace detail {

struct GaugeVisitor {
  const BodySpec& body;
  std::span<const double> x;

  double operator()(const EuclideanBall& b) const {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s) / b.radius;
  }

  double operator()(const BlockQBall& b) const {
    double r2[kMaxBlocks];
    squared_block_norms(x, body.kappa, body.n, r2);
    double s = 0.0, mx = 0.0;
    for (int i = 0; i < body.n; ++i) mx = std::max(mx, r2[i]);
    if (mx == 0.0) return 0.0;
    for (int i = 0; i < body.n; ++i) s += pow_half(r2[i] / mx, b.q);
    return std::sqrt(mx) * std::pow(s, 1.0 / b.q);
  }

  double operator()(const BlockNormBody& b) const {
    double r2[kMaxBlocks];
    squared_block_norms(x, body.kappa, body.n, r2);
    double mx = 0.0, tot = 0.0;
    for (int i = 0; i < body.n; ++i) {
      mx = std::max(mx, r2[i]);
      tot += r2[i];
    }
    if (mx == 0.0) return 0.0;
    double s = 0.0;
    for (int i = 0; i < body.n; ++i) s += b.weights[i] * pow_half(r2[i] / mx, b.p);
    if (b.delta > 0.0) s += b.delta * pow_half(tot / mx, b.p);
    return std::sqrt(mx) * std::pow(s, 1.0 / b.p);
  }

  double operator()(const PerturbedBody& b) const {
    const double g = gauge_unchecked(*b.base, x);
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    if (r2 == 0.0) return 0.0;
    if (b.epsilon == 0.0) return g;
    double s[kMaxBlocks];
    squared_block_norms(x, body.kappa, body.n, s);
    for (int i = 0; i < body.n; ++i) s[i] /= r2;
    const double h = profile_value(b.profile, std::span<const double>(s, body.n));
    const double d = body.section_dim();
    // Work on the unit sphere: bracket = g(theta)^{-d} - eps h(theta).
    const double r = std::sqrt(r2);
    const double g_unit = g / r;
    const double bracket = std::pow(g_unit, -d) - b.epsilon * h;
    if (!(bracket > 0.0))
      throw NumericalFailure("PerturbedBody: epsilon too large, ||x||^{-d} bracket is not positive");
    return r * std::pow(bracket, -1.0 / d);
  }

  double operator()(const AxisWeightedQBall& b) const {
    double mx = 0.0;
    for (double v : x) mx = std::max(mx, std::abs(v));
    if (mx == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += b.weights[j] * std::pow(std::abs(x[j]) / mx, b.q);
    return mx * std::pow(s, 1.0 / b.q);
  }
};

}  // namespace detail

inline double gauge_unchecked(const BodySpec& body, std::span<const double> x) {
  return std::visit(detail::GaugeVisitor{body, x}, body.shape);
}

/// Minkowski functional ||x||_K = min{a >= 0 : x in a K}.
inline double gauge(const BodySpec& body, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(body.dim())) throw DimensionMismatch("gauge", body.dim(), x.size());
  return gauge_unchecked(body, x);
}

inline double gauge(const BodySpec& body, const BlockVector& x) {
  if (x.kappa() != body.kappa || x.n() != body.n)
    throw DimensionMismatch("gauge: block layout", body.dim(), x.dim());
  return gauge_unchecked(body, x.coords());
}

inline void validate_body(const BodySpec& body) {
  if (body.kappa != 1 && body.kappa != 2 && body.kappa != 4 && body.kappa != 8) throw UnsupportedKappa(body.kappa);
  if (body.n < 2) throw InvalidArgument("body: n must be >= 2");
  if (body.n > kMaxBlocks) throw InvalidArgument("body: at most 16 blocks");
  if (body.dim() > 16) throw InvalidArgument("body: dimensions kappa n > 16 are not supported");
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EuclideanBall>) {
          if (!(s.radius > 0.0)) throw InvalidArgument("euclidean_ball: radius must be positive");
        } else if constexpr (std::is_same_v<T, BlockQBall>) {
          if (!(s.q > 0.0)) throw InvalidArgument("block_q_ball: q must be positive");
        } else if constexpr (std::is_same_v<T, BlockNormBody>) {
          if (!(s.p >= 1.0)) throw InvalidArgument("block_norm_body: p must be >= 1");
          if (static_cast<int>(s.weights.size()) != body.n)
            throw DimensionMismatch("block_norm_body weights", body.n, s.weights.size());
          for (double w : s.weights)
            if (!(w > 0.0)) throw InvalidArgument("block_norm_body: weights must be positive");
          if (!(s.delta >= 0.0)) throw InvalidArgument("block_norm_body: delta must be >= 0");
        } else if constexpr (std::is_same_v<T, PerturbedBody>) {
          if (!s.base) throw InvalidArgument("perturbed_body: missing base");
          if (s.base->kappa != body.kappa || s.base->n != body.n)
            throw InvalidArgument("perturbed_body: base has a different block layout");
          validate_body(*s.base);
          validate_profile(s.profile, body.n);
          if (!(s.epsilon >= 0.0)) throw InvalidArgument("perturbed_body: epsilon must be >= 0");
        } else {
          if (!(s.q > 0.0)) throw InvalidArgument("axis_weighted_q_ball: q must be positive");
          if (static_cast<int>(s.weights.size()) != body.dim())
            throw DimensionMismatch("axis_weighted_q_ball weights", body.dim(), s.weights.size());
          for (double w : s.weights)
            if (!(w > 0.0)) throw InvalidArgument("axis_weighted_q_ball: weights must be positive");
        }
      },
      body.shape);
}

inline BodySpec make_ball(int kappa, int n, double radius = 1.0) {
  BodySpec b{kappa, n, EuclideanBall{radius}};
  validate_body(b);
  return b;
}

inline BodySpec make_block_q_ball(int kappa, int n, double q) {
  BodySpec b{kappa, n, BlockQBall{q}};
  validate_body(b);
  return b;
}

inline BodySpec make_block_norm_body(int kappa, int n, double p, std::vector<double> weights, double delta) {
  BodySpec b{kappa, n, BlockNormBody{p, std::move(weights), delta}};
  validate_body(b);
  return b;
}

/// BlockNormBody with weights in [0.6, 1.6], p in [1.5, 4] and delta in [0, 0.5].
inline BodySpec make_random_block_norm_body(int kappa, int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xb0d1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> w(n);
  for (double& v : w) v = 0.6 + unif(rng);
  const double p = 1.5 + 2.5 * unif(rng);
  const double delta = 0.5 * unif(rng);
  return make_block_norm_body(kappa, n, p, std::move(w), delta);
}

/// Perturbed body without the admissibility scan; evaluation still checks positivity.
inline BodySpec make_perturbed_unchecked(const BodySpec& base, PerturbationProfile profile, double epsilon) {
  BodySpec b{base.kappa, base.n, PerturbedBody{std::make_shared<const BodySpec>(base), std::move(profile), epsilon}};
  validate_body(b);
  return b;
}

/// Largest epsilon keeping ||theta||_base^{-d} - epsilon h(theta) > 0 on a sample of
/// the sphere; +infinity when h <= 0 on every sampled point.
inline double admissible_epsilon(const BodySpec& base, const PerturbationProfile& profile, std::int64_t samples,
                                 std::uint64_t seed) {
  validate_profile(profile, base.n);
  const int dim = base.dim();
  const double d = base.section_dim();
  Rng rng = make_rng(seed, 0xad31);
  std::vector<double> theta(dim);
  double s[kMaxBlocks];
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < samples; ++i) {
    sample_sphere(rng, theta);
    detail::squared_block_norms(theta, base.kappa, base.n, s);
    const double h = profile_value(profile, std::span<const double>(s, base.n));
    if (h <= 0.0) continue;
    best = std::min(best, std::pow(gauge_unchecked(base, theta), -d) / h);
  }
  return best;
}

/// Perturbed body after checking the star-body bracket on `samples` sphere points.
inline BodySpec make_perturbed(const BodySpec& base, PerturbationProfile profile, double epsilon,
                               std::int64_t samples = 20000, std::uint64_t seed = 1) {
  const double eps_star = admissible_epsilon(base, profile, samples, seed);
  if (!(epsilon < eps_star)) {
    std::ostringstream os;
    os << "perturbed_body: epsilon = " << epsilon << " violates the star-body bracket; maximal admissible epsilon ~ "
       << eps_star;
    throw NumericalFailure(os.str());
  }
  return make_perturbed_unchecked(base, std::move(profile), epsilon);
}

/// Short human-readable description used as a body id in reports.
inline std::string describe(const BodySpec& body) {
  std::ostringstream os;
  os.precision(6);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EuclideanBall>) {
          os << "euclidean_ball(r=" << s.radius << ")";
        } else if constexpr (std::is_same_v<T, BlockQBall>) {
          os << "block_q_ball(q=" << s.q << ")";
        } else if constexpr (std::is_same_v<T, BlockNormBody>) {
          os << "block_norm_body(p=" << s.p << ",delta=" << s.delta << ",w=[";
          for (std::size_t i = 0; i < s.weights.size(); ++i) os << (i ? "," : "") << s.weights[i];
          os << "])";
        } else if constexpr (std::is_same_v<T, PerturbedBody>) {
          os << "perturbed(" << describe(*s.base) << "," << profile_name(s.profile) << ",eps=" << s.epsilon << ")";
        } else {
          os << "axis_weighted_q_ball(q=" << s.q << ")";
        }
      },
      body.shape);
  os << "@R^" << body.dim() << "(kappa=" << body.kappa << ",n=" << body.n << ")";
  return os.str();
}

/// True for bodies whose gauge depends only on the block norms.
inline bool is_block_norm_body(const BodySpec& body) {
  if (std::holds_alternative<AxisWeightedQBall>(body.shape)) return false;
  if (const auto* p = std::get_if<PerturbedBody>(&body.shape)) return is_block_norm_body(*p->base);
  return true;
}

}  // namespace bplab
