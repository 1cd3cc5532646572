#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <span>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "bplab/body.hpp"
#include "bplab/core.hpp"
#include "bplab/estimate.hpp"
#include "bplab/frame.hpp"
#include "bplab/random.hpp"

namespace bplab {

namespace detail {

inline std::string format_vector(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

inline double checked_direction_gauge(const BodySpec& body, std::span<const double> theta) {
  const double g = gauge_unchecked(body, theta);
  if (!(g > 0.0) || !std::isfinite(g))
    throw NumericalFailure("gauge is " + std::to_string(g) + " at direction " + format_vector(theta));
  return g;
}

}  // namespace detail

/// t > 0 with gauge(c + t theta) = 1, given g_c = gauge(c) < 1 and g_theta = gauge(theta).
///
/// For a convex gauge the root lies in [(1 - g_c) / g_theta, (1 + g_c) / g_theta]; the
/// bracket is widened geometrically when the body is only star-shaped.
inline double ray_root(const BodySpec& body, std::span<const double> c, double g_c, std::span<const double> theta,
                       double g_theta, double tol, std::span<double> buf) {
  if (g_c == 0.0) return 1.0 / g_theta;
  auto f = [&](double t) {
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = c[i] + t * theta[i];
    return gauge_unchecked(body, buf) - 1.0;
  };
  double lo = (1.0 - g_c) / g_theta, hi = (1.0 + g_c) / g_theta;
  double flo = f(lo), fhi = f(hi);
  for (int k = 0; flo > 0.0; ++k) {
    if (k == 200) throw NumericalFailure("ray_root: cannot bracket the inner end of ray " + detail::format_vector(theta));
    hi = lo;
    fhi = flo;
    lo *= 0.5;
    flo = f(lo);
  }
  for (int k = 0; fhi < 0.0; ++k) {
    if (k == 200) throw NumericalFailure("ray_root: cannot bracket the outer end of ray " + detail::format_vector(theta));
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = f(hi);
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol * std::max(std::abs(a), std::abs(b)); };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, iters);
  if (iters >= 200) {
    std::ostringstream os;
    os << "ray_root: no convergence in 200 iterations from center " << detail::format_vector(c) << " along "
       << detail::format_vector(theta);
    throw NumericalFailure(os.str());
  }
  return 0.5 * (r.first + r.second);
}

/// Point of the affine plane x0 + H_xi, x0 = sum_m u_m e_perp[m], minimizing the gauge.
struct SliceCenter {
  std::vector<double> point;
  double min_gauge = 0.0;
};

namespace detail {

// BFGS with central-difference gradients and Armijo backtracking; f convex.
template <class F>
double minimize_convex(F&& f, std::vector<double>& y, int max_iter = 400) {
  const std::size_t d = y.size();
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(y.data(), d);
  auto eval = [&](const Eigen::VectorXd& v) { return f(std::span<const double>(v.data(), d)); };
  auto grad = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd g(d), w = v;
    for (std::size_t i = 0; i < d; ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(v[i]));
      w[i] = v[i] + h;
      const double fp = eval(w);
      w[i] = v[i] - h;
      const double fm = eval(w);
      w[i] = v[i];
      g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
  };
  double fx = eval(x);
  Eigen::VectorXd g = grad(x);
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(d, d);
  for (int it = 0; it < max_iter && g.norm() > 1e-11; ++it) {
    Eigen::VectorXd p = -Hinv * g;
    if (p.dot(g) >= 0.0) {
      Hinv.setIdentity();
      p = -g;
    }
    double alpha = 1.0, fn = 0.0;
    Eigen::VectorXd xn;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + alpha * p;
      fn = eval(xn);
      if (fn <= fx + 1e-4 * alpha * p.dot(g)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd gn = grad(xn);
    const Eigen::VectorXd s = xn - x, yv = gn - g;
    const double sy = s.dot(yv);
    const bool stalled = fx - fn <= 1e-16 * std::max(1.0, std::abs(fx));
    x = xn;
    fx = fn;
    g = gn;
    if (stalled) break;
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
      Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
    }
  }
  for (std::size_t i = 0; i < d; ++i) y[i] = x[i];
  return fx;
}

}  // namespace detail

inline SliceCenter slice_center(const BodySpec& body, const SubspaceFrame& frame, std::span<const double> u) {
  const int dim = body.dim(), d = frame.section_dim();
  std::vector<double> x0(dim), x(dim), y(d, 0.0);
  frame.embed_perp(u, x0);
  auto f = [&](std::span<const double> z) {
    frame.embed_in(z, x);
    for (int i = 0; i < dim; ++i) x[i] += x0[i];
    return gauge_unchecked(body, x);
  };
  const double g0 = gauge_unchecked(body, x0);
  if (g0 == 0.0) return {x0, 0.0};
  SliceCenter c;
  c.min_gauge = std::min(g0, detail::minimize_convex(f, y));
  frame.embed_in(y, x);
  for (int i = 0; i < dim; ++i) x[i] += x0[i];
  c.point = c.min_gauge < g0 ? x : x0;
  return c;
}

namespace detail {

/// Monte Carlo over theta uniform on the unit sphere of H_xi with antithetic pairs.
///
/// For every center c_k (each with gauge < 1, or flagged empty), the per-sample value is
/// |S^{d-1}| / d * (rho_k(theta)^d + rho_k(-theta)^d) / 2, rho_k the radial function of
/// the slice seen from c_k. `fn(values, outputs)` maps those to `n_out` scalars whose
/// means and standard errors are returned. Samples of chunk c draw from make_rng(seed, c),
/// so calls sharing a seed and a frame reuse the same directions.
struct SliceCenters {
  std::vector<std::vector<double>> points;
  std::vector<double> gauges;
  std::vector<bool> empty;

  std::size_t add(std::vector<double> p, double g) {
    points.push_back(std::move(p));
    gauges.push_back(g);
    // Within roundoff of the boundary the slice is a point (volume O((1 - g)^d)) and the
    // ray bracket from the center can fail, so such centers count as empty.
    empty.push_back(!(g < 1.0 - 1e-12));
    return points.size() - 1;
  }
};

template <class Fn>
std::vector<SampleStats> sample_slices(const BodySpec& body, const SubspaceFrame& frame, const SliceCenters& centers,
                                       std::size_t n_out, const QuadratureParams& params, std::uint64_t seed,
                                       Fn&& fn) {
  const int dim = body.dim(), d = frame.section_dim();
  const double scale = sphere_area(d) / d;
  const std::size_t chunks = chunk_count(params.n_samples);
  std::vector<std::vector<SampleStats>> part(chunks, std::vector<SampleStats>(n_out));
  const std::size_t nc = centers.points.size();
  parallel_chunks(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, c);
    std::vector<double> z(d), theta(dim), neg(dim), buf(dim), values(nc), out(n_out);
    for (std::int64_t i = 0; i < chunk_length(c, params.n_samples); ++i) {
      sample_sphere(rng, z);
      frame.embed_in(z, theta);
      for (int k = 0; k < dim; ++k) neg[k] = -theta[k];
      const double gp = checked_direction_gauge(body, theta);
      const double gm = checked_direction_gauge(body, neg);
      for (std::size_t k = 0; k < nc; ++k) {
        if (centers.empty[k]) {
          values[k] = 0.0;
          continue;
        }
        const auto& p = centers.points[k];
        const double g = centers.gauges[k];
        const double rp = ray_root(body, p, g, theta, gp, params.bisect_tol, buf);
        const double rm = ray_root(body, p, g, neg, gm, params.bisect_tol, buf);
        values[k] = 0.5 * scale * (std::pow(rp, d) + std::pow(rm, d));
      }
      fn(std::span<const double>(values), std::span<double>(out));
      for (std::size_t j = 0; j < n_out; ++j) part[c][j].add(out[j]);
    }
  });
  std::vector<SampleStats> total(n_out);
  for (const auto& p : part)
    for (std::size_t j = 0; j < n_out; ++j) total[j].merge(p[j]);
  return total;
}

inline Estimate to_estimate(const SampleStats& s, std::uint64_t seed) {
  Estimate e;
  e.value = s.mean();
  e.std_error = s.std_error();
  e.n_samples = s.count();
  e.seed = seed;
  return e;
}

}  // namespace detail

/// Vol_N(K) = |S^{N-1}| / N * E[gauge(theta)^{-N}], theta uniform on S^{N-1}.
inline Estimate body_volume_polar(const BodySpec& body, const QuadratureParams& params, std::uint64_t seed) {
  params.validate();
  const int dim = body.dim();
  const double scale = sphere_area(dim) / dim;
  const std::size_t chunks = chunk_count(params.n_samples);
  std::vector<SampleStats> part(chunks);
  parallel_chunks(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, c);
    std::vector<double> theta(dim);
    for (std::int64_t i = 0; i < chunk_length(c, params.n_samples); ++i) {
      sample_sphere(rng, theta);
      part[c].add(scale * std::pow(detail::checked_direction_gauge(body, theta), -dim));
    }
  });
  SampleStats total;
  for (const auto& p : part) total.merge(p);
  Estimate e = detail::to_estimate(total, seed);
  e.numerical_error = 1e-14 * std::abs(e.value);
  return e;
}

/// Vol_d(K ∩ H_xi) = |S^{d-1}| / d * E[gauge(theta)^{-d}], theta uniform on the sphere of H_xi.
inline Estimate section_volume(const BodySpec& body, const SubspaceFrame& frame, const QuadratureParams& params,
                               std::uint64_t seed) {
  params.validate();
  if (frame.dim() != body.dim()) throw DimensionMismatch("section_volume: frame", body.dim(), frame.dim());
  detail::SliceCenters centers;
  centers.add(std::vector<double>(body.dim(), 0.0), 0.0);
  const auto stats = detail::sample_slices(body, frame, centers, 1, params, seed,
                                           [](std::span<const double> v, std::span<double> out) { out[0] = v[0]; });
  Estimate e = detail::to_estimate(stats[0], seed);
  e.numerical_error = 1e-14 * std::abs(e.value);
  return e;
}

/// A(u) = Vol_d(K ∩ (H_xi + sum_m u_m e_perp[m])).
///
/// Radial functions are taken from the point of the slice plane with the least gauge;
/// the slice is empty exactly when that least gauge is >= 1.
inline Estimate parallel_section_function(const BodySpec& body, const SubspaceFrame& frame, std::span<const double> u,
                                          const QuadratureParams& params, std::uint64_t seed) {
  params.validate();
  if (frame.dim() != body.dim()) throw DimensionMismatch("parallel_section_function: frame", body.dim(), frame.dim());
  if (static_cast<int>(u.size()) != body.kappa) throw DimensionMismatch("parallel_section_function: u", body.kappa, u.size());
  for (double v : u)
    if (!std::isfinite(v)) throw InvalidArgument("parallel_section_function: u must be finite");
  std::vector<double> x0(body.dim());
  frame.embed_perp(u, x0);
  double g0 = gauge_unchecked(body, x0);
  if (!(g0 < 1.0)) {
    const SliceCenter sc = slice_center(body, frame, u);
    if (!(sc.min_gauge < 1.0)) {
      Estimate e;
      e.n_samples = params.n_samples;
      e.seed = seed;
      return e;
    }
    x0 = sc.point;
    g0 = sc.min_gauge;
  }
  detail::SliceCenters centers;
  centers.add(x0, g0);
  const auto stats = detail::sample_slices(body, frame, centers, 1, params, seed,
                                           [](std::span<const double> v, std::span<double> out) { out[0] = v[0]; });
  Estimate e = detail::to_estimate(stats[0], seed);
  e.numerical_error = std::max(params.bisect_tol, 4e-16) * frame.section_dim() * std::abs(e.value);
  return e;
}

/// Base step of the finite-difference stencils: fd_step times the smallest distance from
/// the origin to the boundary along e_perp.
inline double fd_base_step(const BodySpec& body, const SubspaceFrame& frame, const QuadratureParams& params) {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& e : frame.e_perp) r = std::min(r, 1.0 / gauge_unchecked(body, e));
  return params.fd_step * r;
}

/// Delta^m A(0) for m in {1, 2} by central differences at steps h, 2h, 4h with
/// Richardson extrapolation; every stencil point shares the same sample directions.
inline Estimate laplacian_A_at_zero(const BodySpec& body, const SubspaceFrame& frame, int m,
                                    const QuadratureParams& params, std::uint64_t seed) {
  params.validate();
  if (m != 1 && m != 2) throw InvalidArgument("laplacian_A_at_zero: m must be 1 or 2");
  if (frame.dim() != body.dim()) throw DimensionMismatch("laplacian_A_at_zero: frame", body.dim(), frame.dim());
  const int kappa = body.kappa, dim = body.dim();
  const double h = fd_base_step(body, frame, params);

  detail::SliceCenters centers;
  auto add_point = [&](std::vector<double> u) {
    for (double& v : u) v *= h;
    std::vector<double> x(dim);
    frame.embed_perp(u, x);
    const double g = gauge_unchecked(body, x);
    if (!(g < 1.0)) throw NumericalFailure("laplacian_A_at_zero: stencil leaves the body; reduce fd_step");
    return centers.add(std::move(x), g);
  };
  const std::size_t origin = add_point(std::vector<double>(kappa, 0.0));
  // axis[l][j]: point 2^j e_l; diag[l][k][s][sign]: point 2^s (e_l + sign e_k), l < k
  std::vector<std::array<std::size_t, 4>> axis(kappa);
  for (int l = 0; l < kappa; ++l)
    for (int j = 0; j < 4; ++j) {
      std::vector<double> u(kappa, 0.0);
      u[l] = static_cast<double>(1 << j);
      axis[l][j] = add_point(u);
    }
  std::vector<std::array<std::array<std::size_t, 2>, 3>> diag;
  if (m == 2)
    for (int l = 0; l < kappa; ++l)
      for (int k = l + 1; k < kappa; ++k) {
        std::array<std::array<std::size_t, 2>, 3> idx{};
        for (int s = 0; s < 3; ++s)
          for (int sg = 0; sg < 2; ++sg) {
            std::vector<double> u(kappa, 0.0);
            u[l] = static_cast<double>(1 << s);
            u[k] = (sg == 0 ? 1.0 : -1.0) * static_cast<double>(1 << s);
            idx[s][sg] = add_point(u);
          }
        diag.push_back(idx);
      }

  // D(s): stencil at step 2^s h; f(-u) = f(u) holds per antithetic sample.
  auto stencil = [&](std::span<const double> f, int s) {
    const double hs = h * (1 << s);
    const double f0 = f[origin];
    double acc = 0.0;
    if (m == 1) {
      for (int l = 0; l < kappa; ++l) acc += 2.0 * (f[axis[l][s]] - f0);
      return acc / (hs * hs);
    }
    for (int l = 0; l < kappa; ++l) acc += 2.0 * f[axis[l][s + 1]] - 8.0 * f[axis[l][s]] + 6.0 * f0;
    std::size_t pair = 0;
    for (int l = 0; l < kappa; ++l)
      for (int k = l + 1; k < kappa; ++k, ++pair) {
        const double mixed = 4.0 * f0 - 4.0 * f[axis[l][s]] - 4.0 * f[axis[k][s]] + 2.0 * f[diag[pair][s][0]] +
                             2.0 * f[diag[pair][s][1]];
        acc += 2.0 * mixed;
      }
    return acc / std::pow(hs, 4);
  };
  const auto stats = detail::sample_slices(body, frame, centers, 3, params, seed,
                                           [&](std::span<const double> f, std::span<double> out) {
                                             const double d1 = stencil(f, 0), d2 = stencil(f, 1), d4 = stencil(f, 2);
                                             const double r1 = (4.0 * d1 - d2) / 3.0, r2 = (4.0 * d2 - d4) / 3.0;
                                             out[0] = r1;
                                             out[1] = r1 - r2;
                                             out[2] = f[origin];
                                           });
  Estimate e = detail::to_estimate(stats[0], seed);
  const double weight_sum = m == 1 ? 4.0 * kappa : 16.0 * kappa + 16.0 * kappa * (kappa - 1) / 2.0 + 4.0;
  const double rounding = std::max(params.bisect_tol, 4e-16) * frame.section_dim() * std::abs(stats[2].mean()) *
                          weight_sum / std::pow(h, 2 * m);
  e.numerical_error = std::abs(stats[1].mean()) / 15.0 + rounding;
  e.inconclusive = e.sigma() > std::abs(e.value);
  return e;
}

/// Quadrature on S^{kappa-1} modulo +-: one representative per antipodal pair, weights
/// summing to |S^{kappa-1}|. kappa = 1: {1}; kappa = 2: trapezoid with 8 angles;
/// kappa >= 3: the cross-polytope (a spherical 3-design).
struct SphereNode {
  std::vector<double> omega;
  double weight = 0.0;
};

inline std::vector<SphereNode> half_sphere_rule(int kappa) {
  const double area = sphere_area(kappa);
  std::vector<SphereNode> nodes;
  if (kappa == 1) {
    nodes.push_back({{1.0}, area});
  } else if (kappa == 2) {
    for (int a = 0; a < 4; ++a) {
      const double phi = kPi * a / 4.0;
      nodes.push_back({{std::cos(phi), std::sin(phi)}, area / 4.0});
    }
  } else {
    for (int m = 0; m < kappa; ++m) {
      std::vector<double> w(kappa, 0.0);
      w[m] = 1.0;
      nodes.push_back({w, area / kappa});
    }
  }
  return nodes;
}

/// <|u|^{-q-kappa} / Gamma(-q/2), A(u)> for each q in `qs`, all from one set of samples.
///
/// Per direction omega and per sample, with a(t) = A(t omega) seen from the centers
/// t * c(omega) (c(omega) the least-gauge point of the plane at omega) and T the support
/// of a, the integral of (a(t) - a(0) - [q > 2] a''(0) t^2 / 2) t^{-1-q} splits into an
/// analytic piece on [0, t0] (leading Taylor term), a log-spaced grid up to 0.1 T, a
/// uniform grid up to T, and the closed-form tail of the subtracted polynomial beyond T.
/// numerical_error adds the half-grid difference, the a''(0) extrapolation error and the
/// change from moving the analytic cutoff outwards.
inline std::vector<Estimate> frac_action_multi(const BodySpec& body, const SubspaceFrame& frame,
                                               const std::vector<double>& qs, const QuadratureParams& params,
                                               std::uint64_t seed) {
  params.validate();
  if (frame.dim() != body.dim()) throw DimensionMismatch("frac_action: frame", body.dim(), frame.dim());
  for (double q : qs) {
    if (!(q > 0.0 && q < 4.0)) throw InvalidArgument("frac_action: q must lie in (0, 2) or (2, 4)");
    if (q < 1e-3 || std::abs(q - 2.0) < 1e-3 || q > 4.0 - 1e-3)
      throw InvalidArgument("frac_action: q within 1e-3 of 0, 2 or 4; use section_volume or laplacian_A_at_zero");
  }
  const int kappa = body.kappa, dim = body.dim();
  const auto rule = half_sphere_rule(kappa);
  const int n_half = std::max(2, 2 * (params.t_grid.points / 4));  // intervals per grid part, even
  const double h = fd_base_step(body, frame, params);

  struct DirectionPlan {
    double weight;
    double T;
    std::size_t fd[3];             // centers at h, 2h, 4h
    std::vector<double> t;         // grid nodes, t0 ... T
    std::vector<std::size_t> idx;  // center index per node
  };
  detail::SliceCenters centers;
  const std::size_t origin = centers.add(std::vector<double>(dim, 0.0), 0.0);
  std::vector<DirectionPlan> plans;
  for (const auto& node : rule) {
    const SliceCenter sc = slice_center(body, frame, node.omega);
    if (!(sc.min_gauge > 0.0)) throw NumericalFailure("frac_action: body is unbounded along H^perp");
    DirectionPlan p;
    p.weight = node.weight;
    p.T = params.t_grid.t_max > 0.0 ? params.t_grid.t_max : 1.0 / sc.min_gauge;
    auto center_at = [&](double t) {
      std::vector<double> x(dim);
      for (int i = 0; i < dim; ++i) x[i] = t * sc.point[i];
      return centers.add(std::move(x), t * sc.min_gauge);
    };
    for (int j = 0; j < 3; ++j) p.fd[j] = center_at(h * (1 << j));
    const double t0 = params.t_grid.t_min * p.T, tb = 0.1 * p.T;
    for (int i = 0; i <= n_half; ++i) p.t.push_back(t0 * std::pow(tb / t0, static_cast<double>(i) / n_half));
    for (int i = 1; i <= n_half; ++i) p.t.push_back(tb + (p.T - tb) * i / n_half);
    for (double t : p.t) p.idx.push_back(center_at(t));
    plans.push_back(std::move(p));
  }

  const std::size_t nq = qs.size();
  // outputs per q: I, I_half_grid - I, I_coarse_a2 - I, I_outer_cut - I
  auto integrate = [&](const DirectionPlan& p, std::span<const double> f, double a2, double q, int stride,
                       int cut) {
    const double a0 = f[origin];
    const bool sub = q > 2.0;
    auto F = [&](std::size_t i) {
      const double t = p.t[i];
      return (f[p.idx[i]] - a0 - (sub ? 0.5 * a2 * t * t : 0.0)) * std::pow(t, -1.0 - q);
    };
    const double tc = p.t[cut];
    const double rc = f[p.idx[cut]] - a0 - (sub ? 0.5 * a2 * tc * tc : 0.0);
    double total = rc * std::pow(tc, -q) / (sub ? 4.0 - q : 2.0 - q);
    // log part: trapezoid in ln t on nodes cut .. n_half
    const double dl = std::log(p.t[n_half] / p.t[0]) / n_half * stride;
    for (int i = cut; i + stride <= n_half; i += stride)
      total += 0.5 * dl * (F(i) * p.t[i] + F(i + stride) * p.t[i + stride]);
    const double du = (p.T - p.t[n_half]) / n_half * stride;
    for (int i = n_half; i + stride <= 2 * n_half; i += stride) total += 0.5 * du * (F(i) + F(i + stride));
    total += -a0 * std::pow(p.T, -q) / q;
    if (sub) total += -0.5 * a2 * std::pow(p.T, 2.0 - q) / (q - 2.0);
    return total;
  };

  const auto stats = detail::sample_slices(
      body, frame, centers, 4 * nq, params, seed, [&](std::span<const double> f, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& p : plans) {
          const double a0 = f[origin];
          double d[3];
          for (int j = 0; j < 3; ++j) {
            const double H = h * (1 << j);
            d[j] = 2.0 * (f[p.fd[j]] - a0) / (H * H);
          }
          const double a2 = (4.0 * d[0] - d[1]) / 3.0, a2c = (4.0 * d[1] - d[2]) / 3.0;
          for (std::size_t k = 0; k < nq; ++k) {
            const double q = qs[k];
            const double w = p.weight / std::tgamma(-0.5 * q);
            const double base = integrate(p, f, a2, q, 1, 0);
            out[4 * k] += w * base;
            out[4 * k + 1] += w * (integrate(p, f, a2, q, 2, 0) - base);
            out[4 * k + 2] += w * (integrate(p, f, a2c, q, 1, 0) - base);
            out[4 * k + 3] += w * (integrate(p, f, a2, q, 1, 4) - base);
          }
        }
      });
  std::vector<Estimate> res;
  for (std::size_t k = 0; k < nq; ++k) {
    Estimate e = detail::to_estimate(stats[4 * k], seed);
    e.numerical_error = std::abs(stats[4 * k + 1].mean()) + std::abs(stats[4 * k + 2].mean()) / 15.0 +
                        std::abs(stats[4 * k + 3].mean());
    res.push_back(e);
  }
  return res;
}

inline Estimate frac_action(const BodySpec& body, const SubspaceFrame& frame, double q, const QuadratureParams& params,
                            std::uint64_t seed) {
  return frac_action_multi(body, frame, {q}, params, seed).front();
}

}  // namespace bplab
