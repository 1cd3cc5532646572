#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "bplab/block_vector.hpp"
#include "bplab/core.hpp"
#include "bplab/frame.hpp"
#include "bplab/profile.hpp"
#include "bplab/random.hpp"
#include "bplab/rotation.hpp"

namespace bplab {

/// Partitions of k into at most `parts` positive parts, each in non-increasing order.
inline std::vector<std::vector<int>> partitions(int k, int parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int rest, int maxv) {
    if (rest == 0) {
      out.push_back(cur);
      return;
    }
    if (static_cast<int>(cur.size()) == parts) return;
    for (int v = std::min(rest, maxv); v >= 1; --v) {
      cur.push_back(v);
      rec(rest - v, v);
      cur.pop_back();
    }
  };
  rec(k, k);
  return out;
}

/// Distinct permutations of a partition padded with zeros to length n.
inline std::vector<std::vector<int>> orbit(std::vector<int> lambda, int n) {
  lambda.resize(n, 0);
  std::sort(lambda.begin(), lambda.end());
  std::vector<std::vector<int>> out;
  do out.push_back(lambda);
  while (std::next_permutation(lambda.begin(), lambda.end()));
  return out;
}

namespace detail {

// Monomials t^a are keyed by 4 bits per variable.
inline std::uint64_t mono_key(const std::vector<int>& a) {
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < a.size(); ++i) key |= static_cast<std::uint64_t>(a[i]) << (4 * i);
  return key;
}
inline std::uint64_t mono_bump(std::uint64_t key, int i) { return key + (std::uint64_t{1} << (4 * i)); }

using HomPoly = std::unordered_map<std::uint64_t, double>;

}  // namespace detail

/// Gaussian moments E[prod_i (Y^T A_i Y)^{a_i}], Y ~ N(0, I_d), for every a with |a| = k.
///
/// They are prod_i a_i! times the coefficients of t^a in
/// det(I - 2 sum_i t_i A_i)^{-1/2} = exp(sum_j 2^{j-1} tr((sum_i t_i A_i)^j) / j).
inline std::unordered_map<std::uint64_t, double> quadratic_form_moments(const std::vector<Eigen::MatrixXd>& A, int k) {
  const int n = static_cast<int>(A.size());
  if (n > 16 || k > 15) throw InvalidArgument("quadratic_form_moments: at most 16 forms and degree 15");
  using MatPoly = std::unordered_map<std::uint64_t, Eigen::MatrixXd>;
  std::vector<detail::HomPoly> L(k + 1);
  MatPoly P;
  P[0] = Eigen::MatrixXd::Identity(A[0].rows(), A[0].cols());
  for (int j = 1; j <= k; ++j) {
    MatPoly next;
    for (const auto& [key, M] : P)
      for (int i = 0; i < n; ++i) {
        const std::uint64_t nk = detail::mono_bump(key, i);
        auto it = next.find(nk);
        if (it == next.end())
          next.emplace(nk, M * A[i]);
        else
          it->second.noalias() += M * A[i];
      }
    P = std::move(next);
    const double c = std::pow(2.0, j - 1) / j;
    for (const auto& [key, M] : P) L[j][key] = c * M.trace();
  }
  std::vector<detail::HomPoly> F(k + 1);
  F[0][0] = 1.0;
  for (int j = 1; j <= k; ++j) {
    for (int i = 1; i <= j; ++i)
      for (const auto& [ka, va] : L[i])
        for (const auto& [kb, vb] : F[j - i]) F[j][ka + kb] += i * va * vb / j;
  }
  std::unordered_map<std::uint64_t, double> moments;
  for (const auto& [key, v] : F[k]) {
    double fact = 1.0;
    for (int i = 0; i < n; ++i)
      for (int e = 2; e <= static_cast<int>((key >> (4 * i)) & 0xF); ++e) fact *= e;
    moments[key] = fact * v;
  }
  return moments;
}

/// The section transform (R f)(xi) = int_{S ∩ H_xi} f on homogeneous degree-k symmetric
/// polynomials of the block-norm profile, in the basis of monomial symmetric polynomials
/// m_lambda(s) = sum over the orbit of lambda of prod_i s_i^{a_i}.
class SectionTransform {
 public:
  SectionTransform(int kappa, int n, int k)
      : kappa_(kappa), n_(n), k_(k), family_(hurwitz_radon_family(kappa)), basis_(partitions(k, n)) {
    if (k < 1) throw InvalidArgument("SectionTransform: degree must be >= 1");
    const int d = kappa * n - kappa;
    radial_moment_ = std::pow(2.0, k) * std::exp(std::lgamma(0.5 * d + k) - std::lgamma(0.5 * d));
    area_ = sphere_area(d);
  }

  int degree() const { return k_; }
  const std::vector<std::vector<int>>& basis() const { return basis_; }

  /// (R m_lambda)(xi) for every basis element, exactly up to rounding.
  std::vector<double> apply_basis(const BlockVector& xi) const {
    const SubspaceFrame f = section_frame(xi, family_);
    const int d = f.section_dim();
    std::vector<Eigen::MatrixXd> A(n_, Eigen::MatrixXd::Zero(d, d));
    for (int i = 0; i < n_; ++i)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double s = 0.0;
          for (int c = 0; c < kappa_; ++c) s += f.e_in[a][i * kappa_ + c] * f.e_in[b][i * kappa_ + c];
          A[i](a, b) = s;
        }
    const auto mom = quadratic_form_moments(A, k_);
    std::vector<double> out;
    for (const auto& lam : basis_) {
      double acc = 0.0;
      for (const auto& a : orbit(lam, n_)) {
        auto it = mom.find(detail::mono_key(a));
        if (it != mom.end()) acc += it->second;
      }
      out.push_back(area_ * acc / radial_moment_);
    }
    return out;
  }

  /// Unit direction whose block-norm profile is s (sum s_i = 1).
  BlockVector direction_with_profile(std::span<const double> s) const {
    BlockVector xi(kappa_, n_);
    for (int i = 0; i < n_; ++i) xi[static_cast<std::size_t>(i) * kappa_] = std::sqrt(std::max(s[i], 0.0));
    return xi.normalized();
  }

  struct Solution {
    BlockNormPolynomial h;
    std::vector<double> coeffs;  // per basis element
    double residual = 0.0;       // max |R h - g| at the collocation points, relative to max |g|
    double min_singular = 0.0, max_singular = 0.0;
  };

  /// Symmetric degree-k h with R h = g, by least squares at 3 |basis| + n + 1 collocation
  /// profiles (random simplex points, the vertices, the barycenter). g must be a
  /// homogeneous degree-k symmetric polynomial of the profile for the fit to be exact.
  Solution invert(const std::function<double(std::span<const double>)>& g) const {
    std::vector<std::vector<double>> pts;
    Rng rng = make_rng(0x5ec7, static_cast<std::uint64_t>(k_));
    std::exponential_distribution<double> expo(1.0);
    const std::size_t nb = basis_.size();
    for (std::size_t j = 0; j < 3 * nb; ++j) {
      std::vector<double> s(n_);
      double tot = 0.0;
      for (double& v : s) tot += (v = expo(rng));
      for (double& v : s) v /= tot;
      pts.push_back(s);
    }
    for (int i = 0; i < n_; ++i) {
      std::vector<double> s(n_, 0.0);
      s[i] = 1.0;
      pts.push_back(s);
    }
    pts.push_back(std::vector<double>(n_, 1.0 / n_));

    Eigen::MatrixXd M(pts.size(), nb);
    Eigen::VectorXd rhs(pts.size());
    for (std::size_t r = 0; r < pts.size(); ++r) {
      const auto row = apply_basis(direction_with_profile(pts[r]));
      for (std::size_t c = 0; c < nb; ++c) M(r, c) = row[c];
      rhs[r] = g(pts[r]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd c = svd.solve(rhs);
    Solution sol;
    sol.min_singular = svd.singularValues().minCoeff();
    sol.max_singular = svd.singularValues().maxCoeff();
    sol.residual = (M * c - rhs).cwiseAbs().maxCoeff() / std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
    for (std::size_t b = 0; b < nb; ++b) {
      sol.coeffs.push_back(c[b]);
      for (auto& a : orbit(basis_[b], n_)) sol.h.terms.push_back({a, c[b]});
    }
    return sol;
  }

 private:
  int kappa_, n_, k_;
  RotationFamily family_;
  std::vector<std::vector<int>> basis_;
  double radial_moment_ = 1.0, area_ = 1.0;
};

}  // namespace bplab
