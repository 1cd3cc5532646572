#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "bplab/block_vector.hpp"
#include "bplab/core.hpp"
#include "bplab/rotation.hpp"

namespace bplab {

/// Orthonormal bases of H_xi^perp (e_perp[m] = R_{J_m} xi) and of H_xi (e_in).
struct SubspaceFrame {
  BlockVector xi;
  std::vector<std::vector<double>> e_perp;
  std::vector<std::vector<double>> e_in;

  int kappa() const { return xi.kappa(); }
  int n() const { return xi.n(); }
  int dim() const { return xi.dim(); }
  int section_dim() const { return static_cast<int>(e_in.size()); }

  /// out = sum_j z_j e_in[j].
  void embed_in(std::span<const double> z, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < e_in.size(); ++j) {
      const double c = z[j];
      const auto& e = e_in[j];
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * e[i];
    }
  }

  /// out = sum_m u_m e_perp[m].
  void embed_perp(std::span<const double> u, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t m = 0; m < e_perp.size(); ++m)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += u[m] * e_perp[m][i];
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Completion of e_perp by modified Gram-Schmidt over the standard basis, each step
/// taking the basis vector with the largest residual (ties broken by lowest index).
inline SubspaceFrame section_frame(const BlockVector& xi, const RotationFamily& family) {
  if (family.kappa != xi.kappa()) throw DimensionMismatch("section_frame: family", xi.kappa(), family.kappa);
  if (std::abs(xi.norm() - 1.0) > 1e-12) throw InvalidArgument("section_frame: xi must be a unit vector");
  const int dim = xi.dim();
  SubspaceFrame f{xi, {}, {}};
  for (const auto& J : family.matrices) {
    std::vector<double> v(dim);
    block_rotate_into(J, xi.coords(), v);
    f.e_perp.push_back(std::move(v));
  }

  std::vector<std::vector<double>> basis = f.e_perp;
  std::vector<std::vector<double>> residual(dim, std::vector<double>(dim, 0.0));
  for (int i = 0; i < dim; ++i) residual[i][i] = 1.0;
  std::vector<bool> used(dim, false);
  auto project_out = [](std::vector<double>& r, const std::vector<double>& b) {
    const double c = dot(r, b);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * b[i];
  };
  for (const auto& b : basis)
    for (auto& r : residual) project_out(r, b);

  while (static_cast<int>(basis.size()) < dim) {
    int best = -1;
    double best_norm = -1.0;
    for (int i = 0; i < dim; ++i) {
      if (used[i]) continue;
      const double nr = std::sqrt(dot(residual[i], residual[i]));
      if (nr > best_norm) {
        best_norm = nr;
        best = i;
      }
    }
    if (best < 0 || best_norm < 1e-8) throw NumericalFailure("section_frame: rank-deficient completion");
    used[best] = true;
    std::vector<double> e = residual[best];
    // second pass restores orthogonality lost to cancellation
    for (const auto& b : basis) project_out(e, b);
    const double nr = std::sqrt(dot(e, e));
    for (double& c : e) c /= nr;
    for (int i = 0; i < dim; ++i)
      if (!used[i]) project_out(residual[i], e);
    basis.push_back(e);
    f.e_in.push_back(std::move(e));
  }
  return f;
}

/// max |<v_a, v_b> - delta_ab| over all frame vectors.
inline double frame_gram_defect(const SubspaceFrame& f) {
  std::vector<const std::vector<double>*> all;
  for (const auto& v : f.e_perp) all.push_back(&v);
  for (const auto& v : f.e_in) all.push_back(&v);
  double worst = 0.0;
  for (std::size_t a = 0; a < all.size(); ++a)
    for (std::size_t b = a; b < all.size(); ++b)
      worst = std::max(worst, std::abs(dot(*all[a], *all[b]) - (a == b ? 1.0 : 0.0)));
  return worst;
}

}  // namespace bplab
