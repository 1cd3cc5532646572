#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bplab/block_vector.hpp"
#include "bplab/core.hpp"
#include "bplab/random.hpp"

namespace bplab {

/// Orthogonal matrices J_0 = I, J_1, ..., J_{kappa-1} with J_m skew for m >= 1 and
/// pairwise anticommuting, so x, J_1 x, ..., J_{kappa-1} x are orthonormal for unit x.
struct RotationFamily {
  int kappa = 1;
  std::vector<Eigen::MatrixXd> matrices;
};

namespace detail {

// Cayley-Dickson product on R^{2^k}: (p, q)(r, s) = (p r - conj(s) q, s p + q conj(r)).
inline std::vector<double> cd_conj(std::span<const double> a) {
  std::vector<double> c(a.begin(), a.end());
  for (std::size_t i = 1; i < c.size(); ++i) c[i] = -c[i];
  return c;
}

inline std::vector<double> cd_mul(std::span<const double> a, std::span<const double> b) {
  const std::size_t d = a.size();
  if (d == 1) return {a[0] * b[0]};
  const std::size_t h = d / 2;
  auto p = a.subspan(0, h), q = a.subspan(h, h);
  auto r = b.subspan(0, h), s = b.subspan(h, h);
  const auto sc = cd_conj(s), rc = cd_conj(r);
  const auto pr = cd_mul(p, r), scq = cd_mul(sc, q);
  const auto sp = cd_mul(s, p), qrc = cd_mul(q, rc);
  std::vector<double> out(d);
  for (std::size_t i = 0; i < h; ++i) {
    out[i] = pr[i] - scq[i];
    out[h + i] = sp[i] + qrc[i];
  }
  return out;
}

}  // namespace detail

/// Left-multiplication tables of the real, complex, quaternion and octonion units.
/// With this table J_1 e_0 = e_1 for every kappa >= 2.
inline RotationFamily hurwitz_radon_family(int kappa) {
  if (kappa != 1 && kappa != 2 && kappa != 4 && kappa != 8) throw UnsupportedKappa(kappa);
  RotationFamily fam;
  fam.kappa = kappa;
  for (int m = 0; m < kappa; ++m) {
    std::vector<double> unit(kappa, 0.0);
    unit[m] = 1.0;
    Eigen::MatrixXd J(kappa, kappa);
    for (int c = 0; c < kappa; ++c) {
      std::vector<double> basis(kappa, 0.0);
      basis[c] = 1.0;
      const auto col = detail::cd_mul(unit, basis);
      for (int r = 0; r < kappa; ++r) J(r, c) = col[r];
    }
    fam.matrices.push_back(std::move(J));
  }
  return fam;
}

inline double orthogonality_defect(const Eigen::MatrixXd& sigma) {
  return (sigma.transpose() * sigma - Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols())).norm();
}

/// Applies sigma to every kappa-block of x: x -> R_sigma x.
inline void block_rotate_into(const Eigen::MatrixXd& sigma, std::span<const double> x, std::span<double> out) {
  const auto k = static_cast<std::size_t>(sigma.rows());
  for (std::size_t b = 0; b < x.size() / k; ++b)
    for (std::size_t r = 0; r < k; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < k; ++c) acc += sigma(r, c) * x[b * k + c];
      out[b * k + r] = acc;
    }
}

inline BlockVector block_rotate(const Eigen::MatrixXd& sigma, const BlockVector& x) {
  if (sigma.rows() != x.kappa() || sigma.cols() != x.kappa())
    throw DimensionMismatch("block_rotate: sigma", x.kappa(), sigma.rows());
  if (orthogonality_defect(sigma) > 1e-8)
    throw InvalidArgument("block_rotate: sigma is not orthogonal (|s^T s - I| > 1e-8)");
  BlockVector out(x.kappa(), x.n());
  block_rotate_into(sigma, x.coords(), out.coords());
  return out;
}

/// Haar-distributed element of SO(kappa).
inline Eigen::MatrixXd random_rotation(int kappa, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(kappa, kappa);
  for (int r = 0; r < kappa; ++r)
    for (int c = 0; c < kappa; ++c) g(r, c) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd rm = qr.matrixQR();
  for (int c = 0; c < kappa; ++c)
    if (rm(c, c) < 0) q.col(c) = -q.col(c);
  if (q.determinant() < 0) q.col(0) = -q.col(0);
  return q;
}

}  // namespace bplab
