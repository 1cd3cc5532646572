#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "bplab/core.hpp"

namespace bplab {

/// A point of R^{kappa n} read as n consecutive blocks of kappa coordinates.
class BlockVector {
 public:
  BlockVector(int kappa, int n) : BlockVector(kappa, n, std::vector<double>(checked_dim(kappa, n))) {}

  BlockVector(int kappa, int n, std::vector<double> coords)
      : kappa_(kappa), n_(n), coords_(std::move(coords)) {
    const std::size_t dim = checked_dim(kappa, n);
    if (coords_.size() != dim) throw DimensionMismatch("BlockVector", dim, coords_.size());
  }

  int kappa() const { return kappa_; }
  int n() const { return n_; }
  int dim() const { return kappa_ * n_; }

  std::span<const double> block(int i) const {
    check_block(i);
    return {coords_.data() + static_cast<std::size_t>(kappa_) * i, static_cast<std::size_t>(kappa_)};
  }
  std::span<double> block(int i) {
    check_block(i);
    return {coords_.data() + static_cast<std::size_t>(kappa_) * i, static_cast<std::size_t>(kappa_)};
  }

  std::span<const double> coords() const { return coords_; }
  std::span<double> coords() { return coords_; }
  const std::vector<double>& vec() const { return coords_; }

  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }

  double norm() const {
    double s = 0.0;
    for (double c : coords_) s += c * c;
    return std::sqrt(s);
  }

  double block_norm(int i) const {
    double s = 0.0;
    for (double c : block(i)) s += c * c;
    return std::sqrt(s);
  }

  std::vector<double> block_norms() const {
    std::vector<double> r(n_);
    for (int i = 0; i < n_; ++i) r[i] = block_norm(i);
    return r;
  }

  BlockVector normalized() const {
    const double r = norm();
    if (r == 0.0) throw InvalidArgument("BlockVector::normalized: zero vector");
    BlockVector out = *this;
    for (double& c : out.coords_) c /= r;
    return out;
  }

  friend bool operator==(const BlockVector&, const BlockVector&) = default;

 private:
  static std::size_t checked_dim(int kappa, int n) {
    if (kappa < 1) throw InvalidArgument("BlockVector: kappa must be positive");
    if (n < 2) throw InvalidArgument("BlockVector: n must be >= 2");
    return static_cast<std::size_t>(kappa) * static_cast<std::size_t>(n);
  }
  void check_block(int i) const {
    if (i < 0 || i >= n_) throw InvalidArgument("BlockVector::block: index out of range");
  }

  int kappa_;
  int n_;
  std::vector<double> coords_;
};

/// Squared block norms of x divided by |x|^2 (the block-norm profile on the sphere).
inline void block_profile(std::span<const double> x, int kappa, std::span<double> s) {
  const std::size_t n = s.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < kappa; ++c) {
      const double v = x[i * kappa + c];
      acc += v * v;
    }
    s[i] = acc;
    total += acc;
  }
  if (total > 0.0)
    for (double& v : s) v /= total;
}

}  // namespace bplab
