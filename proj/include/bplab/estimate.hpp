#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

#include "bplab/core.hpp"

namespace bplab {

/// Result of an estimator.
///
/// `std_error` is the Monte Carlo standard error (sample standard deviation over
/// sqrt(n_samples)), zero on closed-form paths. `numerical_error` is a deterministic
/// bound on discretization and root-finding error (finite differences, radial grid,
/// bracket tolerance). Statistical gates use sigma(), which combines both.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  double numerical_error = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
  bool inconclusive = false;

  double sigma() const { return std::hypot(std_error, numerical_error); }

  Estimate scaled(double c) const {
    Estimate e = *this;
    e.value *= c;
    e.std_error *= std::abs(c);
    e.numerical_error *= std::abs(c);
    return e;
  }
};

/// |a - b| measured in combined standard errors of two independent estimates.
inline double z_distance(const Estimate& a, const Estimate& b) {
  const double s = std::hypot(a.sigma(), b.sigma());
  const double d = std::abs(a.value - b.value);
  if (s == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return d / s;
}

/// True when |estimate - target| <= k sigma, with a relative floor for exact
/// (zero-variance) estimators that only carry floating point rounding.
inline bool within_sigma(const Estimate& e, double target, double k = 3.0) {
  const double floor = 1e-12 * std::max(1.0, std::abs(target));
  return std::abs(e.value - target) <= k * e.sigma() + floor;
}

struct RadialGrid {
  double t_min = 0.02;  // inner cutoff as a fraction of the support radius
  double t_max = 0.0;   // 0: use the support radius along each direction
  int points = 512;
};

struct QuadratureParams {
  std::int64_t n_samples = 100000;
  RadialGrid t_grid;
  double fd_step = 0.04;  // fraction of the inradius along H^perp
  double bisect_tol = 1e-13;

  void validate() const {
    if (n_samples < 1) throw InvalidArgument("QuadratureParams: n_samples must be >= 1");
    if (!(t_grid.t_min > 0.0) || t_grid.t_min >= 0.1)
      throw InvalidArgument("QuadratureParams: t_min must lie in (0, 0.1)");
    if (t_grid.t_max < 0.0) throw InvalidArgument("QuadratureParams: t_max must be >= 0");
    if (t_grid.points < 16) throw InvalidArgument("QuadratureParams: at least 16 radial points");
    if (!(fd_step > 0.0) || fd_step > 0.1)
      throw InvalidArgument("QuadratureParams: fd_step must lie in (0, 0.1]");
    if (!(bisect_tol > 0.0) || bisect_tol > 1e-10)
      throw InvalidArgument("QuadratureParams: bisect_tol must lie in (0, 1e-10]");
  }
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Mean and variance of a stream of samples; partial accumulators merge in a fixed order.
class SampleStats {
 public:
  void add(double x) {
    ++n_;
    sum_.add(x);
    sq_.add(x * x);
  }
  void merge(const SampleStats& o) {
    n_ += o.n_;
    sum_.add(o.sum_.value());
    sq_.add(o.sq_.value());
  }
  std::int64_t count() const { return n_; }
  double mean() const { return n_ ? sum_.value() / static_cast<double>(n_) : 0.0; }
  double variance() const {
    if (n_ < 2) return 0.0;
    const double m = mean();
    const double v = (sq_.value() - static_cast<double>(n_) * m * m) / static_cast<double>(n_ - 1);
    return std::max(v, 0.0);
  }
  double std_error() const { return n_ ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::int64_t n_ = 0;
  CompensatedSum sum_;
  CompensatedSum sq_;
};

inline constexpr std::int64_t kChunkSize = 1024;

inline std::size_t chunk_count(std::int64_t n_samples) {
  return static_cast<std::size_t>((n_samples + kChunkSize - 1) / kChunkSize);
}

/// Runs fn(chunk) for chunk in [0, n_chunks) on the available hardware threads.
/// Callers store per-chunk results by index and reduce them in index order, so
/// results do not depend on the thread count.
template <class Fn>
void parallel_chunks(std::size_t n_chunks, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < n_chunks && !failed; c = next++) {
        try {
          fn(c);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Samples of chunk c span [c * kChunkSize, min(n, (c + 1) * kChunkSize)).
inline std::int64_t chunk_length(std::size_t c, std::int64_t n_samples) {
  const std::int64_t begin = static_cast<std::int64_t>(c) * kChunkSize;
  return std::min(kChunkSize, n_samples - begin);
}

}  // namespace bplab
