#pragma once

#include <Eigen/Cholesky>

#include "hpsteal/data.hpp"

namespace hpsteal {

inline constexpr double kDefaultSigma = 10.0;

/// Gaussian Gram matrix K[i][j] = exp(-|x_i - x_j|^2 / (2 sigma^2)) + jitter [i == j],
/// together with its Cholesky factor. A GramMatrix only exists if the factorization
/// succeeded, so every instance is positive definite.
class GramMatrix {
 public:
  GramMatrix(Matrix values, double sigma, double jitter);

  const Matrix& values() const noexcept { return values_; }
  double sigma() const noexcept { return sigma_; }
  double jitter() const noexcept { return jitter_; }
  Index size() const noexcept { return values_.rows(); }
  /// True when gram_gaussian_auto had to retry with jitter.
  bool jitter_retried() const noexcept { return retried_; }

  Vector solve(const Vector& rhs) const;

 private:
  friend GramMatrix gram_gaussian_auto(const Dataset& ds, double sigma);

  Matrix values_;
  double sigma_;
  double jitter_;
  bool retried_ = false;
  Eigen::LLT<Matrix> llt_;
};

/// Cross-kernel matrix between rows of `a` and rows of `b` (OpenMP over rows of `a`).
Matrix gaussian_kernel(const Matrix& a, const Matrix& b, double sigma);

/// Strict construction: throws NotPositiveDefinite when the factorization fails.
GramMatrix gram_gaussian(const Dataset& ds, double sigma = kDefaultSigma, double jitter = 0.0);

/// Tries jitter 0, then retries once at 1e-8 * n.
GramMatrix gram_gaussian_auto(const Dataset& ds, double sigma = kDefaultSigma);

/// Returns v with K v = rhs.
Vector solve_gram(const GramMatrix& K, const Vector& rhs);

namespace serial {

/// Single-threaded reference for gaussian_kernel, kept for tests and benchmarks.
Matrix gaussian_kernel(const Matrix& a, const Matrix& b, double sigma);

}  // namespace serial

}  // namespace hpsteal
