#include "hpsteal/kernels.hpp"

#include <cmath>

#include <fmt/format.h>

#include "hpsteal/errors.hpp"

namespace hpsteal {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw Error(ErrorCode::InvalidArgument, fmt::format("kernel bandwidth {} must be > 0", sigma));
}

inline double kernel_entry(const Matrix& a, Index i, const Matrix& b, Index j, double scale) {
  double d2 = 0.0;
  for (Index c = 0; c < a.cols(); ++c) {
    const double diff = a(i, c) - b(j, c);
    d2 += diff * diff;
  }
  return std::exp(-d2 * scale);
}

}  // namespace

namespace serial {

Matrix gaussian_kernel(const Matrix& a, const Matrix& b, double sigma) {
  check_sigma(sigma);
  if (a.cols() != b.cols()) throw Error(ErrorCode::LengthMismatch, "kernel inputs differ in width");
  const double scale = 1.0 / (2.0 * sigma * sigma);
  Matrix out(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j) out(i, j) = kernel_entry(a, i, b, j, scale);
  return out;
}

}  // namespace serial

Matrix gaussian_kernel(const Matrix& a, const Matrix& b, double sigma) {
  check_sigma(sigma);
  if (a.cols() != b.cols()) throw Error(ErrorCode::LengthMismatch, "kernel inputs differ in width");
  const double scale = 1.0 / (2.0 * sigma * sigma);
  Matrix out(a.rows(), b.rows());
  const Index rows = a.rows();
  // Each entry depends only on its own pair, so the result is schedule independent.
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < b.rows(); ++j) out(i, j) = kernel_entry(a, i, b, j, scale);
  return out;
}

GramMatrix::GramMatrix(Matrix values, double sigma, double jitter)
    : values_(std::move(values)), sigma_(sigma), jitter_(jitter) {
  if (values_.rows() != values_.cols())
    throw Error(ErrorCode::InvalidArgument, "Gram matrix must be square");
  if (!(jitter_ >= 0.0)) throw Error(ErrorCode::InvalidArgument, "jitter must be >= 0");
  llt_.compute(values_);
  if (llt_.info() != Eigen::Success)
    throw Error(ErrorCode::NotPositiveDefinite,
                fmt::format("Cholesky factorization of the {}x{} Gram matrix failed with jitter {}; "
                            "raise the jitter",
                            values_.rows(), values_.cols(), jitter_));
}

Vector GramMatrix::solve(const Vector& rhs) const {
  if (rhs.size() != size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("right-hand side has length {}, Gram matrix is {}x{}", rhs.size(), size(),
                            size()));
  return llt_.solve(rhs);
}

GramMatrix gram_gaussian(const Dataset& ds, double sigma, double jitter) {
  if (!(jitter >= 0.0)) throw Error(ErrorCode::InvalidArgument, "jitter must be >= 0");
  Matrix K = gaussian_kernel(ds.X(), ds.X(), sigma);
  // Exact symmetry and unit diagonal regardless of rounding in the distance sums.
  K = 0.5 * (K + K.transpose()).eval();
  K.diagonal().setConstant(1.0 + jitter);
  return GramMatrix(std::move(K), sigma, jitter);
}

GramMatrix gram_gaussian_auto(const Dataset& ds, double sigma) {
  try {
    return gram_gaussian(ds, sigma, 0.0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
  }
  GramMatrix K = gram_gaussian(ds, sigma, 1e-8 * static_cast<double>(ds.rows()));
  K.retried_ = true;
  return K;
}

Vector solve_gram(const GramMatrix& K, const Vector& rhs) { return K.solve(rhs); }

}  // namespace hpsteal
