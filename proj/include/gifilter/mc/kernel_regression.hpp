// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "gifilter/core/errors.hpp"
#include "gifilter/mc/parallel.hpp"

namespace gifilter {

/// h_j = scale * sd(Z_j) * n^{-1/(q+4)} per coordinate.
inline Eigen::VectorXd kr_bandwidth(const Eigen::MatrixXd& Z, double scale = 1.0) {
  const long n = Z.rows();
  if (n < 2) throw InvalidArgument("kr_bandwidth: need at least 2 samples");
  if (!(scale > 0.0)) throw InvalidArgument("kr_bandwidth: scale must be positive");
  const Eigen::RowVectorXd mean = Z.colwise().mean();
  const Eigen::RowVectorXd sd = ((Z.rowwise() - mean).array().square().colwise().sum() / (n - 1.0)).sqrt();
  const double rate = std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(Z.cols()) + 4.0));
  return (scale * rate) * sd.transpose();
}

struct KrEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::VectorXd se;  // standard error of the mean, from the weighted variance and ESS
  double ess = 0.0;    // (sum w)^2 / sum w^2
};

/// Nadaraya-Watson estimates of E[U | Z = z] and Var(U | Z = z) with a
/// product Gaussian kernel. Sums are reduced in fixed blocks so the result is
/// independent of the thread count.
inline KrEstimate conditional_moments_kr(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Z,
                                         const Eigen::VectorXd& z, const Eigen::VectorXd& bandwidth,
                                         int threads = 1, double min_ess = 100.0) {
  const long n = U.rows(), p = U.cols(), q = Z.cols();
  if (Z.rows() != n) throw InvalidArgument("conditional_moments_kr: U and Z differ in length");
  if (z.size() != q || bandwidth.size() != q) throw InvalidArgument("conditional_moments_kr: dimension mismatch");
  if ((bandwidth.array() <= 0.0).any()) throw InvalidArgument("conditional_moments_kr: bandwidth must be positive");
  const Eigen::ArrayXd inv_h = bandwidth.array().inverse();
  // features: w, w^2, w u, w u u^T (lower triangle by columns)
  const long dim = 2 + p + p * (p + 1) / 2;
  const Eigen::VectorXd s = deterministic_sum(static_cast<std::size_t>(n), dim, threads, [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double d2 = ((Z.row(r).transpose() - z).array() * inv_h).square().sum();
    const double w = std::exp(-0.5 * d2);
    Eigen::VectorXd f(dim);
    f(0) = w;
    f(1) = w * w;
    for (long a = 0; a < p; ++a) f(2 + a) = w * U(r, a);
    long k = 2 + p;
    for (long a = 0; a < p; ++a) {
      for (long b = a; b < p; ++b) f(k++) = w * U(r, a) * U(r, b);
    }
    return f;
  });
  KrEstimate e;
  const double sw = s(0);
  if (!(sw > 0.0)) throw ConvergenceError("conditional_moments_kr: no kernel mass at the query point");
  e.ess = sw * sw / s(1);
  if (e.ess < min_ess) {
    throw ConvergenceError("conditional_moments_kr: effective sample size " + std::to_string(e.ess) +
                           " below " + std::to_string(min_ess) + " (query too far in the tail)");
  }
  e.mean = s.segment(2, p) / sw;
  e.cov.resize(p, p);
  long k = 2 + p;
  for (long a = 0; a < p; ++a) {
    for (long b = a; b < p; ++b) {
      e.cov(a, b) = e.cov(b, a) = s(k++) / sw - e.mean(a) * e.mean(b);
    }
  }
  e.se = (e.cov.diagonal().cwiseMax(0.0) / e.ess).cwiseSqrt();
  return e;
}

}  // namespace gifilter
