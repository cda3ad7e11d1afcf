// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "gifilter/manifold/connection.hpp"
#include "gifilter/manifold/expansions.hpp"
#include "gifilter/manifold/geodesic.hpp"
#include "gifilter/mc/parallel.hpp"

namespace gifilter {

/// Mean and covariance of a random tangent vector at `base`.
struct TangentMoments {
  Vec base;
  Vec mu;
  Mat sigma;

  void validate(const Chart& chart) const {
    chart.require(base, "TangentMoments");
    require_dim(mu.size(), chart.dim, "TangentMoments mu");
    require_dim(sigma.rows(), chart.dim, "TangentMoments sigma");
    require_dim(sigma.cols(), chart.dim, "TangentMoments sigma");
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) {
      throw InvalidArgument("TangentMoments: sigma is not symmetric");
    }
    if (!is_psd(Eigen::MatrixXd(sigma), 1e-12)) throw InvalidArgument("TangentMoments: sigma is not PSD");
  }
};

/// (1/3) sum_ijk R_ijk mu^i Sigma^jk, i.e. (1/3) sum_jk Sigma^jk R(mu, e_j) e_k.
inline Vec barycentre_correction(const Chart& chart, const Vec& x, const Vec& mu, const Mat& sigma) {
  const int p = chart.dim;
  Vec r = Vec::Zero(p);
  if (mu.isZero(0.0)) return r;
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) {
      if (sigma(j, k) == 0.0) continue;
      r += sigma(j, k) * curvature(chart, x, mu, basis(p, j), basis(p, k));
    }
  }
  return r / 3.0;
}

/// Curvature-corrected exponential barycentre exp_x(mu - correction), with
/// the exponential taken from its third-order coordinate expansion.
inline Vec exp_barycentre(const Chart& chart, const TangentMoments& m) {
  m.validate(chart);
  return exp_taylor(chart, m.base, Vec(m.mu - barycentre_correction(chart, m.base, m.mu, m.sigma)), 1.0);
}

/// Sample mean of exp_z^{-1}(sample) with the numerical logarithm.
inline Vec residual_mean(const Chart& chart, const Vec& z, const std::vector<Vec>& samples,
                         const LogOptions& opt = {}, int threads = 1) {
  chart.require(z, "residual_mean");
  if (samples.empty()) throw InvalidArgument("residual_mean: no samples");
  const Eigen::VectorXd s = deterministic_sum(samples.size(), chart.dim, threads, [&](std::size_t i) {
    try {
      return Eigen::VectorXd(log_map(chart, z, samples[i], opt));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string("residual_mean: ") + e.what(), static_cast<long>(i));
    } catch (const DomainError& e) {
      throw ConvergenceError(std::string("residual_mean: ") + e.what(), static_cast<long>(i));
    }
  });
  return Vec(s / static_cast<double>(samples.size()));
}

/// A (1,3) tensor evaluated on three tangent vectors at a fixed point.
using Tensor13 = std::function<Vec(const Vec&, const Vec&, const Vec&)>;

/// T = R at z: T(a, b, c) = R(a, b) c.
inline Tensor13 curvature_tensor(const Chart& chart, const Vec& z) {
  return [chart, z](const Vec& a, const Vec& b, const Vec& c) { return curvature(chart, z, a, b, c); };
}

/// T(a, b, c) = g_z(a, b) c. Unlike R it does not vanish on the diagonal,
/// so it gives the third-moment check something to measure.
inline Tensor13 metric_cubic_tensor(const Chart& chart, const Vec& z) {
  const Mat g = chart.has_metric() ? chart.g(z) : identity(chart.dim);
  return [g](const Vec& a, const Vec& b, const Vec& c) -> Vec { return a.dot(g * b) * c; };
}

/// Sample mean of T(eta, eta, eta) with eta = exp_z^{-1}(sample).
inline Vec third_moment_check(const Chart& chart, const Vec& z, const std::vector<Vec>& samples, const Tensor13& T,
                              const LogOptions& opt = {}, int threads = 1) {
  chart.require(z, "third_moment_check");
  if (samples.empty()) throw InvalidArgument("third_moment_check: no samples");
  const Eigen::VectorXd s = deterministic_sum(samples.size(), chart.dim, threads, [&](std::size_t i) {
    try {
      const Vec eta = log_map(chart, z, samples[i], opt);
      return Eigen::VectorXd(T(eta, eta, eta));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string("third_moment_check: ") + e.what(), static_cast<long>(i));
    } catch (const DomainError& e) {
      throw ConvergenceError(std::string("third_moment_check: ") + e.what(), static_cast<long>(i));
    }
  });
  return Vec(s / static_cast<double>(samples.size()));
}

}  // namespace gifilter
