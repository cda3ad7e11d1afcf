// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gifilter/core/errors.hpp"

namespace gifilter {

/// Running first and second moment sums of a feature vector, accumulated
/// around a fixed shift to limit cancellation.
struct MomentSums {
  double n = 0.0;
  Eigen::VectorXd s1;
  Eigen::MatrixXd s2;

  MomentSums() = default;
  explicit MomentSums(long dim) : s1(Eigen::VectorXd::Zero(dim)), s2(Eigen::MatrixXd::Zero(dim, dim)) {}

  long dim() const { return s1.size(); }

  void add(const Eigen::VectorXd& z) {
    n += 1.0;
    s1 += z;
    s2.selfadjointView<Eigen::Lower>().rankUpdate(z);
  }

  MomentSums& operator+=(const MomentSums& o) {
    if (s1.size() == 0) return *this = o;
    n += o.n;
    s1 += o.s1;
    s2 += o.s2;
    return *this;
  }

  Eigen::VectorXd mean() const { return s1 / n; }

  /// Unbiased covariance.
  Eigen::MatrixXd cov() const {
    Eigen::MatrixXd m2 = s2.selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd mu = mean();
    return (m2 - n * mu * mu.transpose()) / (n - 1.0);
  }
};

struct MeanEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd se;   // standard error per component
  Eigen::MatrixXd cov;  // covariance of the (control-variate adjusted) per-sample values
  double n = 0.0;
};

/// Mean of the first m features, optionally adjusted with the remaining
/// features as control variates whose exact means are `control_means`.
/// Regression coefficients are estimated from the same sums; the O(1/n)
/// bias this introduces is far below the standard error at the sample sizes
/// used here.
inline MeanEstimate cv_mean(const MomentSums& s, long m, const Eigen::VectorXd& shift,
                            const Eigen::VectorXd& control_means = {}) {
  if (s.n < 3) throw InvalidArgument("cv_mean: need at least 3 samples");
  const long k = s.dim() - m;
  if (k < 0 || shift.size() != s.dim()) throw InvalidArgument("cv_mean: dimension mismatch");
  const Eigen::VectorXd mu = s.mean();
  const Eigen::MatrixXd c = s.cov();
  MeanEstimate e;
  e.n = s.n;
  if (k == 0) {
    e.mean = mu + shift;
    e.cov = c;
  } else {
    const Eigen::MatrixXd sff = c.topLeftCorner(m, m);
    const Eigen::MatrixXd sfc = c.topRightCorner(m, k);
    const Eigen::MatrixXd scc = c.bottomRightCorner(k, k);
    // scc may be near-singular when controls are collinear; solve robustly
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(scc);
    const Eigen::MatrixXd beta = cod.solve(sfc.transpose()).transpose();
    Eigen::VectorXd cm = control_means.size() == 0 ? Eigen::VectorXd::Zero(k) : control_means;
    const Eigen::VectorXd cbar = mu.tail(k) + shift.tail(k);
    e.mean = mu.head(m) + shift.head(m) - beta * (cbar - cm);
    e.cov = sff - beta * sfc.transpose();
    e.cov *= (s.n - 1.0) / std::max(1.0, s.n - static_cast<double>(k) - 1.0);
  }
  e.se = (e.cov.diagonal().cwiseMax(0.0) / s.n).cwiseSqrt();
  return e;
}

/// Centered products of standard-normal coordinates: every monomial of
/// even total degree 2..max_degree (or of every degree 1..max_degree),
/// minus its exact expectation prod (a_i - 1)!!. Exact-mean-zero control
/// variates for functions of Gaussian inputs; the even ones suffice after
/// antithetic pairing.
class GaussianMonomials {
 public:
  GaussianMonomials(int dim, int max_degree, bool odd_degrees = false) : dim_(dim) {
    if (dim < 1 || max_degree < 2) throw InvalidArgument("GaussianMonomials: bad arguments");
    std::vector<int> a(static_cast<size_t>(dim), 0);
    for (int deg = odd_degrees ? 1 : 2; deg <= max_degree; deg += odd_degrees ? 1 : 2) enumerate(a, 0, deg);
  }

  long size() const { return static_cast<long>(powers_.size()); }

  template <class V>
  void fill(const V& xi, Eigen::Ref<Eigen::VectorXd> out) const {
    for (size_t j = 0; j < powers_.size(); ++j) {
      double p = 1.0;
      for (int i = 0; i < dim_; ++i) {
        for (int r = 0; r < powers_[j][static_cast<size_t>(i)]; ++r) p *= xi(i);
      }
      out(static_cast<long>(j)) = p - means_[j];
    }
  }

 private:
  static double dfact(int a) {
    double r = 1.0;
    for (int k = a - 1; k > 1; k -= 2) r *= k;
    return r;
  }

  void enumerate(std::vector<int>& a, int i, int left) {
    if (i == dim_ - 1) {
      a[static_cast<size_t>(i)] = left;
      double m = 1.0;
      for (int v : a) m *= (v % 2 == 0) ? dfact(v) : 0.0;
      powers_.push_back(a);
      means_.push_back(m);
      return;
    }
    for (int k = left; k >= 0; --k) {
      a[static_cast<size_t>(i)] = k;
      enumerate(a, i + 1, left - k);
    }
  }

  int dim_;
  std::vector<std::vector<int>> powers_;
  std::vector<double> means_;
};

}  // namespace gifilter
