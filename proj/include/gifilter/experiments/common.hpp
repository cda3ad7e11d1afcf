// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gifilter/experiments/report.hpp"
#include "gifilter/mc/order_fit.hpp"
#include "gifilter/mc/rng.hpp"
#include "gifilter/mc/simulate.hpp"
#include "gifilter/mc/stats.hpp"

namespace gifilter::experiments {

/// Random test configurations (points, directions) from a counter stream.
class Draws {
 public:
  Draws(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream, static_cast<std::uint32_t>(StreamDomain::kConfig)) {}

  double uniform(double lo, double hi) { return rng_.uniform(lo, hi); }

  /// A point well inside the chart where the fourth-order terms do not
  /// nearly cancel (warped-r2 degenerates on x1 = 0).
  Vec chart_point(const std::string& chart) {
    Vec x(2);
    if (chart == "poincare-half-plane") {
      x << uniform(-1.0, 1.0), uniform(0.5, 2.0);
    } else if (chart == "warped-r2") {
      const double s = uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      x << s * uniform(0.3, 1.0), uniform(-1.0, 1.0);
    } else {
      x << uniform(-1.0, 1.0), uniform(-1.0, 1.0);
    }
    return x;
  }

  /// Uniform direction of the given coordinate length.
  Vec direction(int n, double len = 1.0) {
    Vec v = rng_.normal_vec(n);
    while (v.norm() < 1e-3) v = rng_.normal_vec(n);
    return (len / v.norm()) * v;
  }

 private:
  NormalStream rng_;
};

inline std::string fmt_fit(const OrderFit& f) { return "slope " + num(f.slope) + " r2 " + num(f.r2); }

/// Errors at a ladder must be positive for a log-log fit; an exact zero is
/// replaced by the smallest positive double so the fit reports it instead of
/// throwing.
inline double positive(double e) { return e > 0.0 ? e : 1e-300; }

/// Ladder fit of Monte Carlo error estimates: weighted by the inverse
/// relative variance of each point, with a 2-sigma slope interval that is the
/// wider of the Monte Carlo propagation and the fit-residual estimate.
struct McFit {
  OrderFit fit;
  double stat_se = 0.0;
  double lo = 0.0, hi = 0.0;
};

inline McFit mc_order_fit(const std::vector<double>& ladder, const std::vector<double>& err,
                          const std::vector<double>& se) {
  std::vector<double> w(err.size());
  for (size_t i = 0; i < err.size(); ++i) {
    const double rel = se[i] / positive(err[i]);
    w[i] = 1.0 / std::max(rel * rel, 1e-30);
  }
  McFit m;
  m.fit = order_fit(ladder, err, w);
  double sw = 0, sx = 0;
  for (size_t i = 0; i < ladder.size(); ++i) {
    sw += w[i];
    sx += w[i] * std::log(ladder[i]);
  }
  double sxx = 0;
  for (size_t i = 0; i < ladder.size(); ++i) {
    const double d = std::log(ladder[i]) - sx / sw;
    sxx += w[i] * d * d;
  }
  m.stat_se = 1.0 / std::sqrt(sxx);
  const double half = 2.0 * std::max(m.stat_se, m.fit.slope_se);
  m.lo = m.fit.slope - half;
  m.hi = m.fit.slope + half;
  return m;
}

inline std::string fmt_fit(const McFit& f) {
  return "slope " + num(f.fit.slope) + " [" + num(f.lo) + ", " + num(f.hi) + "]";
}

/// Norm of an estimated mean vector and its standard error (delta method).
inline std::pair<double, double> norm_with_se(const Eigen::VectorXd& m, const Eigen::MatrixXd& cov, double n) {
  const double r = m.norm();
  if (!(r > 0.0)) return {0.0, std::sqrt(cov.trace() / n)};
  return {r, std::sqrt(std::max(0.0, m.dot(cov * m)) / n) / r};
}

}  // namespace gifilter::experiments
