// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "gifilter/core/errors.hpp"

namespace gifilter {

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;  // standard error of the slope (0 for an exact fit)
};

/// Least-squares fit of log(error) against log(gamma). When weights are
/// given (typically 1 / relative-variance of each error), the fit is
/// weighted.
inline OrderFit order_fit(const std::vector<double>& gammas, const std::vector<double>& errors,
                          const std::vector<double>& weights = {}) {
  const size_t n = gammas.size();
  if (n < 3) throw InvalidArgument("order_fit: need at least 3 ladder points");
  if (errors.size() != n) throw InvalidArgument("order_fit: gammas and errors differ in length");
  if (!weights.empty() && weights.size() != n) throw InvalidArgument("order_fit: weights differ in length");
  std::vector<double> x(n), y(n), w(n, 1.0);
  for (size_t i = 0; i < n; ++i) {
    if (!(gammas[i] > 0.0)) throw InvalidArgument("order_fit: gammas must be positive");
    if (!(errors[i] > 0.0)) throw InvalidArgument("order_fit: errors must be positive");
    x[i] = std::log(gammas[i]);
    y[i] = std::log(errors[i]);
    if (!weights.empty()) {
      if (!(weights[i] > 0.0)) throw InvalidArgument("order_fit: weights must be positive");
      w[i] = weights[i];
    }
  }
  double sw = 0, sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("order_fit: gammas must not all be equal");
  OrderFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    rss += w[i] * r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  f.slope_se = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace gifilter
