// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gifilter/manifold/chart.hpp"

namespace gifilter {

/// Third-order expansion of exp_y(t v) in coordinates:
///   y + t v - t^2/2 G(v,v) + t^3/6 [2 G(G(v,v),v) - DG(v)(v,v)].
inline Vec exp_taylor(const Chart& chart, const Vec& y, const Vec& v, double t = 1.0) {
  chart.require(y, "exp_taylor");
  require_dim(v.size(), chart.dim, "exp_taylor");
  const Vec gvv = chart.gamma(y, v, v);
  const Vec cubic = 2.0 * chart.gamma(y, gvv, v) - chart.dgamma(y, v, v, v);
  const Vec z = y + t * v - (0.5 * t * t) * gvv + (t * t * t / 6.0) * cubic;
  chart.require(z, "exp_taylor result");
  return z;
}

/// Third-order expansion of exp_y^{-1}(z); w = z - y:
///   w + 1/2 G(w,w) + 1/6 [DG(w)(w,w) + G(G(w,w),w)].
inline Vec log_taylor(const Chart& chart, const Vec& y, const Vec& z) {
  chart.require(y, "log_taylor");
  chart.require(z, "log_taylor");
  const Vec w = z - y;
  const Vec gww = chart.gamma(y, w, w);
  return w + 0.5 * gww + (chart.dgamma(y, w, w, w) + chart.gamma(y, gww, w)) / 6.0;
}

}  // namespace gifilter
