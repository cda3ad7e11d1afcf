// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>

#include "gifilter/manifold/chart.hpp"

namespace gifilter {

/// Coordinate form of the covariant derivative of V along a curve y:
/// V' + Gamma(y)(V (x) y').
inline Vec covariant_derivative(const Chart& chart, const Vec& y, const Vec& yp, const Vec& V, const Vec& Vp) {
  chart.require(y, "covariant_derivative");
  return Vp + chart.gamma(y, V, yp);
}

/// R(u, v) w from the connector and its derivative:
///   DG(v)(w,u) - DG(u)(w,v) + G(G(w,u),v) - G(G(w,v),u).
/// The terms are paired so that swapping u and v negates the result bit for bit.
inline Vec curvature(const Chart& chart, const Vec& x, const Vec& u, const Vec& v, const Vec& w) {
  chart.require(x, "curvature");
  const Vec a = chart.dgamma(x, v, w, u);
  const Vec b = chart.dgamma(x, u, w, v);
  const Vec c = chart.gamma(x, chart.gamma(x, w, u), v);
  const Vec d = chart.gamma(x, chart.gamma(x, w, v), u);
  return (a - b) + (c - d);
}

/// R_ijk = R(e_i, e_j) e_k, indexed as r[i][j][k].
struct CurvatureTable {
  int dim = 0;
  std::vector<Vec> r;
  const Vec& operator()(int i, int j, int k) const {
    return r[static_cast<size_t>((i * dim + j) * dim + k)];
  }
};

inline CurvatureTable curvature_table(const Chart& chart, const Vec& x) {
  CurvatureTable t;
  t.dim = chart.dim;
  const int p = chart.dim;
  t.r.assign(static_cast<size_t>(p * p * p), Vec::Zero(p));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      for (int k = 0; k < p; ++k) {
        t.r[static_cast<size_t>((i * p + j) * p + k)] =
            curvature(chart, x, basis(p, i), basis(p, j), basis(p, k));
      }
    }
  }
  return t;
}

inline double inner(const Chart& chart, const Vec& x, const Vec& u, const Vec& v) {
  return u.dot(chart.g(x) * v);
}

/// Sectional curvature <R(u,v)u, v> / (|u|^2 |v|^2 - <u,v>^2). With this
/// sign convention the unit sphere gives +1.
inline double sectional_curvature(const Chart& chart, const Vec& x, const Vec& u, const Vec& v) {
  const Mat g = chart.g(x);
  const double uu = u.dot(g * u);
  const double vv = v.dot(g * v);
  const double uv = u.dot(g * v);
  const double area = uu * vv - uv * uv;
  if (!(area > 0.0)) throw InvalidArgument("sectional_curvature: u and v are linearly dependent");
  return curvature(chart, x, u, v, u).dot(g * v) / area;
}

}  // namespace gifilter
