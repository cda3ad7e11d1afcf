// SPDX-License-Identifier: Apache-2.0
// Finite-difference reference for the derivatives of
// zeta(eps) = exp_{y(0)}^{-1} exp_{y(eps)} V(eps), built from the numerical
// exponential and logarithm. Used by tests and the check-jacobi command.
#pragma once

#include <array>
#include <tuple>

#include "gifilter/manifold/geodesic.hpp"
#include "gifilter/manifold/jacobi.hpp"

namespace gifilter::oracle {

/// y(eps) = c0 + c1 eps + c2 eps^2/2 + c3 eps^3/6 in chart coordinates. Used
/// for both the base path and the vector field V along it.
struct CubicPath {
  Vec c0, c1, c2, c3;
  Vec at(double e) const { return c0 + e * c1 + (e * e / 2.0) * c2 + (e * e * e / 6.0) * c3; }
  Vec d1(double e) const { return c1 + e * c2 + (e * e / 2.0) * c3; }
  Vec d2(double e) const { return c2 + e * c3; }
};

namespace detail {

template <class F>
Vec d1_5pt(const F& f, double h) {
  return (f(-2 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2 * h)) / (12.0 * h);
}

}  // namespace detail

/// Covariant jets of the path y and the field V along it, at eps = 0.
/// Second and lower covariant derivatives are analytic; the third uses a
/// 5-point difference of the analytic second derivative.
inline std::pair<CurveJet, VariationJet> covariant_jets(const Chart& chart, const CubicPath& y, const CubicPath& V,
                                                        double h = 1e-3) {
  auto nabla_yp = [&](double e) -> Vec {
    const Vec p = y.at(e), yp = y.d1(e);
    return y.d2(e) + chart.gamma(p, yp, yp);
  };
  auto nV1 = [&](double e) -> Vec { return V.d1(e) + chart.gamma(y.at(e), V.at(e), y.d1(e)); };
  auto nV2 = [&](double e) -> Vec {
    const Vec p = y.at(e), yp = y.d1(e), ypp = y.d2(e);
    const Vec v = V.at(e), vp = V.d1(e), vpp = V.d2(e);
    const Vec f1p = vpp + chart.dgamma(p, yp, v, yp) + chart.gamma(p, vp, yp) + chart.gamma(p, v, ypp);
    return f1p + chart.gamma(p, nV1(e), yp);
  };
  const Vec y0 = y.at(0.0), yp0 = y.d1(0.0);
  CurveJet c;
  c.y = y0;
  c.yp = yp0;
  c.nabla_yp = nabla_yp(0.0);
  c.nabla2_yp = detail::d1_5pt(nabla_yp, h) + chart.gamma(y0, c.nabla_yp, yp0);
  VariationJet v;
  v.V0 = V.at(0.0);
  v.nV1 = nV1(0.0);
  v.nV2 = nV2(0.0);
  v.nV3 = detail::d1_5pt(nV2, h) + chart.gamma(y0, v.nV2, yp0);
  return {c, v};
}

struct ZetaOptions {
  double eps0 = 1e-2;
  LogOptions log{128, 1e-14, 50};
};

/// zeta(eps) through the numerical exponential and logarithm.
inline Vec zeta_numeric(const Chart& chart, const CubicPath& y, const CubicPath& V, double e,
                        const LogOptions& opt) {
  const Vec y0 = y.at(0.0);
  const Vec z = exp_numeric(chart, y.at(e), V.at(e), opt.steps);
  return log_numeric(chart, y0, z, opt);
}

/// (zeta', zeta'', zeta''') at 0 by central differences: 5-point stencils for
/// the first two, 7-point for the third.
inline std::tuple<Vec, Vec, Vec> zeta_fd(const Chart& chart, const CubicPath& y, const CubicPath& V,
                                         const ZetaOptions& opt = {}) {
  const double h = opt.eps0;
  std::array<Vec, 7> f;
  for (int k = -3; k <= 3; ++k) f[static_cast<size_t>(k + 3)] = zeta_numeric(chart, y, V, k * h, opt.log);
  auto F = [&](int k) -> const Vec& { return f[static_cast<size_t>(k + 3)]; };
  const Vec d1 = (F(-2) - 8.0 * F(-1) + 8.0 * F(1) - F(2)) / (12.0 * h);
  const Vec d2 = (-F(-2) + 16.0 * F(-1) - 30.0 * F(0) + 16.0 * F(1) - F(2)) / (12.0 * h * h);
  const Vec d3 = (F(-3) - 8.0 * F(-2) + 13.0 * F(-1) - 13.0 * F(1) + 8.0 * F(2) - F(3)) / (8.0 * h * h * h);
  return {d1, d2, d3};
}

}  // namespace gifilter::oracle
