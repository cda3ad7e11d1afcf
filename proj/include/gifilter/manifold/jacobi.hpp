// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <tuple>

#include "gifilter/manifold/connection.hpp"
#include "gifilter/manifold/geodesic.hpp"

namespace gifilter {

/// A vector field W along a geodesic, described at t = 0 by W and its first
/// three covariant t-derivatives.
struct FieldJet3 {
  Vec W0;
  Vec Z0;  // DW/dt
  Vec n2;  // D^2W/dt^2 (also DZ/dt)
  Vec n3;  // D^3W/dt^3
};

/// V(eps) and its covariant eps-derivatives at eps = 0.
struct VariationJet {
  Vec V0;
  Vec nV1;
  Vec nV2;
  Vec nV3;
};

/// A C^3 path y(eps) described by y(0), y' and covariant derivatives of y'.
struct CurveJet {
  Vec y;
  Vec yp;
  Vec nabla_yp;
  Vec nabla2_yp;
};

/// Coordinates of W(1) for a field along the geodesic t -> exp_{b0}(t V),
/// accurate to third order in (V, W, Z, n2, n3).
inline Vec lemma22_endpoint(const Chart& chart, const Vec& b0, const Vec& V, const FieldJet3& jet) {
  chart.require(b0, "lemma22_endpoint");
  const Vec wz = jet.W0 + jet.Z0;
  Vec r = wz + 0.5 * jet.n2 + jet.n3 / 6.0;
  r += 0.5 * curvature(chart, b0, V, wz, V);
  r -= chart.gamma(b0, Vec(wz + 0.5 * jet.n2), V);
  r += chart.gamma(b0, chart.gamma(b0, V, wz), V);
  r -= 0.5 * chart.dgamma(b0, wz, V, V);
  return r;
}

/// Integrates the Jacobi equation D^2J/dt^2 + R(b', J) b' = 0 along the
/// geodesic from b0 with velocity V, for t in [0, 1]. Returns J(1) in
/// coordinates.
inline Vec jacobi_integrate(const Chart& chart, const Vec& b0, const Vec& V, const Vec& J0, const Vec& nJ0,
                            int steps = kDefaultSteps) {
  detail::check_steps(steps, "jacobi_integrate");
  chart.require(b0, "jacobi_integrate");
  const double h = 1.0 / steps;
  // state: b, b', J, P = DJ/dt (covariant)
  struct State {
    Vec b, bp, J, P;
  };
  auto rhs = [&](const State& s, long step) -> State {
    if (!chart.contains(s.b)) throw DomainError("jacobi_integrate: geodesic left chart '" + chart.name + "'", step);
    State d;
    d.b = s.bp;
    d.bp = -chart.gamma(s.b, s.bp, s.bp);
    d.J = s.P - chart.gamma(s.b, s.J, s.bp);
    d.P = -curvature(chart, s.b, s.bp, s.J, s.bp) - chart.gamma(s.b, s.P, s.bp);
    return d;
  };
  auto axpy = [](const State& s, double a, const State& d) {
    return State{s.b + a * d.b, s.bp + a * d.bp, s.J + a * d.J, s.P + a * d.P};
  };
  State s{b0, V, J0, nJ0};
  for (int k = 0; k < steps; ++k) {
    const State k1 = rhs(s, k);
    const State k2 = rhs(axpy(s, 0.5 * h, k1), k);
    const State k3 = rhs(axpy(s, 0.5 * h, k2), k);
    const State k4 = rhs(axpy(s, h, k3), k);
    s.b += (h / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    s.bp += (h / 6.0) * (k1.bp + 2.0 * k2.bp + 2.0 * k3.bp + k4.bp);
    s.J += (h / 6.0) * (k1.J + 2.0 * k2.J + 2.0 * k3.J + k4.J);
    s.P += (h / 6.0) * (k1.P + 2.0 * k2.P + 2.0 * k3.P + k4.P);
  }
  return s.J;
}

/// Jet of the Jacobi field with J(0) = J0, DJ/dt(0) = nJ0 along the geodesic
/// with velocity V, using the Jacobi equation for the higher derivatives.
inline FieldJet3 jacobi_jet(const Chart& chart, const Vec& b0, const Vec& V, const Vec& J0, const Vec& nJ0) {
  return {J0, nJ0, -curvature(chart, b0, V, J0, V), -curvature(chart, b0, V, nJ0, V)};
}

/// First three derivatives at eps = 0 of zeta(eps) = exp_{y(0)}^{-1} exp_{y(eps)} V(eps),
/// to third order in the jets.
inline std::tuple<Vec, Vec, Vec> zeta_derivatives(const Chart& chart, const CurveJet& c, const VariationJet& v) {
  chart.require(c.y, "zeta_derivatives");
  const Vec& x = c.y;
  auto R = [&](const Vec& a, const Vec& b, const Vec& w) { return curvature(chart, x, a, b, w); };
  const Vec& yp = c.yp;
  const Vec& nyp = c.nabla_yp;
  const Vec& n2yp = c.nabla2_yp;
  const Vec& V = v.V0;
  const Vec& nV = v.nV1;
  const Vec& n2V = v.nV2;
  const Vec& n3V = v.nV3;

  Vec z1 = yp + nV - R(V, yp, V) / 3.0;

  Vec z2 = nyp + n2V;
  z2 -= R(V, nyp, V) / 3.0;
  z2 -= (2.0 / 3.0) * R(nV, yp, V);
  z2 += R(yp, V, Vec(yp + 2.0 * nV)) / 3.0;

  Vec z3 = n2yp + n3V;
  z3 += R(yp, nV, Vec(yp + 2.0 * nV));
  z3 += R(yp, V, Vec(nyp + 2.0 * n2V));
  z3 += R(V, n2V, yp);
  z3 += R(V, nV, nyp);
  z3 += 2.0 * R(nyp, V, nV);
  z3 -= R(V, n2yp, V) / 3.0;

  return {z1, z2, z3};
}

}  // namespace gifilter
