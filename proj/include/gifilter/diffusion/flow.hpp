// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "gifilter/diffusion/model.hpp"
#include "gifilter/diffusion/observation.hpp"

namespace gifilter {

/// The deterministic xi-flow from x0 over [0, delta] with its transports and
/// accumulated covariances, on a uniform grid t_k = k delta / steps.
struct FlowBundle {
  double delta = 0.0;
  std::vector<double> t;
  std::vector<Vec> x;            // x_t
  std::vector<Mat> tau0t;        // tau_0^t = D phi_t(x0)
  std::vector<Mat> taut0;        // tau_t^0, integrated alongside
  std::vector<Mat> tau_t_delta;  // tau_t^delta = tau_0^delta tau_t^0
  std::vector<Mat> Pi;           // Pi_t
  Mat Sigma0;
  Mat Xi_delta;
  Bilinear D2phi_delta;  // D^2 phi_delta(x0)
  /// int_0^delta tau_t^0 nabla d phi_t(x0)(dPi_t); the integral in the
  /// location parameter is tau_0^delta times this.
  Vec transported_integral;

  int steps() const { return static_cast<int>(t.size()) - 1; }
  const Vec& x_delta() const { return x.back(); }
  const Mat& tau_delta() const { return tau0t.back(); }
  const Mat& tau_delta_inv() const { return taut0.back(); }
  const Mat& Pi_delta() const { return Pi.back(); }
};

/// RK4 on (x, tau_0^t, tau_t^0, D^2 phi_t, Pi_t, integral) with x' = xi(x),
/// tau' = D xi tau, (tau^{-1})' = -tau^{-1} D xi, (D^2 phi)' = D xi D^2 phi +
/// D^2 xi(tau, tau), Pi' = tau^{-1} alpha tau^{-T}. The integral term is
/// integrated as one more component of the same system rather than by a
/// separate quadrature.
inline FlowBundle integrate_flow(const InducedGeometry& geom, const Vec& x0, const Mat& Sigma0, double delta,
                                 int steps = 512) {
  if (steps < 1) throw InvalidArgument("integrate_flow: steps must be >= 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("integrate_flow: delta must be >= 0");
  const int p = geom.model.dim;
  require_dim(x0.size(), p, "integrate_flow x0");
  require_dim(Sigma0.rows(), p, "integrate_flow Sigma0");
  require_dim(Sigma0.cols(), p, "integrate_flow Sigma0");
  if (!is_psd(Eigen::MatrixXd(Sigma0), 1e-12 * std::max(1.0, Sigma0.cwiseAbs().maxCoeff()))) {
    throw InvalidArgument("integrate_flow: Sigma0 not PSD");
  }
  if (!geom.model.contains(x0)) throw DomainError("integrate_flow: x0 outside model domain", 0);
  const Chart& chart = geom.chart;
  const Bilinear gamma0 = chart.christoffel(x0);

  struct State {
    Vec x;
    Mat T, Ti;
    Bilinear H;
    Mat Pi;
    Vec I;
  };
  auto rhs = [&](const State& s, long step) -> State {
    if (!geom.model.contains(s.x) || !chart.contains(s.x)) {
      throw DomainError("integrate_flow: trajectory left the model domain", step);
    }
    const DriftDerivatives dd = drift_derivatives(geom, s.x);
    const Mat a = geom.model.alpha(s.x);
    State d;
    d.x = drift_decomposition(geom, s.x);
    d.T = dd.jacobian * s.T;
    d.Ti = -s.Ti * dd.jacobian;
    d.H = s.H.compose_left(dd.jacobian) + dd.hessian.pullback(s.T);
    const Mat M = s.Ti * a * s.Ti.transpose();
    d.Pi = M;
    // nabla d phi_t(x0)(M) = D^2 phi_t(M) - tau Gamma(x0)(M) + Gamma(x_t)(tau M tau^T)
    const Vec ndphi = s.H.contract(M) - s.T * gamma0.contract(M) + chart.christoffel(s.x).contract(a);
    d.I = s.Ti * ndphi;
    return d;
  };
  auto axpy = [](const State& s, double h, const State& d) {
    State r{s.x + h * d.x, s.T + h * d.T, s.Ti + h * d.Ti, s.H, s.Pi + h * d.Pi, s.I + h * d.I};
    Bilinear dh = d.H;
    dh *= h;
    r.H += dh;
    return r;
  };

  FlowBundle b;
  b.delta = delta;
  b.Sigma0 = symmetrized(Sigma0);
  State s{x0, identity(p), identity(p), Bilinear(p, p), b.Sigma0, Vec::Zero(p)};
  const double h = delta / steps;
  auto record = [&](int k) {
    b.t.push_back(k * h);
    b.x.push_back(s.x);
    b.tau0t.push_back(s.T);
    b.taut0.push_back(s.Ti);
    b.Pi.push_back(symmetrized(s.Pi));
  };
  record(0);
  for (int k = 0; k < steps; ++k) {
    const State k1 = rhs(s, k);
    const State k2 = rhs(axpy(s, 0.5 * h, k1), k);
    const State k3 = rhs(axpy(s, 0.5 * h, k2), k);
    const State k4 = rhs(axpy(s, h, k3), k);
    State inc = axpy(axpy(axpy(k1, 2.0, k2), 2.0, k3), 1.0, k4);
    s = axpy(s, h / 6.0, inc);
    if (!(spd_condition(Mat(s.T.transpose() * s.T)) <= 1e24)) {
      throw SingularMatrixError("integrate_flow: flow derivative became singular (step " + std::to_string(k) + ")");
    }
    record(k + 1);
  }
  if (!geom.model.contains(s.x)) throw DomainError("integrate_flow: endpoint outside model domain", steps);
  const Mat& Td = s.T;
  for (const Mat& ti : b.taut0) b.tau_t_delta.push_back(Td * ti);
  b.Xi_delta = symmetrized(Td * s.Pi * Td.transpose());
  b.D2phi_delta = s.H;
  b.transported_integral = s.I;
  return b;
}

/// nabla d phi_delta(x0) as a bilinear map T_{x0} N x T_{x0} N -> T_{x_delta} N.
inline Bilinear flow_second_fundamental_form(const FlowBundle& b, const InducedGeometry& geom) {
  const Vec& x0 = b.x.front();
  const Mat& T = b.tau_delta();
  Bilinear r = b.D2phi_delta;
  r -= geom.chart.christoffel(x0).compose_left(T);
  r += geom.chart.christoffel(b.x_delta()).pullback(T);
  return r;
}

/// Location parameter of X_delta in T_{x_delta} N:
/// (1/2) { nabla d phi_delta(x0)(Pi_delta) - int tau_t^delta nabla d phi_t(x0)(dPi_t) }.
inline Vec ailp_state(const FlowBundle& b, const InducedGeometry& geom) {
  return 0.5 * (flow_second_fundamental_form(b, geom).contract(b.Pi_delta()) - b.tau_delta() * b.transported_integral);
}

/// Location parameter of psi(X_delta) in T_{psi(x_delta)} M:
/// (1/2) nabla d psi(x_delta)(Xi_delta) + psi_* (state location parameter).
inline Vec ailp_observation(const FlowBundle& b, const InducedGeometry& geom, const ObservationMap& obs) {
  const Vec& xd = b.x_delta();
  return 0.5 * second_fundamental_form(obs, geom.chart, xd).contract(b.Xi_delta) + obs.J(xd) * ailp_state(b, geom);
}

}  // namespace gifilter
