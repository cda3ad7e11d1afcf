// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "gifilter/barycentre.hpp"
#include "gifilter/diffusion/flow.hpp"
#include "gifilter/gaussian_cond.hpp"
#include "gifilter/manifold/geodesic.hpp"

namespace gifilter {

/// X_0 = exp_{base}(U_0) with E[U_0] = 0 and Var(U_0) = Sigma0.
struct FilterBelief {
  Vec base;
  Mat Sigma0;

  void validate(const Chart& chart) const {
    chart.require(base, "FilterBelief");
    require_dim(Sigma0.rows(), chart.dim, "FilterBelief Sigma0");
    require_dim(Sigma0.cols(), chart.dim, "FilterBelief Sigma0");
    if (!is_psd(Eigen::MatrixXd(Sigma0), 1e-12 * std::max(1.0, Sigma0.cwiseAbs().maxCoeff()))) {
      throw InvalidArgument("FilterBelief: Sigma0 not PSD");
    }
  }
};

struct PredictState {
  FlowBundle bundle;
  Vec ailp_state;      // in T_{x_delta} N
  Vec ailp_obs;        // in T_{psi(x_delta)} M
  Mat J;               // D psi(x_delta)
  Mat beta_delta;      // beta(psi(x_delta))
  Vec y_delta;         // psi(x_delta)
  Bilinear flow_sff;   // nabla d phi_delta(x0)
  Bilinear psi_sff;    // nabla d psi(x_delta)

  const Vec& x_delta() const { return bundle.x_delta(); }
  const Mat& Xi() const { return bundle.Xi_delta; }
};

inline PredictState predict(const InducedGeometry& geom, const ObservationMap& obs, const FilterBelief& belief,
                            double delta, int steps = 512) {
  belief.validate(geom.chart);
  if (!(delta > 0.0)) throw InvalidArgument("predict: delta must be positive");
  require_dim(obs.p, geom.model.dim, "predict: observation state dimension");
  PredictState s;
  s.bundle = integrate_flow(geom, belief.base, belief.Sigma0, delta, steps);
  const Vec& xd = s.bundle.x_delta();
  s.flow_sff = flow_second_fundamental_form(s.bundle, geom);
  s.ailp_state = 0.5 * (s.flow_sff.contract(s.bundle.Pi_delta()) - s.bundle.tau_delta() * s.bundle.transported_integral);
  s.psi_sff = second_fundamental_form(obs, geom.chart, xd);
  s.J = obs.J(xd);
  s.ailp_obs = 0.5 * s.psi_sff.contract(s.bundle.Xi_delta) + s.J * s.ailp_state;
  s.y_delta = obs.psi(xd);
  s.beta_delta = obs.beta(s.y_delta);
  return s;
}

/// Zhat = exp_{psi(x_delta)}^{-1}(y1) - (location parameter of psi(X_delta)).
inline Vec innovation(const PredictState& pred, const ObservationMap& obs, const Vec& y1, const LogOptions& opt = {}) {
  require_dim(y1.size(), obs.q, "innovation y1");
  return log_map(obs.chart_M, pred.y_delta, y1, opt) - pred.ailp_obs;
}

/// G = Xi J^T (J Xi J^T + beta)^{-1}.
inline Mat gain(const PredictState& pred) {
  const Mat S = pred.J * pred.Xi() * pred.J.transpose() + pred.beta_delta;
  return spd_solve(S, Mat(pred.J * pred.Xi()), 1e12, "gain").transpose();
}

/// The quadratic part of the update split as (lambda - G theta) on T_{x_delta} N,
/// with rho(z, z) = (lambda - G theta)(G z, G z).
inline Bilinear update_quadratic_form(const PredictState& pred, const Mat& G) {
  const int p = static_cast<int>(G.rows());
  // lambda(w, w) = (1/2) nabla d phi_delta(x0)(tau^{-1} w, tau^{-1} w)
  Bilinear lambda = pred.flow_sff.pullback(pred.bundle.tau_delta_inv());
  lambda *= 0.5;
  Bilinear r = lambda.compose_left(Mat(identity(p) - G * pred.J));
  Bilinear t = pred.psi_sff.compose_left(G);
  t *= 0.5;
  r -= t;
  return r;
}

struct UpdateResult {
  Vec mu_hat;
  Mat Sigma_hat;
  Mat gain;
  Vec rho_bar;
  Vec correction;  // tangent vector at x_delta whose exponential is new_base
  Vec new_base;
};

/// mu_hat = ailp_state + G zhat + rho(zhat, zhat) - rho(G J Xi),
/// Sigma_hat = (I - G J) Xi, new_base = curvature-corrected barycentre.
inline UpdateResult update(const PredictState& pred, const InducedGeometry& geom, const Vec& zhat) {
  require_dim(zhat.size(), pred.J.rows(), "update zhat");
  const int p = geom.model.dim;
  UpdateResult u;
  u.gain = gain(pred);
  const Mat& G = u.gain;
  const Bilinear q = update_quadratic_form(pred, G);
  const Vec gz = G * zhat;
  u.rho_bar = q.contract(Mat(G * pred.J * pred.Xi()));
  u.mu_hat = pred.ailp_state + gz + q(gz, gz) - u.rho_bar;
  u.Sigma_hat = symmetrized((identity(p) - G * pred.J) * pred.Xi());
  u.correction = u.mu_hat - barycentre_correction(geom.chart, pred.x_delta(), u.mu_hat, u.Sigma_hat);
  u.new_base = exp_taylor(geom.chart, pred.x_delta(), u.correction, 1.0);
  return u;
}

/// x0' = exp_{x_delta}(mu_hat - (1/3) R(mu_hat, e_j) e_k Sigma_hat^jk).
inline Vec recenter(const Chart& chart, const Vec& x_delta, const Vec& mu_hat, const Mat& Sigma_hat) {
  return exp_barycentre(chart, TangentMoments{x_delta, mu_hat, Sigma_hat});
}

/// Sigma_hat moved from T_{x_delta} N to T_{x0'} N by parallel transport along
/// the geodesic t -> exp_{x_delta}(t v).
inline Mat transport_covariance(const Chart& chart, const Vec& x_delta, const Vec& v, const Mat& Sigma_hat,
                                int steps = 256) {
  if (v.isZero(0.0)) return Sigma_hat;
  const Mat P = transport_along_geodesic(chart, x_delta, v, identity(chart.dim), steps).transported;
  return symmetrized(P * Sigma_hat * P.transpose());
}

/// One step of the recursion: predict, innovate, update, recenter.
struct FilterStep {
  PredictState pred;
  Vec zhat;
  UpdateResult upd;
  FilterBelief next;
};

inline FilterStep filter_step(const InducedGeometry& geom, const ObservationMap& obs, const FilterBelief& belief,
                              double delta, const Vec& y1, int steps = 512, const LogOptions& log_opt = {}) {
  FilterStep s;
  s.pred = predict(geom, obs, belief, delta, steps);
  s.zhat = innovation(s.pred, obs, y1, log_opt);
  s.upd = update(s.pred, geom, s.zhat);
  s.next.base = s.upd.new_base;
  s.next.Sigma0 = transport_covariance(geom.chart, s.pred.x_delta(), s.upd.correction, s.upd.Sigma_hat);
  return s;
}

// ---------------------------------------------------------------------------
// coordinate EKF baseline

struct EkfState {
  Vec x;
  Mat P;
};

inline Mat drift_jacobian_coords(const DiffusionModel& m, const Vec& x) {
  if (m.drift_jacobian) return m.drift_jacobian(x);
  const int p = m.dim;
  const double h = 1e-6 * std::max(1.0, x.norm());
  Mat J(p, p);
  for (int j = 0; j < p; ++j) {
    const Vec e = basis(p, j);
    J.col(j) = (m.drift(x + h * e) - m.drift(x - h * e)) / (2.0 * h);
  }
  return J;
}

/// x' = b(x), P' = Db P + P Db^T + alpha(x), by RK4: the coordinate drift b,
/// not xi, and no connection terms.
inline EkfState ekf_predict(const DiffusionModel& m, const Vec& x0, const Mat& P0, double delta, int steps = 512) {
  if (steps < 1) throw InvalidArgument("ekf_predict: steps must be >= 1");
  const double h = delta / steps;
  auto rhs = [&](const EkfState& s, long step) -> EkfState {
    if (!m.contains(s.x)) throw DomainError("ekf_predict: trajectory left the model domain", step);
    const Mat A = drift_jacobian_coords(m, s.x);
    return {m.drift(s.x), A * s.P + s.P * A.transpose() + m.alpha(s.x)};
  };
  auto axpy = [](const EkfState& s, double a, const EkfState& d) { return EkfState{s.x + a * d.x, s.P + a * d.P}; };
  EkfState s{x0, symmetrized(P0)};
  for (int k = 0; k < steps; ++k) {
    const EkfState k1 = rhs(s, k);
    const EkfState k2 = rhs(axpy(s, 0.5 * h, k1), k);
    const EkfState k3 = rhs(axpy(s, 0.5 * h, k2), k);
    const EkfState k4 = rhs(axpy(s, h, k3), k);
    s.x += (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.P += (h / 6.0) * (k1.P + 2.0 * k2.P + 2.0 * k3.P + k4.P);
  }
  s.P = symmetrized(s.P);
  return s;
}

/// Linear measurement update with the same J, beta and observation log map.
inline EkfState ekf_update(const EkfState& pred, const ObservationMap& obs, const Vec& y1,
                           const LogOptions& opt = {}) {
  const Vec y = obs.psi(pred.x);
  const Vec innov = log_map(obs.chart_M, y, y1, opt);
  const Mat J = obs.J(pred.x);
  const Mat S = J * pred.P * J.transpose() + obs.beta(y);
  const Mat K = spd_solve(S, Mat(J * pred.P), 1e12, "ekf_update").transpose();
  const int p = static_cast<int>(pred.x.size());
  return {pred.x + K * innov, symmetrized((identity(p) - K * J) * pred.P)};
}

}  // namespace gifilter
