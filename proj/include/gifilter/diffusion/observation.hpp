// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>

#include "gifilter/manifold/chart.hpp"

namespace gifilter {

/// psi: N -> M with its first two derivatives, and the observation noise
/// covariance beta(y) = gamma^2 beta0(y) in T_y M.
struct ObservationMap {
  std::string name;
  int p = 0;  // dim N
  int q = 0;  // dim M
  double gamma = 1.0;
  std::function<Vec(const Vec&)> psi;
  std::function<Mat(const Vec&)> jacobian;     // q x p
  std::function<Bilinear(const Vec&)> hessian;  // q forms, p x p
  Chart chart_M;
  std::function<Mat(const Vec&)> beta0;

  Mat J(const Vec& x) const { return jacobian(x); }
  Mat beta(const Vec& y) const { return gamma * gamma * beta0(y); }

  ObservationMap with_gamma(double g) const {
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("ObservationMap: gamma must be finite and >= 0");
    ObservationMap o = *this;
    o.gamma = g;
    return o;
  }
};

/// D^2 psi(v, w) - D psi Gamma_N(v, w) + Gamma_M(D psi v, D psi w).
inline Vec second_fundamental_form(const ObservationMap& obs, const Chart& chart_N, const Vec& x, const Vec& v,
                                   const Vec& w) {
  chart_N.require(x, "second_fundamental_form");
  const Vec y = obs.psi(x);
  obs.chart_M.require(y, "second_fundamental_form");
  const Mat J = obs.J(x);
  return obs.hessian(x)(v, w) - J * chart_N.gamma(x, v, w) + obs.chart_M.gamma(y, Vec(J * v), Vec(J * w));
}

/// The same as a bilinear map on T_x N.
inline Bilinear second_fundamental_form(const ObservationMap& obs, const Chart& chart_N, const Vec& x) {
  const int p = chart_N.dim;
  Bilinear b(obs.q, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      const Vec c = second_fundamental_form(obs, chart_N, x, basis(p, i), basis(p, j));
      for (int k = 0; k < obs.q; ++k) {
        b.form(k)(i, j) = c(k);
        b.form(k)(j, i) = c(k);
      }
    }
  }
  return b;
}

/// psi(x) = H x + (1/2) kappa(x, x) + c into flat R^q with constant beta0.
inline ObservationMap quadratic_observation(const Mat& H, const Bilinear& kappa, const Vec& c, const Mat& beta0,
                                            double gamma) {
  const int q = static_cast<int>(H.rows());
  const int p = static_cast<int>(H.cols());
  require_dim(kappa.out_dim(), q, "quadratic observation kappa");
  require_dim(kappa.in_dim(), p, "quadratic observation kappa");
  require_dim(c.size(), q, "quadratic observation c");
  require_dim(beta0.rows(), q, "quadratic observation beta0");
  require_dim(beta0.cols(), q, "quadratic observation beta0");
  if (!(spd_condition(beta0) <= 1e12)) throw InvalidArgument("observation: beta0 must be SPD");
  ObservationMap o;
  o.name = "quadratic";
  o.p = p;
  o.q = q;
  o.gamma = gamma;
  o.psi = [H, kappa, c](const Vec& x) -> Vec { return H * x + 0.5 * kappa(x, x) + c; };
  o.jacobian = [H, kappa, p, q](const Vec& x) -> Mat {
    Mat j = H;
    for (int k = 0; k < q; ++k) j.row(k) += (kappa.form(k) * x).transpose();
    (void)p;
    return j;
  };
  o.hessian = [kappa](const Vec&) { return kappa; };
  o.chart_M = flat_chart(q);
  o.beta0 = [beta0](const Vec&) -> Mat { return beta0; };
  return o;
}

inline ObservationMap linear_observation(const Mat& H, const Vec& c, const Mat& beta0, double gamma) {
  ObservationMap o = quadratic_observation(H, Bilinear(static_cast<int>(H.rows()), static_cast<int>(H.cols())), c,
                                           beta0, gamma);
  o.name = "linear";
  return o;
}

/// Builtin observation maps for a state of dimension p (p <= 2 parameters
/// are named h11.. / k1_11..):
///   identity:  psi = x, beta0 = b * I
///   linear:    psi = H x + c
///   quadratic: psi = H x + (1/2) kappa(x, x) + c, q = 1, kappa = [[k11, k12], [k12, k22]]
inline ObservationMap make_observation(const std::string& name, const Params& params, int p, double gamma) {
  auto get = [&](const char* key, double def) { return detail::param(params, key, def); };
  if (p < 1 || p > 2) throw InvalidArgument("observation: builtin maps support state dimension 1 or 2");
  if (name == "identity") {
    detail::check_params(name, params, {"b"});
    ObservationMap o = linear_observation(identity(p), Vec::Zero(p), get("b", 1.0) * identity(p), gamma);
    o.name = "identity";
    return o;
  }
  if (name == "linear") {
    detail::check_params(name, params, {"h1", "h2", "c", "b"});
    Mat H(1, p);
    H(0, 0) = get("h1", 1.0);
    if (p == 2) H(0, 1) = get("h2", 0.5);
    return linear_observation(H, Vec::Constant(1, get("c", 0.0)), Mat::Constant(1, 1, get("b", 1.0)), gamma);
  }
  if (name == "quadratic") {
    detail::check_params(name, params, {"h1", "h2", "k11", "k12", "k22", "c", "b"});
    Mat H(1, p);
    H(0, 0) = get("h1", 1.0);
    if (p == 2) H(0, 1) = get("h2", 0.5);
    Bilinear kappa(1, p);
    kappa.form(0)(0, 0) = get("k11", 1.0);
    if (p == 2) {
      kappa.form(0)(0, 1) = kappa.form(0)(1, 0) = get("k12", 0.5);
      kappa.form(0)(1, 1) = get("k22", -0.5);
    }
    return quadratic_observation(H, kappa, Vec::Constant(1, get("c", 0.0)), Mat::Constant(1, 1, get("b", 1.0)),
                                 gamma);
  }
  throw InvalidArgument("unknown observation '" + name + "'");
}

}  // namespace gifilter
