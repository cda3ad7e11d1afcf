// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>

#include "gifilter/manifold/chart.hpp"

namespace gifilter {

/// dX = b(X) dt + sigma(X) dW in coordinates, with sigma = gamma sigma0 so
/// that alpha = sigma sigma^T = gamma^2 alpha0.
struct DiffusionModel {
  using VecFn = std::function<Vec(const Vec&)>;
  using MatFn = std::function<Mat(const Vec&)>;
  using HessFn = std::function<Bilinear(const Vec&)>;

  std::string name;
  int dim = 0;
  double gamma = 1.0;
  VecFn drift;           // b
  MatFn drift_jacobian;  // optional Db
  HessFn drift_hessian;  // optional D^2 b, one form per output coordinate
  MatFn sigma0;
  Chart::GuardFn domain_guard;  // optional

  bool contains(const Vec& x) const {
    return x.size() == dim && x.allFinite() && (!domain_guard || domain_guard(x));
  }

  Mat sigma(const Vec& x) const { return gamma * sigma0(x); }
  Mat alpha0(const Vec& x) const {
    const Mat s = sigma0(x);
    return s * s.transpose();
  }
  Mat alpha(const Vec& x) const { return gamma * gamma * alpha0(x); }

  /// Copy with a different noise scale.
  DiffusionModel with_gamma(double g) const {
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("DiffusionModel: gamma must be finite and >= 0");
    DiffusionModel m = *this;
    m.gamma = g;
    return m;
  }
};

/// sigma sigma^T at x.
inline Mat induced_cometric(const DiffusionModel& m, const Vec& x) {
  if (!m.contains(x)) throw DomainError("induced_cometric: point outside model domain");
  return m.alpha(x);
}

/// The geometry a full-rank diffusion induces: g = alpha^{-1} and its
/// Levi-Civita connection. The connector does not depend on gamma (a constant
/// rescaling of g leaves it unchanged), so the chart is built from alpha0.
struct InducedGeometry {
  DiffusionModel model;
  Chart chart;  // metric g = alpha^{-1}

  Mat cometric(const Vec& x) const { return model.alpha(x); }
  Mat metric(const Vec& x) const { return chart.g(x); }
};

namespace detail {

inline Chart::MetricFn inverse_alpha_metric(const DiffusionModel& m) {
  return [m](const Vec& x) -> Mat {
    const Mat a = m.alpha(x);
    if (!(spd_condition(a) <= 1e12)) throw UnsupportedError("induced metric: diffusion variance is rank deficient");
    return a.inverse();
  };
}

}  // namespace detail

/// Induced geometry with the connector obtained from the Koszul formula by
/// finite differences of g = alpha^{-1} (no analytic input needed).
inline InducedGeometry induced_geometry_fd(const DiffusionModel& m) {
  InducedGeometry g{m, {}};
  g.chart.name = m.name + "-induced";
  g.chart.dim = m.dim;
  g.chart.metric = detail::inverse_alpha_metric(m);
  const DiffusionModel m0 = m.with_gamma(1.0);
  g.chart.connector = levi_civita_from_metric(detail::inverse_alpha_metric(m0), m.dim);
  g.chart.domain_guard = m.domain_guard;
  return g;
}

/// Gamma(x) evaluated on basis pairs: Christoffel symbols of the induced
/// connection.
inline Bilinear canonical_connector(const InducedGeometry& geom, const Vec& x) {
  geom.chart.require(x, "canonical_connector");
  return geom.chart.christoffel(x);
}

/// zeta(x) = (1/2) Gamma(x)(sigma sigma^T).
inline Vec ito_correction(const InducedGeometry& geom, const Vec& x) {
  return 0.5 * geom.chart.christoffel(x).contract(geom.model.alpha(x));
}

/// xi = b + (1/2) Gamma(alpha): the drift of the intrinsic generator
/// xi + Delta / 2.
inline Vec drift_decomposition(const InducedGeometry& geom, const Vec& x) {
  if (!geom.model.contains(x)) throw DomainError("drift_decomposition: point outside model domain");
  return geom.model.drift(x) + ito_correction(geom, x);
}

/// D xi(x) and D^2 xi(x). Analytic drift derivatives are used when the model
/// has them; the O(gamma^2) connection term is always differentiated
/// numerically.
struct DriftDerivatives {
  Mat jacobian;
  Bilinear hessian;
};

inline DriftDerivatives drift_derivatives(const InducedGeometry& geom, const Vec& x) {
  const DiffusionModel& m = geom.model;
  const int p = m.dim;
  const bool analytic = m.drift_jacobian && m.drift_hessian;
  auto field = [&](const Vec& y) -> Vec { return analytic ? ito_correction(geom, y) : drift_decomposition(geom, y); };
  DriftDerivatives d{Mat::Zero(p, p), Bilinear(p, p)};
  if (analytic) {
    d.jacobian = m.drift_jacobian(x);
    d.hessian = m.drift_hessian(x);
  }
  // a zero correction (flat induced geometry) needs no differencing
  if (analytic && m.gamma == 0.0) return d;
  const double scale = std::max(1.0, x.norm());
  const double h1 = 1e-5 * scale;
  const double h2 = 1e-4 * scale;
  for (int j = 0; j < p; ++j) {
    const Vec e = basis(p, j);
    d.jacobian.col(j) += (field(x + h1 * e) - field(x - h1 * e)) / (2.0 * h1);
  }
  const Vec f0 = field(x);
  for (int i = 0; i < p; ++i) {
    const Vec ei = basis(p, i);
    for (int j = i; j < p; ++j) {
      const Vec ej = basis(p, j);
      Vec dd;
      if (i == j) {
        dd = (field(x + h2 * ei) - 2.0 * f0 + field(x - h2 * ei)) / (h2 * h2);
      } else {
        dd = (field(x + h2 * ei + h2 * ej) - field(x + h2 * ei - h2 * ej) - field(x - h2 * ei + h2 * ej) +
              field(x - h2 * ei - h2 * ej)) /
             (4.0 * h2 * h2);
      }
      for (int k = 0; k < p; ++k) {
        d.hessian.form(k)(i, j) += dd(k);
        if (i != j) d.hessian.form(k)(j, i) += dd(k);
      }
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// builtin models

/// b(x) = A x + c, constant sigma0. Flat induced geometry.
inline InducedGeometry flat_linear_model(const Mat& A, const Vec& c, const Mat& sigma0, double gamma) {
  const int p = static_cast<int>(A.rows());
  require_dim(A.cols(), p, "flat-linear A");
  require_dim(c.size(), p, "flat-linear c");
  require_dim(sigma0.rows(), p, "flat-linear sigma0");
  require_dim(sigma0.cols(), p, "flat-linear sigma0");
  if (!(spd_condition(Mat(sigma0 * sigma0.transpose())) <= 1e12)) {
    throw UnsupportedError("flat-linear: sigma0 must have full rank");
  }
  DiffusionModel m;
  m.name = "flat-linear";
  m.dim = p;
  m.gamma = gamma;
  m.drift = [A, c](const Vec& x) -> Vec { return A * x + c; };
  m.drift_jacobian = [A](const Vec&) -> Mat { return A; };
  m.drift_hessian = [p](const Vec&) { return Bilinear(p, p); };
  m.sigma0 = [sigma0](const Vec&) -> Mat { return sigma0; };
  Chart ch = flat_chart(p);
  ch.name = "flat-linear-induced";
  const Mat a0inv = (sigma0 * sigma0.transpose()).inverse();
  ch.metric = [a0inv, gamma](const Vec&) -> Mat { return a0inv / (gamma * gamma); };
  return {m, ch};
}

/// p = 1, sigma0 = s e^x, b = -k x. g = e^{-2x} / s^2 up to gamma, so the
/// connector is the constant Gamma = -1.
inline InducedGeometry scalar_exp_model(double k, double s, double gamma) {
  if (!(s > 0.0)) throw InvalidArgument("scalar-exp: scale must be positive");
  DiffusionModel m;
  m.name = "scalar-exp";
  m.dim = 1;
  m.gamma = gamma;
  m.drift = [k](const Vec& x) -> Vec { return -k * x; };
  m.drift_jacobian = [k](const Vec&) -> Mat { return Mat::Constant(1, 1, -k); };
  m.drift_hessian = [](const Vec&) { return Bilinear(1, 1); };
  m.sigma0 = [s](const Vec& x) -> Mat { return Mat::Constant(1, 1, s * std::exp(x(0))); };
  Chart ch;
  ch.name = "scalar-exp-induced";
  ch.dim = 1;
  ch.metric = [s, gamma](const Vec& x) -> Mat {
    return Mat::Constant(1, 1, std::exp(-2.0 * x(0)) / (s * s * gamma * gamma));
  };
  ch.connector = [](const Vec&, const Vec& u, const Vec& v) -> Vec { return -u.cwiseProduct(v); };
  ch.connector_derivative = [](const Vec&, const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Zero(1); };
  return {m, ch};
}

/// p = 2, sigma0 = diag(1, 1 + x1^2), polynomial drift
///   b1 = -k x1 + a x2^2,  b2 = -k x2 + a x1 x2 + c.
/// g = diag(1, w^-2) with w = 1 + x1^2 (up to gamma), whose Levi-Civita
/// connector has Gamma^1_22 = 2 x1 / w^3, Gamma^2_12 = -2 x1 / w.
inline InducedGeometry warped_2d_model(double k, double a, double c, double gamma) {
  DiffusionModel m;
  m.name = "warped-2d";
  m.dim = 2;
  m.gamma = gamma;
  m.drift = [k, a, c](const Vec& x) -> Vec {
    Vec b(2);
    b << -k * x(0) + a * x(1) * x(1), -k * x(1) + a * x(0) * x(1) + c;
    return b;
  };
  m.drift_jacobian = [k, a](const Vec& x) -> Mat {
    Mat j(2, 2);
    j << -k, 2.0 * a * x(1), a * x(1), -k + a * x(0);
    return j;
  };
  m.drift_hessian = [a](const Vec&) {
    Bilinear h(2, 2);
    h.form(0)(1, 1) = 2.0 * a;
    h.form(1)(0, 1) = a;
    h.form(1)(1, 0) = a;
    return h;
  };
  m.sigma0 = [](const Vec& x) -> Mat {
    Mat s = identity(2);
    s(1, 1) = 1.0 + x(0) * x(0);
    return s;
  };
  Chart ch;
  ch.name = "warped-2d-induced";
  ch.dim = 2;
  ch.metric = [gamma](const Vec& x) -> Mat {
    const double w = 1.0 + x(0) * x(0);
    Mat g = identity(2) / (gamma * gamma);
    g(1, 1) /= w * w;
    return g;
  };
  ch.connector = [](const Vec& x, const Vec& u, const Vec& v) -> Vec {
    const double w = 1.0 + x(0) * x(0);
    Vec r(2);
    r(0) = 2.0 * x(0) / (w * w * w) * u(1) * v(1);
    r(1) = -2.0 * x(0) / w * (u(0) * v(1) + u(1) * v(0));
    return r;
  };
  ch.connector_derivative = [](const Vec& x, const Vec& d, const Vec& u, const Vec& v) -> Vec {
    const double x1 = x(0), w = 1.0 + x1 * x1;
    Vec r(2);
    r(0) = d(0) * (2.0 - 10.0 * x1 * x1) / (w * w * w * w) * u(1) * v(1);
    r(1) = -d(0) * 2.0 * (1.0 - x1 * x1) / (w * w) * (u(0) * v(1) + u(1) * v(0));
    return r;
  };
  return {m, ch};
}

/// Builtin models by name. Parameters:
///   flat-linear: a11 a12 a21 a22 c1 c2 s11 s12 s21 s22 (2-d)
///   scalar-exp:  k s
///   warped-2d:   k a c
inline InducedGeometry make_model(const std::string& name, const Params& params, double gamma) {
  auto get = [&](const char* key, double def) { return detail::param(params, key, def); };
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("make_model: gamma must be positive");
  if (name == "flat-linear") {
    detail::check_params(name, params, {"a11", "a12", "a21", "a22", "c1", "c2", "s11", "s12", "s21", "s22"});
    Mat A(2, 2), S(2, 2);
    Vec c(2);
    A << get("a11", -0.5), get("a12", 1.0), get("a21", -1.0), get("a22", -0.5);
    c << get("c1", 0.0), get("c2", 0.0);
    S << get("s11", 1.0), get("s12", 0.0), get("s21", 0.3), get("s22", 0.8);
    return flat_linear_model(A, c, S, gamma);
  }
  if (name == "scalar-exp") {
    detail::check_params(name, params, {"k", "s"});
    return scalar_exp_model(get("k", 1.0), get("s", 1.0), gamma);
  }
  if (name == "warped-2d") {
    detail::check_params(name, params, {"k", "a", "c"});
    return warped_2d_model(get("k", 0.5), get("a", 0.5), get("c", 0.0), gamma);
  }
  throw InvalidArgument("unknown model '" + name + "'");
}

}  // namespace gifilter
