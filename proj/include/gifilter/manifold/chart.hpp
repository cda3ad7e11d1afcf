// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "gifilter/core/errors.hpp"
#include "gifilter/core/types.hpp"

namespace gifilter {

using Params = std::map<std::string, double>;

/// A single global coordinate chart of a manifold with a torsion-free
/// connection. Gamma(x)(u (x) v) is stored as a callable; the derivative of
/// the connector may be analytic or left empty, in which case central finite
/// differences are used.
struct Chart {
  using MetricFn = std::function<Mat(const Vec&)>;
  using ConnectorFn = std::function<Vec(const Vec& x, const Vec& u, const Vec& v)>;
  using ConnectorDerivFn = std::function<Vec(const Vec& x, const Vec& d, const Vec& u, const Vec& v)>;
  using GuardFn = std::function<bool(const Vec&)>;

  std::string name;
  int dim = 0;
  MetricFn metric;                    // optional
  ConnectorFn connector;
  ConnectorDerivFn connector_derivative;  // optional
  GuardFn domain_guard;               // optional, empty means "everywhere"

  bool has_metric() const { return static_cast<bool>(metric); }
  bool has_analytic_derivative() const { return static_cast<bool>(connector_derivative); }

  bool contains(const Vec& x) const {
    if (x.size() != dim) return false;
    if (!x.allFinite()) return false;
    return !domain_guard || domain_guard(x);
  }

  void require(const Vec& x, const char* what, long step = -1) const {
    if (!contains(x)) throw DomainError(std::string(what) + ": point outside chart '" + name + "'", step);
  }

  Mat g(const Vec& x) const {
    if (!metric) throw UnsupportedError("chart '" + name + "' has no metric");
    return metric(x);
  }

  Vec gamma(const Vec& x, const Vec& u, const Vec& v) const { return connector(x, u, v); }

  /// Central-difference step used when the connector derivative is synthesized.
  static double fd_step(const Vec& x) { return 1e-5 * std::max(1.0, x.norm()); }

  /// DGamma(x)(d)(u (x) v) by central differences, linear in d by construction
  /// (the difference is taken along the unit direction and rescaled).
  Vec fd_dgamma(const Vec& x, const Vec& d, const Vec& u, const Vec& v) const {
    const double nd = d.norm();
    if (nd == 0.0) return Vec::Zero(dim);
    const double h = fd_step(x);
    const Vec e = d / nd;
    const Vec xp = x + h * e;
    const Vec xm = x - h * e;
    return (connector(xp, u, v) - connector(xm, u, v)) * (nd / (2.0 * h));
  }

  Vec dgamma(const Vec& x, const Vec& d, const Vec& u, const Vec& v) const {
    if (connector_derivative) return connector_derivative(x, d, u, v);
    return fd_dgamma(x, d, u, v);
  }

  /// Gamma(x) as an array of Christoffel matrices, Gamma^k_ij.
  Bilinear christoffel(const Vec& x) const {
    Bilinear b(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        const Vec c = connector(x, basis(dim, i), basis(dim, j));
        for (int k = 0; k < dim; ++k) {
          b.form(k)(i, j) = c(k);
          b.form(k)(j, i) = c(k);
        }
      }
    }
    return b;
  }

  /// DGamma(x)(d) as a bilinear map.
  Bilinear christoffel_derivative(const Vec& x, const Vec& d) const {
    Bilinear b(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        const Vec c = dgamma(x, d, basis(dim, i), basis(dim, j));
        for (int k = 0; k < dim; ++k) {
          b.form(k)(i, j) = c(k);
          b.form(k)(j, i) = c(k);
        }
      }
    }
    return b;
  }

  /// Chart with the analytic derivative removed, so DGamma is synthesized.
  Chart with_fd_derivative() const {
    Chart c = *this;
    c.connector_derivative = nullptr;
    c.name += "+fd";
    return c;
  }
};

/// Levi-Civita connector of a metric given as a callable; metric derivatives
/// are taken by central differences. Slow, meant for cross-checks.
inline Chart::ConnectorFn levi_civita_from_metric(Chart::MetricFn metric, int dim) {
  return [metric = std::move(metric), dim](const Vec& x, const Vec& u, const Vec& v) -> Vec {
    const double h = 1e-5 * std::max(1.0, x.norm());
    // dg[k] = partial_k g
    std::vector<Mat> dg;
    dg.reserve(static_cast<size_t>(dim));
    for (int k = 0; k < dim; ++k) {
      const Vec e = basis(dim, k);
      dg.push_back((metric(x + h * e) - metric(x - h * e)) / (2.0 * h));
    }
    // rhs_l = sum_ij u^i v^j (d_i g_jl + d_j g_il - d_l g_ij) / 2
    Vec rhs = Vec::Zero(dim);
    for (int l = 0; l < dim; ++l) {
      double s = 0.0;
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          s += u(i) * v(j) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        }
      }
      rhs(l) = 0.5 * s;
    }
    return spd_solve(metric(x), rhs, 1e14, "levi_civita_from_metric");
  };
}

namespace detail {

// Conformal metric g = exp(2 f) I. The Levi-Civita connector is
// Gamma(u,v) = (grad f . u) v + (grad f . v) u - (u . v) grad f.
inline Vec conformal_gamma(const Vec& df, const Vec& u, const Vec& v) {
  return df.dot(u) * v + df.dot(v) * u - u.dot(v) * df;
}

template <class F, class Grad, class Hess>
Chart conformal_chart(std::string name, int dim, F f, Grad grad, Hess hess, Chart::GuardFn guard) {
  Chart ch;
  ch.name = std::move(name);
  ch.dim = dim;
  ch.metric = [f, dim](const Vec& x) -> Mat { return std::exp(2.0 * f(x)) * identity(dim); };
  ch.connector = [grad](const Vec& x, const Vec& u, const Vec& v) -> Vec { return conformal_gamma(grad(x), u, v); };
  ch.connector_derivative = [hess](const Vec& x, const Vec& d, const Vec& u, const Vec& v) -> Vec {
    return conformal_gamma(hess(x, d), u, v);
  };
  ch.domain_guard = std::move(guard);
  return ch;
}

inline double param(const Params& p, const std::string& key, double def) {
  auto it = p.find(key);
  return it == p.end() ? def : it->second;
}

inline void check_params(const std::string& chart, const Params& p, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : p) {
    if (!allowed.count(k)) throw InvalidArgument("chart '" + chart + "': unknown parameter '" + k + "'");
    if (!std::isfinite(v)) throw InvalidArgument("chart '" + chart + "': parameter '" + k + "' not finite");
  }
}

}  // namespace detail

inline Chart flat_chart(int dim) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("flat chart: dimension out of range");
  Chart c;
  c.name = "flat";
  c.dim = dim;
  c.metric = [dim](const Vec&) -> Mat { return identity(dim); };
  c.connector = [dim](const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Zero(dim); };
  c.connector_derivative = [dim](const Vec&, const Vec&, const Vec&, const Vec&) -> Vec {
    return Vec::Zero(dim);
  };
  return c;
}

/// Sphere of the given radius in stereographic coordinates projected from the
/// north pole; x = 0 is the south pole. g = 4 r^2 / (1 + |x|^2)^2 I. The
/// guard excludes a neighbourhood of the projection pole (|x| >= max_norm).
inline Chart sphere_stereo_chart(double radius = 1.0, double max_norm = 1e3) {
  if (!(radius > 0.0)) throw InvalidArgument("sphere-stereo: radius must be positive");
  auto f = [radius](const Vec& x) { return std::log(2.0 * radius) - std::log1p(x.squaredNorm()); };
  auto grad = [](const Vec& x) -> Vec { return (-2.0 / (1.0 + x.squaredNorm())) * x; };
  // Hessian of f applied to d: -2 d / s + 4 x (x . d) / s^2
  auto hess = [](const Vec& x, const Vec& d) -> Vec {
    const double s = 1.0 + x.squaredNorm();
    return (-2.0 / s) * d + (4.0 * x.dot(d) / (s * s)) * x;
  };
  return detail::conformal_chart("sphere-stereo", 2, f, grad, hess,
                                 [max_norm](const Vec& x) { return x.norm() < max_norm; });
}

/// Upper half-plane model of H^2, g = I / x2^2.
inline Chart poincare_half_plane_chart() {
  auto f = [](const Vec& x) { return -std::log(x(1)); };
  auto grad = [](const Vec& x) -> Vec {
    Vec g(2);
    g << 0.0, -1.0 / x(1);
    return g;
  };
  auto hess = [](const Vec& x, const Vec& d) -> Vec {
    Vec h(2);
    h << 0.0, d(1) / (x(1) * x(1));
    return h;
  };
  return detail::conformal_chart("poincare-half-plane", 2, f, grad, hess, [](const Vec& x) { return x(1) > 0.0; });
}

/// R^2 with g = diag(1, 1 + a x1^2): non-constant curvature
/// K = -a / (1 + a x1^2)^2.
inline Chart warped_r2_chart(double a = 1.0) {
  if (!(a >= 0.0)) throw InvalidArgument("warped-r2: warp must be non-negative");
  Chart c;
  c.name = "warped-r2";
  c.dim = 2;
  c.metric = [a](const Vec& x) -> Mat {
    Mat g = identity(2);
    g(1, 1) = 1.0 + a * x(0) * x(0);
    return g;
  };
  // Gamma^1_22 = -a x1, Gamma^2_12 = Gamma^2_21 = a x1 / (1 + a x1^2)
  c.connector = [a](const Vec& x, const Vec& u, const Vec& v) -> Vec {
    const double w = 1.0 + a * x(0) * x(0);
    Vec r(2);
    r(0) = -a * x(0) * u(1) * v(1);
    r(1) = a * x(0) / w * (u(0) * v(1) + u(1) * v(0));
    return r;
  };
  c.connector_derivative = [a](const Vec& x, const Vec& d, const Vec& u, const Vec& v) -> Vec {
    const double w = 1.0 + a * x(0) * x(0);
    Vec r(2);
    r(0) = -a * d(0) * u(1) * v(1);
    r(1) = a * d(0) * (1.0 - a * x(0) * x(0)) / (w * w) * (u(0) * v(1) + u(1) * v(0));
    return r;
  };
  return c;
}

/// Builtin charts by name, shared with the CLI configuration schema.
inline Chart make_chart(const std::string& name, const Params& params = {}) {
  if (name == "flat") {
    detail::check_params(name, params, {"dim"});
    const double d = detail::param(params, "dim", 2);
    if (d != std::floor(d)) throw InvalidArgument("flat: dim must be an integer");
    return flat_chart(static_cast<int>(d));
  }
  if (name == "sphere-stereo") {
    detail::check_params(name, params, {"radius", "max_norm"});
    return sphere_stereo_chart(detail::param(params, "radius", 1.0), detail::param(params, "max_norm", 1e3));
  }
  if (name == "poincare-half-plane") {
    detail::check_params(name, params, {});
    return poincare_half_plane_chart();
  }
  if (name == "warped-r2") {
    detail::check_params(name, params, {"warp"});
    return warped_r2_chart(detail::param(params, "warp", 1.0));
  }
  throw InvalidArgument("unknown chart '" + name + "'");
}

/// The same manifold in coordinates y = T x + c. Used to test that
/// constructions are intrinsic.
struct LinearReparam {
  Mat T;
  Vec c;

  Vec to_new(const Vec& x) const { return T * x + c; }
  Vec to_old(const Vec& y) const { return T.lu().solve(y - c); }
  Vec push(const Vec& v) const { return T * v; }
  Vec pull(const Vec& w) const { return T.lu().solve(w); }
  Mat push_form(const Mat& s) const { return T * s * T.transpose(); }
};

inline Chart reparametrize(const Chart& base, const LinearReparam& r) {
  require_dim(r.T.rows(), base.dim, "reparametrize");
  require_dim(r.T.cols(), base.dim, "reparametrize");
  if (std::abs(r.T.determinant()) < 1e-12) throw InvalidArgument("reparametrize: singular transformation");
  Chart c;
  c.name = base.name + "+linear";
  c.dim = base.dim;
  if (base.metric) {
    c.metric = [base, r](const Vec& y) -> Mat {
      const Mat ti = r.T.inverse();
      return ti.transpose() * base.metric(r.to_old(y)) * ti;
    };
  }
  c.connector = [base, r](const Vec& y, const Vec& u, const Vec& v) -> Vec {
    return r.push(base.connector(r.to_old(y), r.pull(u), r.pull(v)));
  };
  c.connector_derivative = [base, r](const Vec& y, const Vec& d, const Vec& u, const Vec& v) -> Vec {
    return r.push(base.dgamma(r.to_old(y), r.pull(d), r.pull(u), r.pull(v)));
  };
  if (base.domain_guard) {
    c.domain_guard = [base, r](const Vec& y) { return base.domain_guard(r.to_old(y)); };
  }
  return c;
}

}  // namespace gifilter
