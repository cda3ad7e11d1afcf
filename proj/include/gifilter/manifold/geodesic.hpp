// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "gifilter/manifold/chart.hpp"
#include "gifilter/manifold/expansions.hpp"

namespace gifilter {

inline constexpr int kDefaultSteps = 1024;

namespace detail {

inline void check_steps(int steps, const char* what) {
  if (steps < 1) throw InvalidArgument(std::string(what) + ": steps must be >= 1");
}

}  // namespace detail

/// Fixed-step RK4 for b'' + Gamma(b)(b', b') = 0. Returns (b(t), b'(t)).
inline std::pair<Vec, Vec> geodesic_integrate(const Chart& chart, const Vec& y, const Vec& v, double t = 1.0,
                                              int steps = kDefaultSteps) {
  detail::check_steps(steps, "geodesic_integrate");
  chart.require(y, "geodesic_integrate");
  require_dim(v.size(), chart.dim, "geodesic_integrate");
  const double h = t / steps;
  Vec b = y;
  Vec bp = v;
  auto acc = [&](const Vec& x, const Vec& xp, long step) -> Vec {
    if (!chart.contains(x)) throw DomainError("geodesic_integrate: trajectory left chart '" + chart.name + "'", step);
    return -chart.gamma(x, xp, xp);
  };
  for (int s = 0; s < steps; ++s) {
    const Vec k1x = bp;
    const Vec k1v = acc(b, bp, s);
    const Vec x2 = b + 0.5 * h * k1x, v2 = bp + 0.5 * h * k1v;
    const Vec k2v = acc(x2, v2, s);
    const Vec x3 = b + 0.5 * h * v2, v3 = bp + 0.5 * h * k2v;
    const Vec k3v = acc(x3, v3, s);
    const Vec x4 = b + h * v3, v4 = bp + h * k3v;
    const Vec k4v = acc(x4, v4, s);
    b += (h / 6.0) * (k1x + 2.0 * v2 + 2.0 * v3 + v4);
    bp += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  if (!chart.contains(b)) throw DomainError("geodesic_integrate: endpoint outside chart '" + chart.name + "'", steps);
  return {b, bp};
}

/// Geodesic endpoint at t = 1 together with its derivative with respect to
/// the initial velocity (the variational equation integrated alongside).
struct GeodesicJacobian {
  Vec end;
  Vec velocity;
  Mat d_end;  // d b(1) / d v
};

inline GeodesicJacobian geodesic_with_jacobian(const Chart& chart, const Vec& y, const Vec& v,
                                               int steps = kDefaultSteps) {
  detail::check_steps(steps, "geodesic_with_jacobian");
  chart.require(y, "geodesic_with_jacobian");
  const int p = chart.dim;
  const double h = 1.0 / steps;
  struct State {
    Vec b, bp;
    Mat J, K;
  };
  auto rhs = [&](const State& s, long step) -> State {
    if (!chart.contains(s.b)) throw DomainError("geodesic_with_jacobian: trajectory left chart '" + chart.name + "'", step);
    State d;
    d.b = s.bp;
    d.bp = -chart.gamma(s.b, s.bp, s.bp);
    d.J = s.K;
    d.K.resize(p, p);
    for (int j = 0; j < p; ++j) {
      const Vec jj = s.J.col(j);
      const Vec kk = s.K.col(j);
      d.K.col(j) = -chart.dgamma(s.b, jj, s.bp, s.bp) - 2.0 * chart.gamma(s.b, s.bp, kk);
    }
    return d;
  };
  auto axpy = [](const State& s, double a, const State& d) {
    return State{s.b + a * d.b, s.bp + a * d.bp, s.J + a * d.J, s.K + a * d.K};
  };
  State s{y, v, Mat::Zero(p, p), identity(p)};
  for (int k = 0; k < steps; ++k) {
    const State k1 = rhs(s, k);
    const State k2 = rhs(axpy(s, 0.5 * h, k1), k);
    const State k3 = rhs(axpy(s, 0.5 * h, k2), k);
    const State k4 = rhs(axpy(s, h, k3), k);
    s.b += (h / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    s.bp += (h / 6.0) * (k1.bp + 2.0 * k2.bp + 2.0 * k3.bp + k4.bp);
    s.J += (h / 6.0) * (k1.J + 2.0 * k2.J + 2.0 * k3.J + k4.J);
    s.K += (h / 6.0) * (k1.K + 2.0 * k2.K + 2.0 * k3.K + k4.K);
  }
  if (!chart.contains(s.b)) throw DomainError("geodesic_with_jacobian: endpoint outside chart '" + chart.name + "'", steps);
  return {s.b, s.bp, s.J};
}

inline Vec exp_numeric(const Chart& chart, const Vec& y, const Vec& v, int steps = kDefaultSteps) {
  return geodesic_integrate(chart, y, v, 1.0, steps).first;
}

struct LogOptions {
  int steps = kDefaultSteps;
  double tol = 1e-12;
  int max_iter = 50;
};

namespace detail {

/// Damped Newton with a fresh Jacobian every step, updating v in place.
inline bool newton_log(const Chart& chart, const Vec& y, const Vec& z, Vec& v, double tol, int max_iter, int steps) {
  for (int it = 0; it < max_iter; ++it) {
    GeodesicJacobian gj;
    try {
      gj = geodesic_with_jacobian(chart, y, v, steps);
    } catch (const DomainError&) {
      return false;
    }
    const Vec r = gj.end - z;
    const double rn = r.norm();
    const Eigen::PartialPivLU<Mat> lu(gj.d_end);
    const Vec dv = lu.solve(r);
    if (!dv.allFinite()) return false;
    if (rn <= tol) {
      v -= dv;
      return true;
    }
    double lam = 1.0;
    for (;;) {
      const Vec vt = v - lam * dv;
      try {
        if ((geodesic_integrate(chart, y, vt, 1.0, steps).first - z).norm() < rn) {
          v = vt;
          break;
        }
      } catch (const DomainError&) {
      }
      lam *= 0.5;
      if (lam < 1e-8) return false;
    }
  }
  return false;
}

/// Continuation along the chord from y to z, warm-starting each stage by
/// linear extrapolation of the previous two solutions. For targets the
/// direct iteration cannot reach from its seed.
inline bool log_continuation(const Chart& chart, const Vec& y, const Vec& z, const LogOptions& opt, Vec& out) {
  constexpr int kStages = 16;
  const double scale = std::max(1.0, z.norm());
  Vec prev = Vec::Zero(chart.dim), v = Vec::Zero(chart.dim);
  for (int k = 1; k <= kStages; ++k) {
    const Vec zt = y + (static_cast<double>(k) / kStages) * (z - y);
    if (!chart.contains(zt)) return false;
    const Vec guess = k == 1 ? Vec((z - y) / kStages) : Vec(2.0 * v - prev);
    prev = v;
    v = guess;
    const double tol = (k < kStages ? 1e-8 : opt.tol) * scale;
    if (!newton_log(chart, y, zt, v, tol, opt.max_iter, opt.steps)) return false;
  }
  out = v;
  return true;
}

}  // namespace detail

/// exp_y^{-1}(z) by Newton's method on v -> exp_y(v), seeded with the
/// third-order expansion. The Jacobian of exp_y is refreshed only when
/// convergence slows, and steps are halved whenever the residual does not
/// decrease (or the trial geodesic leaves the chart). A poor seed falls back
/// to damped Newton from v = 0, where the Jacobian is the identity, and a
/// failed iteration to continuation along the chord.
/// Throws ConvergenceError when both fail.
inline Vec log_numeric(const Chart& chart, const Vec& y, const Vec& z, const LogOptions& opt = {}) {
  chart.require(y, "log_numeric");
  chart.require(z, "log_numeric");
  const double scale = std::max(1.0, z.norm());
  const Vec chord = z - y;

  Vec v;
  try {
    v = log_taylor(chart, y, z);
  } catch (const DomainError&) {
    v = chord;
  }
  if (!v.allFinite()) v = chord;

  // state of the last accepted iterate
  double last = std::numeric_limits<double>::infinity();
  double lam = 1.0;
  Vec vbase, dvbase;
  Eigen::PartialPivLU<Mat> lu;
  bool have_jac = false;
  bool seeded = false;
  bool base_fresh = true;  // dvbase came from a Jacobian evaluated at vbase
  bool rebase = false;     // re-evaluating vbase to refresh a stale Jacobian

  for (int it = 0; it < opt.max_iter; ++it) {
    double rn = std::numeric_limits<double>::infinity();
    Vec r;
    bool fresh = false;
    try {
      if (!have_jac) {
        const GeodesicJacobian gj = geodesic_with_jacobian(chart, y, v, opt.steps);
        if (std::abs(gj.d_end.determinant()) > 0.0) {
          lu.compute(gj.d_end);
          have_jac = fresh = true;
          r = gj.end - z;
          rn = r.norm();
        }
      } else {
        r = geodesic_integrate(chart, y, v, 1.0, opt.steps).first - z;
        rn = r.norm();
      }
    } catch (const DomainError&) {
    }
    // the last correction is free (Jacobian already at hand)
    if (have_jac && rn <= opt.tol * scale) return v - lu.solve(r);
    if (!seeded) {
      seeded = true;
      if (!(rn < chord.norm())) {
        // seed worse than v = 0: take the (damped) Newton step from the origin
        vbase = Vec::Zero(chart.dim);
        dvbase = -chord;
        last = chord.norm();
        lam = 1.0;
        v = chord;
        have_jac = false;
        continue;
      }
    } else if (rebase) {
      rebase = false;
    } else if (!(rn < last)) {
      if (!base_fresh) {
        // a stale Jacobian need not give a descent direction
        v = vbase;
        have_jac = false;
        rebase = true;
        continue;
      }
      lam *= 0.5;
      if (lam < 1e-10) break;
      v = vbase - lam * dvbase;
      have_jac = false;
      continue;
    }
    if (!have_jac) break;
    const Vec dv = lu.solve(r);
    // slow contraction: refresh the Jacobian at the next iterate
    if (!fresh && rn > 1e-2 * last) have_jac = false;
    vbase = v;
    dvbase = dv;
    base_fresh = fresh;
    last = rn;
    lam = 1.0;
    v = v - dv;
    if (!v.allFinite()) break;
  }
  if (Vec w; detail::log_continuation(chart, y, z, opt, w)) return w;
  throw ConvergenceError("log_numeric: Newton iteration did not converge (distance " +
                         std::to_string(chord.norm()) + ")");
}

/// Exponential and logarithm that skip the integration on flat charts.
inline bool is_flat(const Chart& chart) { return chart.name == "flat"; }

inline Vec exp_map(const Chart& chart, const Vec& y, const Vec& v, int steps = kDefaultSteps) {
  if (is_flat(chart)) {
    chart.require(y, "exp_map");
    return y + v;
  }
  return exp_numeric(chart, y, v, steps);
}

inline Vec log_map(const Chart& chart, const Vec& y, const Vec& z, const LogOptions& opt = {}) {
  if (is_flat(chart)) {
    chart.require(y, "log_map");
    chart.require(z, "log_map");
    return z - y;
  }
  return log_numeric(chart, y, z, opt);
}

/// A curve on [0, 1] returning (position, velocity).
using Curve = std::function<std::pair<Vec, Vec>(double)>;

/// Solves V' = -Gamma(c)(V, c') along the curve by RK4 and returns V(1).
inline Vec parallel_transport_integrate(const Chart& chart, const Curve& curve, const Vec& v,
                                        int steps = kDefaultSteps) {
  detail::check_steps(steps, "parallel_transport_integrate");
  const double h = 1.0 / steps;
  auto rhs = [&](double t, const Vec& w, long step) -> Vec {
    const auto [c, cp] = curve(t);
    if (!chart.contains(c)) throw DomainError("parallel_transport_integrate: curve left chart '" + chart.name + "'", step);
    return -chart.gamma(c, w, cp);
  };
  Vec w = v;
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const Vec k1 = rhs(t, w, s);
    const Vec k2 = rhs(t + 0.5 * h, w + 0.5 * h * k1, s);
    const Vec k3 = rhs(t + 0.5 * h, w + 0.5 * h * k2, s);
    const Vec k4 = rhs(t + h, w + h * k3, s);
    w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return w;
}

/// Transports w along the geodesic t -> exp_y(t v), t in [0, 1]. The curve
/// and the transported vector are integrated as one system.
struct GeodesicTransport {
  Vec end;
  Vec velocity;
  Mat transported;  // columns: transported input columns
};

inline GeodesicTransport transport_along_geodesic(const Chart& chart, const Vec& y, const Vec& v, const Mat& w,
                                                  int steps = kDefaultSteps) {
  detail::check_steps(steps, "transport_along_geodesic");
  chart.require(y, "transport_along_geodesic");
  const double h = 1.0 / steps;
  const long m = w.cols();
  struct State {
    Vec b, bp;
    Mat W;
  };
  auto rhs = [&](const State& s, long step) -> State {
    if (!chart.contains(s.b)) throw DomainError("transport_along_geodesic: left chart '" + chart.name + "'", step);
    State d;
    d.b = s.bp;
    d.bp = -chart.gamma(s.b, s.bp, s.bp);
    d.W.resize(s.W.rows(), m);
    for (long j = 0; j < m; ++j) d.W.col(j) = -chart.gamma(s.b, Vec(s.W.col(j)), s.bp);
    return d;
  };
  auto axpy = [](const State& s, double a, const State& d) {
    return State{s.b + a * d.b, s.bp + a * d.bp, s.W + a * d.W};
  };
  State s{y, v, w};
  for (int k = 0; k < steps; ++k) {
    const State k1 = rhs(s, k);
    const State k2 = rhs(axpy(s, 0.5 * h, k1), k);
    const State k3 = rhs(axpy(s, 0.5 * h, k2), k);
    const State k4 = rhs(axpy(s, h, k3), k);
    s.b += (h / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    s.bp += (h / 6.0) * (k1.bp + 2.0 * k2.bp + 2.0 * k3.bp + k4.bp);
    s.W += (h / 6.0) * (k1.W + 2.0 * k2.W + 2.0 * k3.W + k4.W);
  }
  return {s.b, s.bp, s.W};
}

}  // namespace gifilter
