// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gifilter/diffusion/flow.hpp"
#include "gifilter/filter.hpp"
#include "gifilter/manifold/geodesic.hpp"
#include "gifilter/mc/parallel.hpp"
#include "gifilter/mc/rng.hpp"

namespace gifilter {

/// Stream domains keep the draws of different experiments apart even when
/// they share a seed and path index.
enum class StreamDomain : std::uint32_t { kPath = 1, kInitial = 2, kObservation = 3, kBarycentre = 4, kConditional = 5, kConfig = 6 };

struct SimulationConfig {
  long n_paths = 1000000;
  int steps = 1024;  // Euler steps per horizon, dt = delta / steps
  std::uint64_t seed = 1;
  int threads = 1;
  int geodesic_steps = 16;  // per-sample exp/log RK4 steps; displacements are O(gamma)
  LogOptions log{16, 1e-12, 50};
};

/// Euler-Maruyama X += b dt + sigma sqrt(dt) N(0, I), coordinate drift b.
inline Vec simulate_sde(const DiffusionModel& m, const Vec& x_init, double delta, int steps, NormalStream& rng) {
  if (steps < 1) throw InvalidArgument("simulate_sde: steps must be >= 1");
  const double dt = delta / steps;
  const double sq = std::sqrt(dt);
  Vec x = x_init;
  for (int k = 0; k < steps; ++k) {
    if (!m.contains(x)) throw DomainError("simulate_sde: path left the model domain at t = " + std::to_string(k * dt), k);
    const Vec dw = sq * rng.normal_vec(m.dim);
    x += m.drift(x) * dt + m.sigma(x) * dw;
  }
  if (!m.contains(x)) throw DomainError("simulate_sde: path left the model domain at t = " + std::to_string(delta), steps);
  return x;
}

/// (X_0, U_0) with U_0 ~ N(0, Sigma0) and X_0 = exp_{x0}(U_0) on the geodesic.
inline std::pair<Vec, Vec> sample_initial(const FilterBelief& belief, const Chart& chart, NormalStream& rng,
                                          int geodesic_steps = 64) {
  const int p = chart.dim;
  const Mat L = psd_factor(Eigen::MatrixXd(belief.Sigma0));
  const Vec u0 = L * rng.normal_vec(p);
  if (u0.isZero(0.0)) return {belief.base, u0};
  return {exp_map(chart, belief.base, u0, geodesic_steps), u0};
}

/// Y_1 = exp_{psi(x)}(V_1), V_1 ~ N(0, beta(psi(x))).
/// The tangent noise V_1 is returned through `noise` when given.
inline Vec sample_observation(const ObservationMap& obs, const Vec& x_end, NormalStream& rng,
                              int geodesic_steps = 64, Vec* noise = nullptr) {
  const Vec y = obs.psi(x_end);
  const Mat F = psd_factor(Eigen::MatrixXd(obs.beta(y)));
  const Vec v1 = F * rng.normal_vec(obs.q);
  if (noise) *noise = v1;
  if (v1.isZero(0.0)) return y;
  return exp_map(obs.chart_M, y, v1, geodesic_steps);
}

/// Per-step data of the deterministic flow used by the first-variation
/// recursion: step transports tau_{t_k}^{t_k+1} and sigma at the grid points.
struct FirstVariationGrid {
  double dt = 0.0;
  std::vector<Mat> step_tau;
  std::vector<Mat> sigma;

  explicit FirstVariationGrid(const FlowBundle& b, const DiffusionModel& m) {
    const int K = b.steps();
    dt = b.delta / K;
    step_tau.reserve(static_cast<size_t>(K));
    sigma.reserve(static_cast<size_t>(K) + 1);
    for (int k = 0; k < K; ++k) step_tau.push_back(b.tau0t[static_cast<size_t>(k) + 1] * b.taut0[static_cast<size_t>(k)]);
    for (int k = 0; k <= K; ++k) sigma.push_back(m.sigma(b.x[static_cast<size_t>(k)]));
  }

  int steps() const { return static_cast<int>(step_tau.size()); }

  /// Exact covariance of the discrete Lambda_delta started from Var = Sigma0.
  Mat covariance(const Mat& Sigma0) const {
    Mat P = Sigma0;
    for (int k = 0; k < steps(); ++k) {
      const Mat& T = step_tau[static_cast<size_t>(k)];
      const Mat M = 0.5 * (T * sigma[static_cast<size_t>(k)] + sigma[static_cast<size_t>(k) + 1]);
      P = T * P * T.transpose() + dt * M * M.transpose();
    }
    return symmetrized(P);
  }

  /// Lambda_{k+1} = tau_k Lambda_k + (1/2)(tau_k sigma_k + sigma_{k+1}) dW_k:
  /// the stochastic integral with a trapezoidal integrand, so the variance
  /// is accurate to O(dt^2).
  void advance(Vec& lambda, int k, const Vec& dw) const {
    const Mat& T = step_tau[static_cast<size_t>(k)];
    lambda = T * lambda + 0.5 * (T * sigma[static_cast<size_t>(k)] + sigma[static_cast<size_t>(k) + 1]) * dw;
  }
};

/// Lambda_delta from U_0 and a recorded sequence of Wiener increments.
inline Vec first_variation(const FirstVariationGrid& grid, const Vec& u0, const std::vector<Vec>& increments) {
  if (static_cast<int>(increments.size()) != grid.steps()) {
    throw InvalidArgument("first_variation: increment count does not match the flow grid");
  }
  Vec lambda = u0;
  for (int k = 0; k < grid.steps(); ++k) grid.advance(lambda, k, increments[static_cast<size_t>(k)]);
  return lambda;
}

struct PathSample {
  Vec U0;
  Vec X0;
  Vec Xdelta;
  Vec Udelta;  // exp_{x_delta}^{-1}(X_delta)
  Vec Y1;
  Vec V1;      // observation noise in T_{psi(X_delta)} M
  Vec Zdelta;  // exp_{psi(x_delta)}^{-1}(Y_1)
  Vec Lambda;  // first-variation endpoint
};

/// Everything a path needs from the deterministic prediction.
struct PathContext {
  const InducedGeometry* geom = nullptr;
  const ObservationMap* obs = nullptr;
  FilterBelief belief;
  double delta = 0.0;
  Vec x_delta;
  Vec y_delta;
  FirstVariationGrid grid;

  PathContext(const InducedGeometry& g, const ObservationMap& o, const FilterBelief& b, const FlowBundle& bundle)
      : geom(&g), obs(&o), belief(b), delta(bundle.delta), x_delta(bundle.x_delta()),
        y_delta(o.psi(bundle.x_delta())), grid(bundle, g.model) {}
};

/// One coupled realization: initial draw, Euler path with the first
/// variation driven by the same increments, observation draw, and both logs.
/// All normals come from the stream (seed, path); the draw order is U_0, the
/// increments, then V_1.
inline PathSample simulate_path(const PathContext& ctx, std::uint64_t seed, std::uint64_t path,
                                const SimulationConfig& cfg, std::vector<Vec>* increments = nullptr) {
  const DiffusionModel& m = ctx.geom->model;
  const Chart& chart = ctx.geom->chart;
  const int p = m.dim;
  const int K = ctx.grid.steps();
  NormalStream rng(seed, path, static_cast<std::uint32_t>(StreamDomain::kPath));
  PathSample s;
  std::tie(s.X0, s.U0) = sample_initial(ctx.belief, chart, rng, cfg.geodesic_steps);
  const double dt = ctx.delta / K;
  const double sq = std::sqrt(dt);
  Vec x = s.X0;
  Vec lambda = s.U0;
  if (increments) increments->clear();
  for (int k = 0; k < K; ++k) {
    if (!m.contains(x)) throw DomainError("simulate_path: path left the model domain at t = " + std::to_string(k * dt), k);
    const Vec dw = sq * rng.normal_vec(p);
    if (increments) increments->push_back(dw);
    x += m.drift(x) * dt + m.sigma(x) * dw;
    ctx.grid.advance(lambda, k, dw);
  }
  if (!m.contains(x) || !chart.contains(x)) throw DomainError("simulate_path: endpoint outside the model domain", K);
  s.Xdelta = x;
  s.Lambda = lambda;
  s.Y1 = sample_observation(*ctx.obs, x, rng, cfg.geodesic_steps, &s.V1);
  s.Udelta = log_map(chart, ctx.x_delta, x, cfg.log);
  s.Zdelta = log_map(ctx.obs->chart_M, ctx.y_delta, s.Y1, cfg.log);
  return s;
}

/// Column-major sample store, one row per path.
struct PathSamples {
  Eigen::MatrixXd U0, Udelta, Zdelta, Lambda, V1, Xdelta;

  long size() const { return Udelta.rows(); }
};

/// n paths in parallel blocks; path i always uses stream (seed, i), so the
/// result does not depend on the thread count. A failed path is reported
/// with its index.
inline PathSamples simulate_paths(const PathContext& ctx, const SimulationConfig& cfg) {
  if (cfg.n_paths < 1) throw InvalidArgument("simulate_paths: n_paths must be >= 1");
  const long n = cfg.n_paths;
  const int p = ctx.geom->model.dim, q = ctx.obs->q;
  PathSamples out{Eigen::MatrixXd(n, p), Eigen::MatrixXd(n, p), Eigen::MatrixXd(n, q), Eigen::MatrixXd(n, p),
                  Eigen::MatrixXd(n, q), Eigen::MatrixXd(n, p)};
  for_blocks(static_cast<std::size_t>(n), kReduceBlock, cfg.threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      PathSample s;
      try {
        s = simulate_path(ctx, cfg.seed, i, cfg);
      } catch (const Error& e) {
        throw ConvergenceError(std::string("simulate_paths: ") + e.what(), static_cast<long>(i));
      }
      const auto r = static_cast<Eigen::Index>(i);
      out.U0.row(r) = s.U0.transpose();
      out.Udelta.row(r) = s.Udelta.transpose();
      out.Zdelta.row(r) = s.Zdelta.transpose();
      out.Lambda.row(r) = s.Lambda.transpose();
      out.V1.row(r) = s.V1.transpose();
      out.Xdelta.row(r) = s.Xdelta.transpose();
    }
  });
  return out;
}

}  // namespace gifilter
