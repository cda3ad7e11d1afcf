// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gifilter/experiments/common.hpp"
#include "gifilter/experiments/conditional.hpp"
#include "gifilter/experiments/scenario.hpp"
#include "gifilter/mc/simulate.hpp"
#include "gifilter/mc/stats.hpp"
#include "gifilter/oracle/lyapunov.hpp"

namespace gifilter::experiments {

inline const std::vector<std::string> kBuiltinModels = {"flat-linear", "scalar-exp", "warped-2d"};

struct DiffusionOptions {
  std::vector<std::string> models = kBuiltinModels;
  double gamma = 0.1;
  long n_paths = 1000000;
  int generator_points = 20;
  std::uint64_t seed = 1;
  int threads = 1;
};

inline constexpr double kLyapunovTol = 1e-8, kGeneratorTol = 1e-8;

/// Sample covariance of the first-variation endpoint Lambda_delta alone
/// (no state path), n paths on the flow grid.
inline MomentSums lambda_sums(const FirstVariationGrid& grid, const Mat& Sigma0, long n, std::uint64_t seed,
                              int threads) {
  const int p = static_cast<int>(Sigma0.rows());
  const Mat L = psd_factor(Eigen::MatrixXd(Sigma0));
  const double sq = std::sqrt(grid.dt);
  return deterministic_reduce(static_cast<std::size_t>(n), threads, MomentSums(p), [&](std::size_t i, MomentSums& a) {
    NormalStream rng(seed, i, static_cast<std::uint32_t>(StreamDomain::kPath));
    Vec lambda = L * rng.normal_vec(p);
    for (int k = 0; k < grid.steps(); ++k) grid.advance(lambda, k, sq * rng.normal_vec(p));
    a.add(Eigen::VectorXd(lambda));
  });
}

/// Linear-model Xi against the Lyapunov closed form, Var(Lambda) = Xi by
/// Monte Carlo, and the split of the generator into xi plus half the
/// Laplacian of the induced metric.
inline Report diffusion_geometry_suite(const DiffusionOptions& o) {
  Report rep;
  {
    const Scenario s = default_scenario("flat-linear");
    double worst = 0.0;
    Table& t = rep.table("linear_xi_vs_lyapunov", {"gamma", "delta", "max_abs_diff"});
    for (double g : {1.0, 0.3, o.gamma}) {
      for (double delta : {g * g * s.T0, 1.0}) {
        const ScenarioAt a = scenario_at(s, g);
        const FlowBundle b = integrate_flow(a.geom, a.belief.base, a.belief.Sigma0, delta, 512);
        const Vec x = a.belief.base;
        const Mat A = a.geom.model.drift_jacobian(x);
        const Vec c = a.geom.model.drift(zeros(2));
        const auto [mean, cov] =
            oracle::linear_sde_moments(A, c, a.geom.model.alpha(x), x, a.belief.Sigma0, delta);
        const double d = (b.Xi_delta - Mat(cov)).cwiseAbs().maxCoeff();
        worst = std::max(worst, d);
        t.add(g, delta, d);
      }
    }
    rep.check("linear Xi vs Lyapunov", worst < kLyapunovTol, "max |diff| " + num(worst) + ", need < 1e-8");
  }
  {
    Table& t = rep.table("lambda_variance", {"model", "case", "entry", "mc", "xi", "se"});
    bool ok = true;
    double worst = 0.0;  // largest |mc - xi| / se
    for (size_t mi = 0; mi < o.models.size(); ++mi) {
      const Scenario s = default_scenario(o.models[mi]);
      const ScenarioAt a = scenario_at(s, o.gamma);
      // the scenario as given, and pure process noise over a unit horizon
      const std::vector<std::pair<Mat, double>> cases = {{a.belief.Sigma0, a.delta},
                                                         {Mat::Zero(a.belief.Sigma0.rows(), a.belief.Sigma0.cols()), s.T0}};
      for (size_t ci = 0; ci < cases.size(); ++ci) {
        const auto& [S0, delta] = cases[ci];
        const FlowBundle b = integrate_flow(a.geom, a.belief.base, S0, delta, s.steps);
        const FirstVariationGrid grid(b, a.geom.model);
        const MomentSums ms = lambda_sums(grid, S0, o.n_paths, o.seed + 17 * mi + ci, o.threads);
        const Eigen::MatrixXd cov = ms.cov();
        const Mat& Xi = b.Xi_delta;
        const int p = static_cast<int>(Xi.rows());
        for (int i = 0; i < p; ++i) {
          for (int j = i; j < p; ++j) {
            const double se = std::sqrt((Xi(i, i) * Xi(j, j) + Xi(i, j) * Xi(i, j)) / ms.n);
            const double dev = std::abs(cov(i, j) - Xi(i, j));
            ok = ok && dev <= 3.0 * se;
            worst = std::max(worst, dev / se);
            t.add(o.models[mi], ci == 0 ? "scenario" : "process-noise", std::to_string(i) + std::to_string(j),
                  cov(i, j), Xi(i, j), se);
          }
        }
      }
    }
    rep.check("Var(Lambda) = Xi", ok, "worst |mc - xi| / se = " + num(worst) + ", need <= 3");
  }
  {
    Table& t = rep.table("generator_split", {"model", "point", "coordinate", "intrinsic"});
    double worst = 0.0;
    for (size_t mi = 0; mi < o.models.size(); ++mi) {
      const InducedGeometry geom = make_model(o.models[mi], {}, 0.8);
      const int p = geom.model.dim;
      Draws d(o.seed, 300 + mi);
      for (int k = 0; k < o.generator_points; ++k) {
        Vec x(p);
        for (int i = 0; i < p; ++i) x(i) = d.uniform(-1.0, 1.0);
        // f = sin(w . x + phi)
        const Vec w = d.direction(p, d.uniform(0.5, 2.0));
        const double phi = d.uniform(-1.0, 1.0);
        const double arg = w.dot(x) + phi;
        const Vec df = std::cos(arg) * w;
        const Mat hf = -std::sin(arg) * w * w.transpose();
        const Mat a = geom.model.alpha(x);
        const double lap = a.cwiseProduct(hf).sum() - df.dot(canonical_connector(geom, x).contract(a));
        const double intrinsic = drift_decomposition(geom, x).dot(df) + 0.5 * lap;
        const double coordinate = geom.model.drift(x).dot(df) + 0.5 * a.cwiseProduct(hf).sum();
        worst = std::max(worst, std::abs(intrinsic - coordinate) / std::max(1.0, std::abs(coordinate)));
        t.add(o.models[mi], k, coordinate, intrinsic);
      }
    }
    rep.check("generator split", worst < kGeneratorTol, "max relative diff " + num(worst) + ", need < 1e-8");
  }
  return rep;
}

/// Monte Carlo means of U_delta and Z_delta against the two location
/// parameters, per model at one noise scale.
inline Report ailp_suite(const DiffusionOptions& o) {
  Report rep;
  Table& t = rep.table("ailp", {"model", "quantity", "component", "mc_mean", "se", "ailp", "allowance"});
  const double allowance = kQuarticAllowance * std::pow(o.gamma, 4);
  for (size_t mi = 0; mi < o.models.size(); ++mi) {
    const Scenario s = default_scenario(o.models[mi]);
    const ScenarioAt a = scenario_at(s, o.gamma);
    const FlowBundle b = integrate_flow(a.geom, a.belief.base, a.belief.Sigma0, a.delta, s.steps);
    const Vec ls = ailp_state(b, a.geom);
    const Vec lo = ailp_observation(b, a.geom, a.obs);
    const PathContext ctx(a.geom, a.obs, a.belief, b);
    SimulationConfig cfg;
    cfg.n_paths = o.n_paths;
    cfg.steps = s.steps;
    cfg.seed = o.seed + 31 * mi;
    cfg.threads = o.threads;
    const PathSamples ps = simulate_paths(ctx, cfg);
    // the first-variation endpoint and the observation noise have exact
    // mean zero and carry the leading Gaussian fluctuation of both
    // quantities: control variates
    const int p = a.geom.model.dim, q = a.obs.q;
    const long dim = 2 * (p + q);
    MomentSums ms(dim);
    for (long i = 0; i < ps.size(); ++i) {
      Eigen::VectorXd f(dim);
      f << ps.Udelta.row(i).transpose(), ps.Zdelta.row(i).transpose(), ps.Lambda.row(i).transpose(),
          ps.V1.row(i).transpose();
      ms.add(f);
    }
    const MeanEstimate e = cv_mean(ms, p + q, Eigen::VectorXd::Zero(dim));
    double worst = 0.0;
    bool ok = true;
    for (int j = 0; j < p + q; ++j) {
      const double target = j < p ? ls(j) : lo(j - p);
      const double bound = 3.0 * e.se(j) + allowance;
      const double dev = std::abs(e.mean(j) - target);
      ok = ok && dev <= bound;
      worst = std::max(worst, dev / bound);
      t.add(o.models[mi], j < p ? "U_delta" : "Z_delta", j < p ? j : j - p, e.mean(j), e.se(j), target, allowance);
    }
    rep.check("AILP on " + o.models[mi], ok,
              "worst |mc - ailp| / (3 se + 4 gamma^4) = " + num(worst) + ", need <= 1");
  }
  return rep;
}

}  // namespace gifilter::experiments
