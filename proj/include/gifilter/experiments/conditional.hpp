// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gifilter/experiments/common.hpp"
#include "gifilter/gaussian_cond.hpp"
#include "gifilter/mc/parallel.hpp"
#include "gifilter/mc/stats.hpp"

namespace gifilter::experiments {

/// Allowance for "O(gamma^4)" terms in Monte Carlo comparisons.
inline constexpr double kQuarticAllowance = 4.0;
inline constexpr double kContractSlopeMin = 3.5;

/// Bounded test functions with max(sup |h|, sup |h'|) = 1.
inline constexpr int kBatterySize = 8;
inline const std::array<const char*, kBatterySize> kBatteryNames = {
    "1", "tanh(y)", "sin(y)", "cos(y)", "exp(-y^2/2)", "y/(1+y^2)", "(2/pi)atan(y)", "1/(1+y^2)"};

inline std::array<double, kBatterySize> battery(double y) {
  return {1.0,
          std::tanh(y),
          std::sin(y),
          std::cos(y),
          std::exp(-0.5 * y * y),
          y / (1.0 + y * y),
          2.0 / std::numbers::pi * std::atan(y),
          1.0 / (1.0 + y * y)};
}

struct ConditionalOptions {
  std::vector<double> ladder = {0.2, 0.1, 0.05};
  long samples = 10000000;
  double lambda = 1.0;  // X = U + lambda U^2
  double theta = 1.0;   // Y = V + theta U^2
  int cv_degree = 6;    // centered monomials of the two driving normals, degrees 1..cv_degree
  std::vector<double> bins = {-1.0, -0.5, 0.0, 0.5, 1.0};  // in units of sd(Yhat)
  double bandwidth_scale = 1.06;                          // Silverman
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Scalar model with Z = U: Var U = Var V = gamma^2, Cov(U, V) = gamma^2 / 2.
inline QuadraticGaussianModel scalar_conditional_model(double gamma, double lambda, double theta) {
  const double g2 = gamma * gamma;
  QuadraticGaussianModel m;
  m.Q = Mat::Constant(1, 1, g2);
  m.S = Mat::Constant(1, 1, g2);
  m.Rcov = Mat::Constant(1, 1, g2);
  m.A = Mat::Constant(1, 1, g2 / 2);
  m.C = Mat::Constant(1, 1, g2 / 2);
  m.muV = zeros(1);
  m.muZ = zeros(1);
  m.lambda = Bilinear(1, 1);
  m.lambda.form(0)(0, 0) = lambda;
  m.theta = Bilinear(1, 1);
  m.theta.form(0)(0, 0) = theta;
  return m;
}

namespace detail {

/// Moment sums for the weak contract plus per-bin weighted Gram matrices of
/// (1, Yhat - y_b, W - X) for local-linear conditional variances.
struct ConditionalAcc {
  MomentSums ms;
  std::vector<Eigen::Matrix4d> bins;  // top-left 3x3: sum w f f^T; (3, 3): sum w^2

  ConditionalAcc& operator+=(const ConditionalAcc& o) {
    ms += o.ms;
    for (size_t b = 0; b < bins.size(); ++b) bins[b] += o.bins[b];
    return *this;
  }
};

}  // namespace detail

struct ConditionalRung {
  double gamma = 0.0;
  double var_approx = 0.0;
  MeanEstimate est;  // 8 contract features, then 8 variance-contract features
  std::vector<double> bin_center, bin_var, bin_se, bin_ess;
};

inline ConditionalRung conditional_rung(const ConditionalOptions& o, double gamma) {
  const QuadraticGaussianModel model = scalar_conditional_model(gamma, o.lambda, o.theta);
  const ConditionalMeanApprox W(model);
  ConditionalRung r;
  r.gamma = gamma;
  r.var_approx = approx_conditional_var(model)(0, 0);
  Eigen::Matrix2d J;
  J << model.Q(0, 0), model.A(0, 0), model.A(0, 0), model.S(0, 0);
  const Eigen::Matrix2d L = J.llt().matrixL();
  const GaussianMonomials gm(2, o.cv_degree, true);
  const long m = 2 * kBatterySize;
  const long dim = m + gm.size();
  // sd(Yhat) to leading order; the bandwidth rule uses n^{-1/5}
  const double sd = std::sqrt(model.S(0, 0));
  const double h = o.bandwidth_scale * sd * std::pow(static_cast<double>(o.samples), -0.2);
  for (double b : o.bins) r.bin_center.push_back(b * sd);
  detail::ConditionalAcc zero{MomentSums(dim), std::vector<Eigen::Matrix4d>(o.bins.size(), Eigen::Matrix4d::Zero())};
  const detail::ConditionalAcc acc = deterministic_reduce(
      static_cast<std::size_t>(o.samples), o.threads, zero, [&](std::size_t i, detail::ConditionalAcc& a) {
        NormalStream rng(o.seed, i, static_cast<std::uint32_t>(StreamDomain::kConditional));
        Eigen::Vector2d xi;
        xi << rng.normal(), rng.normal();
        const Eigen::Vector2d uv = L * xi;
        const double U = uv(0), V = uv(1);
        const double X = U + o.lambda * U * U;
        const double Y = V + o.theta * U * U;
        const double yh = Y - W.mean_y(0);
        const double D = W(Vec::Constant(1, Y))(0) - X;
        const auto hs = battery(yh);
        Eigen::VectorXd f(dim);
        for (int k = 0; k < kBatterySize; ++k) {
          f(k) = hs[static_cast<size_t>(k)] * D;
          f(kBatterySize + k) = hs[static_cast<size_t>(k)] * (D * D - r.var_approx);
        }
        gm.fill(xi, f.tail(gm.size()));
        a.ms.add(f);
        for (size_t b = 0; b < r.bin_center.size(); ++b) {
          const double d = yh - r.bin_center[b];
          const double w = std::exp(-0.5 * d * d / (h * h));
          if (w < 1e-300) continue;
          const Eigen::Vector3d g(1.0, d, D);
          a.bins[b].topLeftCorner<3, 3>() += w * g * g.transpose();
          a.bins[b](3, 3) += w * w;
        }
      });
  r.est = cv_mean(acc.ms, m, Eigen::VectorXd::Zero(dim));
  for (const auto& B : acc.bins) {
    // weighted least squares of D on (1, d); the residual second moment is
    // the conditional variance at the bin centre
    const Eigen::Matrix2d XtX = B.topLeftCorner<2, 2>();
    const Eigen::Vector2d XtD = B.block<2, 1>(0, 2);
    const Eigen::Vector2d beta = XtX.ldlt().solve(XtD);
    const double sw = B(0, 0);
    const double var = (B(2, 2) - XtD.dot(beta)) / sw;
    const double ess = sw * sw / B(3, 3);
    r.bin_var.push_back(var);
    r.bin_ess.push_back(ess);
    r.bin_se.push_back(var * std::sqrt(2.0 / ess));
  }
  return r;
}

inline Report conditional_suite(const ConditionalOptions& o) {
  Report rep;
  Table& t = rep.table("conditional_contract", {"gamma", "h", "estimate", "se"});
  Table& tv = rep.table("conditional_variance_contract", {"gamma", "h", "estimate", "se"});
  Table& tb = rep.table("conditional_variance_bins", {"gamma", "yhat", "mc_variance", "se", "ess", "approx", "allowance"});
  std::array<std::vector<double>, kBatterySize> e, s, ev, sv;
  bool bins_ok = true;
  double worst = 0.0;  // largest |mc - approx| / (3 se + allowance)
  for (double g : o.ladder) {
    const ConditionalRung r = conditional_rung(o, g);
    for (int k = 0; k < kBatterySize; ++k) {
      const auto kk = static_cast<size_t>(k);
      t.add(g, kBatteryNames[kk], r.est.mean(k), r.est.se(k));
      tv.add(g, kBatteryNames[kk], r.est.mean(kBatterySize + k), r.est.se(kBatterySize + k));
      e[kk].push_back(positive(std::abs(r.est.mean(k))));
      s[kk].push_back(r.est.se(k));
      ev[kk].push_back(positive(std::abs(r.est.mean(kBatterySize + k))));
      sv[kk].push_back(r.est.se(kBatterySize + k));
    }
    const double allowance = kQuarticAllowance * std::pow(g, 4);
    for (size_t b = 0; b < r.bin_var.size(); ++b) {
      const double bound = 3.0 * r.bin_se[b] + allowance;
      const double dev = std::abs(r.bin_var[b] - r.var_approx);
      bins_ok = bins_ok && dev <= bound;
      worst = std::max(worst, dev / bound);
      tb.add(g, r.bin_center[b], r.bin_var[b], r.bin_se[b], r.bin_ess[b], r.var_approx, allowance);
    }
  }
  double smin = 1e300, svmin = 1e300;
  std::string which, which_v;
  for (int k = 0; k < kBatterySize; ++k) {
    const auto kk = static_cast<size_t>(k);
    const McFit f = mc_order_fit(o.ladder, e[kk], s[kk]);
    const McFit fv = mc_order_fit(o.ladder, ev[kk], sv[kk]);
    if (f.fit.slope < smin) {
      smin = f.fit.slope;
      which = kBatteryNames[kk];
    }
    if (fv.fit.slope < svmin) {
      svmin = fv.fit.slope;
      which_v = kBatteryNames[kk];
    }
  }
  rep.check("weak contract order, 8-function battery", smin >= kContractSlopeMin,
            "min slope " + num(smin) + " (h = " + which + "), need >= 3.5");
  rep.check("conditional variance vs binned MC", bins_ok,
            "worst |mc - approx| / (3 se + 4 gamma^4) = " + num(worst) + ", need <= 1");
  rep.check("weak variance contract order (supplementary)", svmin >= kContractSlopeMin,
            "min slope " + num(svmin) + " (h = " + which_v + "), need >= 3.5");
  return rep;
}

}  // namespace gifilter::experiments
