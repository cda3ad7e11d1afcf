// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "gifilter/barycentre.hpp"
#include "gifilter/experiments/common.hpp"
#include "gifilter/mc/parallel.hpp"
#include "gifilter/mc/stats.hpp"

namespace gifilter::experiments {

struct BarycentreOptions {
  std::string chart = "sphere-stereo";
  Vec base = (Vec(2) << 0.3, -0.2).finished();
  Vec mean_direction = (Vec(2) << 0.8, 0.6).finished();       // mu = gamma * this
  Mat cov_shape = (Mat(2, 2) << 1.0, 0.3, 0.3, 0.6).finished();  // Sigma = gamma^2 * this
  std::vector<double> ladder = {0.2, 0.1, 0.05};
  long samples = 1000000;  // points Z per rung, drawn as antithetic pairs
  int geodesic_steps = 8;
  LogOptions log{8, 1e-13, 50};
  int cv_degree = 6;  // centered Gaussian monomials of even degree up to this
  std::uint64_t seed = 1;
  int threads = 1;
};

inline constexpr double kBaryCorrectedSlopeMin = 3.5, kBaryNaiveSlopeMax = 3.3, kThirdMomentSlopeMin = 3.3;

/// Means over Z = exp_x(eta), eta ~ N(mu, Sigma), of exp_z^{-1}(Z) at the
/// corrected barycentre and at exp_x(mu), plus T(v, v, v) at the corrected
/// point for the curvature tensor and the metric-cubic tensor.
struct BarycentreRung {
  double gamma = 0.0;
  Vec z_corrected, z_naive;
  MeanEstimate est;  // features: residual at z (2), at exp_x(mu) (2), T = R (2), T = g(.,.). (2)
};

inline BarycentreRung barycentre_rung(const BarycentreOptions& o, double gamma) {
  const Chart c = make_chart(o.chart);
  const int p = c.dim;
  BarycentreRung r;
  r.gamma = gamma;
  const Vec mu = gamma * o.mean_direction;
  const Mat S = gamma * gamma * o.cov_shape;
  const Mat L = psd_factor(Eigen::MatrixXd(S));
  r.z_corrected = exp_barycentre(c, {o.base, mu, S});
  r.z_naive = exp_map(c, o.base, mu, 256);
  const Tensor13 TR = curvature_tensor(c, r.z_corrected);
  const Tensor13 TG = metric_cubic_tensor(c, r.z_corrected);
  const GaussianMonomials gm(p, o.cv_degree);
  const long m = 4 * p;
  const long dim = m + gm.size();
  const std::size_t pairs = static_cast<std::size_t>((o.samples + 1) / 2);
  const MomentSums sums = deterministic_reduce(pairs, o.threads, MomentSums(dim), [&](std::size_t i, MomentSums& acc) {
    NormalStream rng(o.seed, i, static_cast<std::uint32_t>(StreamDomain::kBarycentre));
    const Vec xi = rng.normal_vec(p);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(dim);
    for (int s = -1; s <= 1; s += 2) {
      const Vec eta = mu + L * (static_cast<double>(s) * xi);
      try {
        const Vec Z = exp_map(c, o.base, eta, o.geodesic_steps);
        const Vec a = log_map(c, r.z_corrected, Z, o.log);
        const Vec b = log_map(c, r.z_naive, Z, o.log);
        f.segment(0, p) += 0.5 * Eigen::VectorXd(a);
        f.segment(p, p) += 0.5 * Eigen::VectorXd(b);
        f.segment(2 * p, p) += 0.5 * Eigen::VectorXd(TR(a, a, a));
        f.segment(3 * p, p) += 0.5 * Eigen::VectorXd(TG(a, a, a));
      } catch (const Error& e) {
        throw ConvergenceError(std::string("barycentre sample: ") + e.what(), static_cast<long>(i));
      }
    }
    gm.fill(xi, f.tail(gm.size()));
    acc.add(f);
  });
  r.est = cv_mean(sums, m, Eigen::VectorXd::Zero(dim));
  return r;
}

inline Report barycentre_suite(const BarycentreOptions& o) {
  Report rep;
  Table& t = rep.table("barycentre_ladder", {"chart", "gamma", "point", "residual_norm", "se"});
  Table& tm = rep.table("third_moment_ladder", {"chart", "gamma", "tensor", "norm", "se"});
  const int p = make_chart(o.chart).dim;
  std::vector<double> ec, sc, en, sn, eg, sg;
  double r_max = 0.0;
  for (double g : o.ladder) {
    const BarycentreRung r = barycentre_rung(o, g);
    auto block = [&](int k) {
      return norm_with_se(r.est.mean.segment(k * p, p), r.est.cov.block(k * p, k * p, p, p), r.est.n);
    };
    const auto [nc, sec] = block(0);
    const auto [nn, sen] = block(1);
    const auto [nr, ser] = block(2);
    const auto [ng, seg] = block(3);
    t.add(o.chart, g, "corrected", nc, sec);
    t.add(o.chart, g, "naive", nn, sen);
    tm.add(o.chart, g, "curvature", nr, ser);
    tm.add(o.chart, g, "metric-cubic", ng, seg);
    ec.push_back(positive(nc));
    sc.push_back(sec);
    en.push_back(positive(nn));
    sn.push_back(sen);
    eg.push_back(positive(ng));
    sg.push_back(seg);
    r_max = std::max(r_max, nr);
  }
  const McFit fc = mc_order_fit(o.ladder, ec, sc);
  const McFit fn = mc_order_fit(o.ladder, en, sn);
  rep.check("corrected barycentre residual order", fc.fit.slope >= kBaryCorrectedSlopeMin,
            fmt_fit(fc) + ", need slope >= 3.5");
  rep.check("uncorrected point residual order", fn.fit.slope <= kBaryNaiveSlopeMax, fmt_fit(fn) + ", need slope <= 3.3");
  rep.check("slope intervals separate", fn.hi < fc.lo,
            "uncorrected upper " + num(fn.hi) + " < corrected lower " + num(fc.lo));
  const McFit fg = mc_order_fit(o.ladder, eg, sg);
  rep.check("third moment order, T = g(.,.)id", fg.fit.slope >= kThirdMomentSlopeMin, fmt_fit(fg) + ", need slope >= 3.3");
  rep.check("third moment, T = R", r_max == 0.0, "max norm " + num(r_max) + " (R(v, v)v = 0 identically)");
  return rep;
}

}  // namespace gifilter::experiments
