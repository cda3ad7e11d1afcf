// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gifilter/experiments/common.hpp"
#include "gifilter/manifold/chart.hpp"
#include "gifilter/manifold/connection.hpp"
#include "gifilter/manifold/expansions.hpp"
#include "gifilter/manifold/geodesic.hpp"

namespace gifilter::experiments {

struct GeometryOptions {
  std::vector<std::string> charts = {"sphere-stereo", "poincare-half-plane"};
  std::vector<double> ladder = {0.2, 0.1, 0.05, 0.025};
  int cases = 20;            // (point, direction) pairs per chart for the exp expansion
  int curvature_points = 200;
  int reference_steps = 256;  // RK4 steps of the reference geodesic
  std::uint64_t seed = 1;
};

// pinned thresholds
inline constexpr double kExpSlopeMin = 3.7, kExpSlopeMax = 4.3, kExpR2Min = 0.99;
inline constexpr double kBianchiTol = 1e-9, kSectionalTol = 1e-6;
// rounding left by the reference integrator on a flat chart
inline constexpr double kFlatExpTol = 1e-12;

inline std::optional<double> known_sectional_curvature(const std::string& chart) {
  if (chart == "sphere-stereo") return 1.0;
  if (chart == "poincare-half-plane") return -1.0;
  if (chart == "flat") return 0.0;
  return std::nullopt;
}

/// exp_taylor against RK4 geodesics over the ladder, one fit per case.
inline Report exp_expansion_suite(const GeometryOptions& o) {
  Report rep;
  Table& t = rep.table("exp_taylor_ladder", {"chart", "case", "t", "error"});
  Table& fits = rep.table("exp_taylor_fits", {"chart", "case", "slope", "r2"});
  for (size_t ci = 0; ci < o.charts.size(); ++ci) {
    const std::string& name = o.charts[ci];
    const Chart c = make_chart(name);
    Draws d(o.seed, ci);
    double smin = 1e300, smax = -1e300, r2min = 1.0, emax = 0.0;
    for (int k = 0; k < o.cases; ++k) {
      const Vec y = d.chart_point(name);
      const Vec v = d.direction(2);
      std::vector<double> err;
      for (double s : o.ladder) {
        const double e = (exp_taylor(c, y, v, s) - geodesic_integrate(c, y, v, s, o.reference_steps).first).norm();
        t.add(name, k, s, e);
        err.push_back(positive(e));
        emax = std::max(emax, e);
      }
      if (is_flat(c)) continue;
      const OrderFit f = order_fit(o.ladder, err);
      fits.add(name, k, f.slope, f.r2);
      smin = std::min(smin, f.slope);
      smax = std::max(smax, f.slope);
      r2min = std::min(r2min, f.r2);
    }
    if (is_flat(c)) {
      rep.check("exp_taylor exact on " + name, emax < kFlatExpTol, "max error " + num(emax));
      continue;
    }
    rep.check("exp_taylor order on " + name,
              smin >= kExpSlopeMin && smax <= kExpSlopeMax && r2min >= kExpR2Min,
              "slopes in [" + num(smin) + ", " + num(smax) + "], min r2 " + num(r2min) + " over " +
                  std::to_string(o.cases) + " cases; need [3.7, 4.3], r2 >= 0.99");
  }
  return rep;
}

/// Antisymmetry (exact), first Bianchi identity with the analytic connector
/// derivative, and sectional curvature of the model spaces.
inline Report curvature_suite(const GeometryOptions& o) {
  Report rep;
  Table& t = rep.table("curvature", {"chart", "point", "antisymmetry", "bianchi", "sectional"});
  for (size_t ci = 0; ci < o.charts.size(); ++ci) {
    const std::string& name = o.charts[ci];
    const Chart c = make_chart(name);
    Draws d(o.seed, 100 + ci);
    const auto K = known_sectional_curvature(name);
    double anti = 0.0, bianchi = 0.0, sec_err = 0.0;
    for (int k = 0; k < o.curvature_points; ++k) {
      const Vec x = d.chart_point(name);
      const Vec u = d.direction(2), v = d.direction(2), w = d.direction(2);
      const double a = (curvature(c, x, u, v, w) + curvature(c, x, v, u, w)).cwiseAbs().maxCoeff();
      const double b =
          (curvature(c, x, u, v, w) + curvature(c, x, v, w, u) + curvature(c, x, w, u, v)).cwiseAbs().maxCoeff();
      // u, v are unit in coordinates; skip nearly parallel pairs
      const bool spans = std::abs(u.dot(v)) < 0.99;
      const double s = spans ? sectional_curvature(c, x, u, v) : std::nan("");
      anti = std::max(anti, a);
      bianchi = std::max(bianchi, b);
      if (K && spans) sec_err = std::max(sec_err, std::abs(s - *K));
      t.add(name, k, a, b, s);
    }
    rep.check("curvature antisymmetry on " + name, anti == 0.0, "max |R(u,v)w + R(v,u)w| = " + num(anti));
    rep.check("first Bianchi identity on " + name, bianchi < kBianchiTol,
              "max residual " + num(bianchi) + ", need < 1e-9");
    if (K) {
      rep.check("sectional curvature on " + name, sec_err < kSectionalTol,
                "max |K - (" + num(*K) + ")| = " + num(sec_err) + ", need < 1e-6");
    }
  }
  return rep;
}

}  // namespace gifilter::experiments
