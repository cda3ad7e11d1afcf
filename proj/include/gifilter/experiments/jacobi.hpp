// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "gifilter/experiments/common.hpp"
#include "gifilter/manifold/chart.hpp"
#include "gifilter/manifold/jacobi.hpp"
#include "gifilter/mc/parallel.hpp"
#include "gifilter/oracle/zeta_fd.hpp"

namespace gifilter::experiments {

struct JacobiOptions {
  std::vector<std::string> charts = {"sphere-stereo", "poincare-half-plane"};
  std::vector<double> ladder = {0.2, 0.1, 0.05};
  int configurations = 1000;  // per rung
  oracle::ZetaOptions fd;
  std::uint64_t seed = 1;
  int threads = 1;
};

inline constexpr double kZeta1SlopeMin = 3.7, kZeta2SlopeMin = 3.7, kZeta3SlopeMin = 3.3;

/// zeta', zeta'', zeta''' from the closed-form expansion against finite
/// differences of exp/log, for random cubic paths y and fields V scaled by
/// gamma. The per-rung error is the mean over configurations; the same
/// configurations are reused on every rung.
inline Report zeta_suite(const JacobiOptions& o) {
  Report rep;
  Table& t = rep.table("zeta_ladder", {"chart", "gamma", "order", "mean_error", "max_error"});
  const double mins[3] = {kZeta1SlopeMin, kZeta2SlopeMin, kZeta3SlopeMin};
  const char* labels[3] = {"zeta'", "zeta''", "zeta'''"};
  for (size_t ci = 0; ci < o.charts.size(); ++ci) {
    const std::string& name = o.charts[ci];
    const Chart c = make_chart(name);
    struct Config {
      Vec y0;
      std::array<Vec, 7> d;
    };
    std::vector<Config> cfgs;
    Draws dr(o.seed, 200 + ci);
    for (int k = 0; k < o.configurations; ++k) {
      Config cf;
      cf.y0 = dr.chart_point(name);
      for (auto& v : cf.d) v = dr.direction(2);
      cfgs.push_back(cf);
    }
    std::array<std::vector<double>, 3> mean_err;
    for (double g : o.ladder) {
      const size_t n = cfgs.size();
      // per configuration: three errors, then their running max in the reduction
      std::vector<std::array<double, 3>> e(n);
      for_blocks(n, 16, o.threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          const Config& cf = cfgs[i];
          const oracle::CubicPath y{cf.y0, g * cf.d[0], g * cf.d[1], g * cf.d[2]};
          const oracle::CubicPath V{g * cf.d[3], g * cf.d[4], g * cf.d[5], g * cf.d[6]};
          const auto [cj, vj] = oracle::covariant_jets(c, y, V);
          const auto [a1, a2, a3] = zeta_derivatives(c, cj, vj);
          const auto [b1, b2, b3] = oracle::zeta_fd(c, y, V, o.fd);
          e[i] = {(a1 - b1).norm(), (a2 - b2).norm(), (a3 - b3).norm()};
        }
      });
      for (int k = 0; k < 3; ++k) {
        double s = 0.0, mx = 0.0;
        for (const auto& x : e) {
          s += x[static_cast<size_t>(k)];
          mx = std::max(mx, x[static_cast<size_t>(k)]);
        }
        const double m = s / static_cast<double>(n);
        mean_err[static_cast<size_t>(k)].push_back(positive(m));
        t.add(name, g, k + 1, m, mx);
      }
    }
    for (int k = 0; k < 3; ++k) {
      const OrderFit f = order_fit(o.ladder, mean_err[static_cast<size_t>(k)]);
      rep.check(std::string(labels[k]) + " order on " + name, f.slope >= mins[k],
                fmt_fit(f) + ", need slope >= " + num(mins[k]));
    }
  }
  return rep;
}

}  // namespace gifilter::experiments
