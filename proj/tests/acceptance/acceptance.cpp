// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, each followed by the
// measured values behind it. Lines marked "supplementary" are diagnostics
// and do not decide the criterion. Tolerances are pinned in the suite
// headers; sample sizes here are the acceptance sizes.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "gifilter/experiments/barycentre.hpp"
#include "gifilter/experiments/conditional.hpp"
#include "gifilter/experiments/diffusion.hpp"
#include "gifilter/experiments/filter.hpp"
#include "gifilter/experiments/geometry.hpp"
#include "gifilter/experiments/jacobi.hpp"

using namespace gifilter::experiments;

namespace {

bool supplementary(const Check& c) { return c.name.find("(supplementary)") != std::string::npos; }

struct Criterion {
  int id;
  std::string title;
  double budget_s;  // runtime budget, reported but not enforced
  std::function<Report()> run;
  std::function<bool(const Check&)> owns = [](const Check&) { return true; };
};

std::filesystem::path g_out = "acceptance_out";

void save(const std::string& name, const std::string& body) {
  std::ofstream(g_out / name, std::ios::binary) << body;
}

/// Prints the criterion line and its checks; returns the verdict.
bool report(const Criterion& c, const Report& r, double seconds) {
  bool pass = true;
  int primary = 0;
  for (const auto& k : r.checks) {
    if (!c.owns(k) || supplementary(k)) continue;
    pass = pass && k.pass;
    ++primary;
  }
  pass = pass && primary > 0;
  std::printf("criterion %2d %s  %s  (%.1f s, budget %.0f s)\n", c.id, pass ? "PASS" : "FAIL", c.title.c_str(),
              seconds, c.budget_s);
  for (const auto& k : r.checks) {
    if (!c.owns(k)) continue;
    std::printf("    %s %s: %s\n", k.pass ? "pass" : "FAIL", k.name.c_str(), k.detail.c_str());
  }
  std::fflush(stdout);
  return pass;
}

template <class F>
std::pair<Report, double> timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Report r = f();
  return {std::move(r), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
}

/// Reduced-size versions of every suite, for the determinism comparison.
Report determinism_probe(int threads) {
  Report r;
  GeometryOptions go;
  go.cases = 4;
  go.curvature_points = 20;
  r.merge(exp_expansion_suite(go));
  r.merge(curvature_suite(go));
  JacobiOptions jo;
  jo.configurations = 20;
  jo.threads = threads;
  r.merge(zeta_suite(jo));
  BarycentreOptions bo;
  bo.samples = 20000;
  bo.threads = threads;
  r.merge(barycentre_suite(bo));
  ConditionalOptions co;
  co.samples = 100000;
  co.threads = threads;
  r.merge(conditional_suite(co));
  DiffusionOptions dopt;
  dopt.n_paths = 20000;
  dopt.threads = threads;
  r.merge(diffusion_geometry_suite(dopt));
  r.merge(ailp_suite(dopt));
  r.merge(flat_reduction_suite({}));
  FilterMcOptions fo;
  fo.n_paths = 20000;
  fo.threads = threads;
  r.merge(filter_mc_suite(fo));
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_out = argv[1];
  std::filesystem::create_directories(g_out);
  std::printf("%s acceptance run\n", kVersion);

  // criteria 8 and 10 share one simulation per rung
  Report filter_mc;
  double filter_mc_s = 0.0;
  auto filter_mc_once = [&]() -> Report {
    if (filter_mc.checks.empty()) std::tie(filter_mc, filter_mc_s) = timed([] { return filter_mc_suite({}); });
    return filter_mc;
  };
  auto in = [](std::vector<std::string> names) {
    return [names](const Check& c) {
      for (const auto& n : names)
        if (c.name.rfind(n, 0) == 0) return true;
      return false;
    };
  };

  std::vector<Criterion> criteria = {
      {1, "exponential-map expansion", 10, [] { return exp_expansion_suite({}); }},
      {2, "curvature algebra", 5, [] { return curvature_suite({}); }},
      {3, "zeta derivatives vs finite differences", 120, [] { return zeta_suite({}); }},
      {4, "corrected exponential barycentre", 300, [] { return barycentre_suite({}); }},
      {5, "quadratic-Gaussian conditional moments", 600, [] { return conditional_suite({}); }},
      {6, "diffusion geometry", 300, [] { return diffusion_geometry_suite({}); }},
      {7, "approximate intrinsic location parameters", 600, [] { return ailp_suite({}); }},
      {8, "intrinsic update vs kernel-regression oracle", 1800, filter_mc_once,
       in({"update mean", "update covariance", "EKF slope", "kernel bandwidth", "weak update", "weak distance"})},
      {9, "flat-space reduction", 5, [] { return flat_reduction_suite({}); }},
      {10, "recursion hygiene", 600, filter_mc_once, in({"recentred", "weak recentred", "weak third"})},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    auto [r, s] = timed(c.run);
    if (c.id == 8) s = filter_mc_s;
    if (c.id == 10) s = 0.0;  // shares the criterion-8 simulation
    save("criterion_" + std::to_string(c.id) + ".csv", r.csv_bundle());
    if (!report(c, r, s)) ++failed;
  }

  {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string a = determinism_probe(1).csv_bundle();
    const std::string b = determinism_probe(1).csv_bundle();
    const std::string c = determinism_probe(3).csv_bundle();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save("determinism_threads1.csv", a);
    save("determinism_threads3.csv", c);
    const bool pass = a == b && a == c && !a.empty();
    std::printf("criterion 11 %s  determinism  (%.1f s)\n", pass ? "PASS" : "FAIL", s);
    std::printf("    %s repeat, 1 thread: %s (%zu bytes)\n", a == b ? "pass" : "FAIL",
                a == b ? "identical" : "differs", a.size());
    std::printf("    %s 1 vs 3 threads: %s\n", a == c ? "pass" : "FAIL", a == c ? "identical" : "differs");
    if (!pass) ++failed;
  }

  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
