// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gifilter/experiments/barycentre.hpp"
#include "gifilter/experiments/conditional.hpp"
#include "gifilter/experiments/filter.hpp"
#include "gifilter/experiments/geometry.hpp"
#include "gifilter/experiments/jacobi.hpp"

namespace gifilter::cli {

using nlohmann::json;

/// Any problem with the configuration itself: exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads one JSON object, rejecting unknown keys and wrong types.
class Obj {
 public:
  Obj(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
    for (const auto& [k, v] : j.items()) {
      if (!allowed.count(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
    }
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  const json& raw(const std::string& k) const { return j_.at(k); }
  std::string where(const std::string& k) const { return path_ + "." + k; }

  double num(const std::string& k, double def) const {
    if (!has(k)) return def;
    if (!j_[k].is_number()) throw ConfigError(where(k) + ": expected a number");
    return j_[k].get<double>();
  }

  long integer(const std::string& k, long def, long lo) const {
    if (!has(k)) return def;
    if (!j_[k].is_number_integer()) throw ConfigError(where(k) + ": expected an integer");
    const long v = j_[k].get<long>();
    if (v < lo) throw ConfigError(where(k) + ": must be >= " + std::to_string(lo));
    return v;
  }

  std::uint64_t seed(const std::string& k, std::uint64_t def) const {
    if (!has(k)) return def;
    if (!j_[k].is_number_unsigned()) throw ConfigError(where(k) + ": expected a non-negative integer");
    return j_[k].get<std::uint64_t>();
  }

  std::string str(const std::string& k, const std::string& def) const {
    if (!has(k)) return def;
    if (!j_[k].is_string()) throw ConfigError(where(k) + ": expected a string");
    return j_[k].get<std::string>();
  }

  std::vector<double> nums(const std::string& k, const std::vector<double>& def) const {
    if (!has(k)) return def;
    const json& a = j_[k];
    if (!a.is_array()) throw ConfigError(where(k) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : a) {
      if (!v.is_number()) throw ConfigError(where(k) + ": expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

  std::vector<std::string> strs(const std::string& k, const std::vector<std::string>& def) const {
    if (!has(k)) return def;
    const json& a = j_[k];
    if (!a.is_array() || a.empty()) throw ConfigError(where(k) + ": expected a non-empty array of strings");
    std::vector<std::string> out;
    for (const auto& v : a) {
      if (!v.is_string()) throw ConfigError(where(k) + ": expected an array of strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  Vec vec(const std::string& k, const Vec& def) const {
    if (!has(k)) return def;
    const std::vector<double> v = nums(k, {});
    if (v.empty() || v.size() > static_cast<size_t>(kMaxDim)) {
      throw ConfigError(where(k) + ": expected a vector of length 1.." + std::to_string(kMaxDim));
    }
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
  }

  Mat mat(const std::string& k, const Mat& def) const {
    if (!has(k)) return def;
    const json& a = j_[k];
    if (!a.is_array() || a.empty()) throw ConfigError(where(k) + ": expected a matrix (array of rows)");
    const auto rows = static_cast<long>(a.size());
    if (rows > kMaxDim) throw ConfigError(where(k) + ": too many rows");
    Mat m;
    for (long i = 0; i < rows; ++i) {
      const json& r = a[static_cast<size_t>(i)];
      if (!r.is_array() || r.empty()) throw ConfigError(where(k) + ": expected a matrix (array of rows)");
      if (i == 0) {
        if (static_cast<long>(r.size()) > kMaxDim) throw ConfigError(where(k) + ": too many columns");
        m.resize(rows, static_cast<long>(r.size()));
      }
      if (static_cast<long>(r.size()) != m.cols()) throw ConfigError(where(k) + ": ragged matrix");
      for (long c = 0; c < m.cols(); ++c) {
        if (!r[static_cast<size_t>(c)].is_number()) throw ConfigError(where(k) + ": non-numeric entry");
        m(i, c) = r[static_cast<size_t>(c)].get<double>();
      }
    }
    return m;
  }

  Params params(const std::string& k) const {
    Params p;
    if (!has(k)) return p;
    const json& o = j_[k];
    if (!o.is_object()) throw ConfigError(where(k) + ": expected an object of numbers");
    for (const auto& [name, v] : o.items()) {
      if (!v.is_number()) throw ConfigError(where(k) + "." + name + ": expected a number");
      p[name] = v.get<double>();
    }
    return p;
  }

 private:
  const json& j_;
  std::string path_;
};

inline void require_ladder(const std::vector<double>& ladder, const std::string& where) {
  if (ladder.size() < 3) throw ConfigError(where + ": a slope fit needs at least 3 ladder points");
  for (double g : ladder) {
    if (!(g > 0.0)) throw ConfigError(where + ": ladder values must be positive");
  }
}

inline void require_positive(double v, const std::string& where) {
  if (!(v > 0.0)) throw ConfigError(where + ": must be positive");
}

/// Builds the object once so that name and parameter errors surface as
/// configuration errors before any computation.
inline void require_chart(const std::string& name, const std::string& where) {
  try {
    (void)make_chart(name);
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline experiments::GeometryOptions geometry_options(const json& j) {
  const Obj o(j, "config", {"charts", "ladder", "cases", "curvature_points", "reference_steps", "seed"});
  experiments::GeometryOptions r;
  r.charts = o.strs("charts", r.charts);
  for (const auto& c : r.charts) require_chart(c, o.where("charts"));
  r.ladder = o.nums("ladder", r.ladder);
  require_ladder(r.ladder, o.where("ladder"));
  r.cases = static_cast<int>(o.integer("cases", r.cases, 1));
  r.curvature_points = static_cast<int>(o.integer("curvature_points", r.curvature_points, 1));
  r.reference_steps = static_cast<int>(o.integer("reference_steps", r.reference_steps, 1));
  r.seed = o.seed("seed", r.seed);
  return r;
}

inline experiments::JacobiOptions jacobi_options(const json& j) {
  const Obj o(j, "config", {"charts", "ladder", "configurations", "fd_eps0", "seed"});
  experiments::JacobiOptions r;
  r.charts = o.strs("charts", r.charts);
  for (const auto& c : r.charts) require_chart(c, o.where("charts"));
  r.ladder = o.nums("ladder", r.ladder);
  require_ladder(r.ladder, o.where("ladder"));
  r.configurations = static_cast<int>(o.integer("configurations", r.configurations, 1));
  r.fd.eps0 = o.num("fd_eps0", r.fd.eps0);
  require_positive(r.fd.eps0, o.where("fd_eps0"));
  r.seed = o.seed("seed", r.seed);
  return r;
}

inline experiments::BarycentreOptions barycentre_options(const json& j) {
  const Obj o(j, "config", {"chart", "base", "mean_direction", "cov_shape", "ladder", "samples", "geodesic_steps",
                            "cv_degree", "seed"});
  experiments::BarycentreOptions r;
  r.chart = o.str("chart", r.chart);
  require_chart(r.chart, o.where("chart"));
  const int p = make_chart(r.chart).dim;
  r.base = o.vec("base", r.base);
  r.mean_direction = o.vec("mean_direction", r.mean_direction);
  r.cov_shape = o.mat("cov_shape", r.cov_shape);
  if (r.base.size() != p || r.mean_direction.size() != p || r.cov_shape.rows() != p || r.cov_shape.cols() != p) {
    throw ConfigError("config: base, mean_direction and cov_shape must match the chart dimension");
  }
  if (!make_chart(r.chart).contains(r.base)) throw ConfigError("config.base: outside the chart");
  if (!is_psd(Eigen::MatrixXd(r.cov_shape), 1e-12)) throw ConfigError("config.cov_shape: not PSD");
  r.ladder = o.nums("ladder", r.ladder);
  require_ladder(r.ladder, o.where("ladder"));
  r.samples = o.integer("samples", r.samples, 2);
  r.geodesic_steps = static_cast<int>(o.integer("geodesic_steps", r.geodesic_steps, 1));
  r.cv_degree = static_cast<int>(o.integer("cv_degree", r.cv_degree, 2));
  r.seed = o.seed("seed", r.seed);
  return r;
}

inline experiments::ConditionalOptions conditional_options(const json& j) {
  const Obj o(j, "config",
              {"ladder", "samples", "lambda", "theta", "cv_degree", "bins", "bandwidth_scale", "seed"});
  experiments::ConditionalOptions r;
  r.ladder = o.nums("ladder", r.ladder);
  require_ladder(r.ladder, o.where("ladder"));
  r.samples = o.integer("samples", r.samples, 3);
  r.lambda = o.num("lambda", r.lambda);
  r.theta = o.num("theta", r.theta);
  r.cv_degree = static_cast<int>(o.integer("cv_degree", r.cv_degree, 2));
  r.bins = o.nums("bins", r.bins);
  if (r.bins.empty()) throw ConfigError("config.bins: need at least one bin");
  r.bandwidth_scale = o.num("bandwidth_scale", r.bandwidth_scale);
  require_positive(r.bandwidth_scale, o.where("bandwidth_scale"));
  r.seed = o.seed("seed", r.seed);
  return r;
}

inline experiments::Scenario scenario(const json& j, const std::string& path) {
  const Obj o(j, path, {"model", "model_params", "observation", "observation_params", "x0", "sigma0_shape", "T0",
                        "steps"});
  const std::string model = o.str("model", "warped-2d");
  experiments::Scenario s;
  try {
    s = experiments::default_scenario(model);
  } catch (const Error& e) {
    throw ConfigError(o.where("model") + ": " + e.what());
  }
  s.model_params = o.params("model_params");
  s.observation = o.str("observation", s.observation);
  s.observation_params = o.params("observation_params");
  s.x0 = o.vec("x0", s.x0);
  s.sigma0_shape = o.mat("sigma0_shape", s.sigma0_shape);
  s.T0 = o.num("T0", s.T0);
  require_positive(s.T0, o.where("T0"));
  s.steps = static_cast<int>(o.integer("steps", s.steps, 1));
  try {
    (void)experiments::scenario_at(s, 0.1);
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return s;
}

inline experiments::FilterRunOptions filter_run_options(const json& j) {
  const Obj o(j, "config", {"scenario", "gamma", "n_steps", "predict_steps", "truth_steps", "seed"});
  experiments::FilterRunOptions r;
  if (o.has("scenario")) r.scenario = scenario(o.raw("scenario"), o.where("scenario"));
  r.gamma = o.num("gamma", r.gamma);
  require_positive(r.gamma, o.where("gamma"));
  r.n_steps = static_cast<int>(o.integer("n_steps", r.n_steps, 1));
  r.predict_steps = static_cast<int>(o.integer("predict_steps", r.predict_steps, 1));
  r.truth_steps = static_cast<int>(o.integer("truth_steps", r.truth_steps, 1));
  r.seed = o.seed("seed", r.seed);
  return r;
}

inline experiments::FilterMcOptions mc_compare_options(const json& j) {
  const Obj o(j, "config", {"scenario", "ladder", "n_paths", "queries", "bandwidth_scale", "seed"});
  experiments::FilterMcOptions r;
  if (o.has("scenario")) r.scenario = scenario(o.raw("scenario"), o.where("scenario"));
  r.ladder = o.nums("ladder", r.ladder);
  require_ladder(r.ladder, o.where("ladder"));
  r.n_paths = o.integer("n_paths", r.n_paths, 1000);
  r.queries = o.nums("queries", r.queries);
  bool centre = false;
  for (double q : r.queries) centre = centre || q == 0.0;
  if (!centre) throw ConfigError("config.queries: must include 0 (the bandwidth check uses the central query)");
  r.bandwidth_scale = o.num("bandwidth_scale", r.bandwidth_scale);
  require_positive(r.bandwidth_scale, o.where("bandwidth_scale"));
  r.seed = o.seed("seed", r.seed);
  return r;
}

}  // namespace gifilter::cli
