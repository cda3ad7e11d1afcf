// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "gifilter/diffusion/flow.hpp"
#include "gifilter/diffusion/model.hpp"
#include "gifilter/diffusion/observation.hpp"
#include "gifilter/filter.hpp"

namespace gifilter::experiments {

/// A filtering problem up to the noise scale: sigma = gamma sigma0,
/// beta = gamma^2 beta0, Sigma0 = gamma^2 * sigma0_shape, delta = gamma^2 T0.
struct Scenario {
  std::string model = "warped-2d";
  Params model_params;
  std::string observation = "quadratic";
  Params observation_params;
  Vec x0;
  Mat sigma0_shape;
  double T0 = 1.0;
  int steps = 64;  // flow grid and Euler steps per prediction horizon
};

struct ScenarioAt {
  double gamma = 0.0;
  double delta = 0.0;
  InducedGeometry geom;
  ObservationMap obs;
  FilterBelief belief;
};

inline ScenarioAt scenario_at(const Scenario& s, double gamma) {
  ScenarioAt a;
  a.gamma = gamma;
  a.delta = gamma * gamma * s.T0;
  a.geom = make_model(s.model, s.model_params, gamma);
  a.obs = make_observation(s.observation, s.observation_params, a.geom.model.dim, gamma);
  a.belief = FilterBelief{s.x0, gamma * gamma * s.sigma0_shape};
  a.belief.validate(a.geom.chart);
  return a;
}

/// Builtin scenario for each builtin model, with a quadratic observation.
inline Scenario default_scenario(const std::string& model) {
  Scenario s;
  s.model = model;
  if (model == "scalar-exp") {
    s.x0 = Vec::Constant(1, 0.2);
    s.sigma0_shape = Mat::Constant(1, 1, 1.0);
  } else if (model == "flat-linear") {
    s.x0 = (Vec(2) << 0.5, -0.3).finished();
    s.sigma0_shape = (Mat(2, 2) << 1.0, 0.3, 0.3, 0.6).finished();
  } else if (model == "warped-2d") {
    s.x0 = (Vec(2) << 0.6, 0.4).finished();
    s.sigma0_shape = (Mat(2, 2) << 1.0, 0.3, 0.3, 0.6).finished();
  } else {
    throw InvalidArgument("default_scenario: unknown model '" + model + "'");
  }
  return s;
}

}  // namespace gifilter::experiments
