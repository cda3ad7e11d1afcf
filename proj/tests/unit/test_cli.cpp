// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "config.hpp"

using namespace gifilter;
using cli::ConfigError;
using cli::json;

TEST(CliConfig, EmptyConfigGivesDefaults) {
  const auto g = cli::geometry_options(json::object());
  EXPECT_EQ(g.charts.size(), 2u);
  EXPECT_EQ(g.ladder.size(), 4u);
  const auto m = cli::mc_compare_options(json::object());
  EXPECT_EQ(m.scenario.model, "warped-2d");
  EXPECT_EQ(m.n_paths, 1000000);
}

TEST(CliConfig, UnknownKeysRejected) {
  EXPECT_THROW(cli::jacobi_options(json{{"configurations", 10}, {"extra", 1}}), ConfigError);
  EXPECT_THROW(cli::mc_compare_options(json{{"scenario", {{"model", "warped-2d"}, {"drift", 1}}}}), ConfigError);
}

TEST(CliConfig, TypesChecked) {
  EXPECT_THROW(cli::conditional_options(json{{"samples", 1.5}}), ConfigError);
  EXPECT_THROW(cli::conditional_options(json{{"samples", "many"}}), ConfigError);
  EXPECT_THROW(cli::geometry_options(json{{"seed", -1}}), ConfigError);
  EXPECT_THROW(cli::barycentre_options(json{{"cov_shape", {{1.0, 0.0}, {0.0}}}}), ConfigError);
  EXPECT_THROW(cli::geometry_options(json::array()), ConfigError);
}

TEST(CliConfig, NamesAndShapesChecked) {
  EXPECT_THROW(cli::geometry_options(json{{"charts", {"torus"}}}), ConfigError);
  EXPECT_THROW(cli::barycentre_options(json{{"base", {0.1, 0.2, 0.3}}}), ConfigError);
  EXPECT_THROW(cli::barycentre_options(json{{"chart", "poincare-half-plane"}, {"base", {0.0, -1.0}}}), ConfigError);
  EXPECT_THROW(cli::filter_run_options(json{{"scenario", {{"model", "lorenz"}}}}), ConfigError);
  EXPECT_THROW(cli::filter_run_options(json{{"scenario", {{"observation", "cubic"}}}}), ConfigError);
  EXPECT_THROW(cli::filter_run_options(json{{"scenario", {{"model_params", {{"zz", 1.0}}}}}}), ConfigError);
  EXPECT_THROW(cli::filter_run_options(json{{"scenario", {{"x0", {0.1, 0.2, 0.3, 0.4, 0.5}}}}}), ConfigError);
}

TEST(CliConfig, LadderOfLengthOneIsAFitError) {
  EXPECT_THROW(cli::mc_compare_options(json{{"ladder", {0.1}}}), ConfigError);
  EXPECT_THROW(cli::geometry_options(json{{"ladder", {0.2, 0.1}}}), ConfigError);
  EXPECT_THROW(cli::jacobi_options(json{{"ladder", {0.2, -0.1, 0.05}}}), ConfigError);
}

TEST(CliConfig, ScenarioFieldsParsed) {
  const auto o = cli::filter_run_options(json{
      {"scenario", {{"model", "flat-linear"}, {"observation", "linear"}, {"x0", {0.1, 0.2}}, {"T0", 2.0}}},
      {"gamma", 0.2},
      {"n_steps", 3}});
  EXPECT_EQ(o.scenario.model, "flat-linear");
  EXPECT_EQ(o.scenario.observation, "linear");
  EXPECT_DOUBLE_EQ(o.scenario.x0(1), 0.2);
  EXPECT_DOUBLE_EQ(o.scenario.T0, 2.0);
  EXPECT_EQ(o.n_steps, 3);
}

TEST(CliConfig, QueriesMustIncludeTheCentre) {
  EXPECT_THROW(cli::mc_compare_options(json{{"queries", {-1.0, 1.0}}}), ConfigError);
}
