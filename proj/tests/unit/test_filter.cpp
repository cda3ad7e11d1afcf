// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "gifilter/filter.hpp"
#include "gifilter/mc/rng.hpp"
#include "gifilter/oracle/lyapunov.hpp"
#include "support/gen.hpp"

using namespace gifilter;
using testgen::Gen;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// PredictState with only the pieces gain() and update() read.
PredictState synthetic_prediction(const Mat& Xi, const Mat& J, const Mat& beta) {
  PredictState s;
  s.bundle.x = {zeros(static_cast<int>(Xi.rows()))};
  s.bundle.tau0t = {identity(static_cast<int>(Xi.rows()))};
  s.bundle.taut0 = s.bundle.tau0t;
  s.bundle.Pi = {Xi};
  s.bundle.Xi_delta = Xi;
  s.J = J;
  s.beta_delta = beta;
  s.ailp_state = zeros(static_cast<int>(Xi.rows()));
  s.ailp_obs = zeros(static_cast<int>(J.rows()));
  s.flow_sff = Bilinear(static_cast<int>(Xi.rows()), static_cast<int>(Xi.rows()));
  s.psi_sff = Bilinear(static_cast<int>(J.rows()), static_cast<int>(Xi.rows()));
  return s;
}

/// Textbook Kalman filter for dX = (A X + c) dt + sigma dW observed through
/// y = H x + c_obs + N(0, R) at the end of each interval.
struct Kalman {
  Mat A, Q, H, R;
  Vec c, c_obs;
  Vec x;
  Mat P;

  void step(double delta, const Vec& y) {
    const auto [m, cov] = oracle::linear_sde_moments(A, c, Q, x, P, delta);
    const Mat S = H * Mat(cov) * H.transpose() + R;
    const Mat K = Mat(cov) * H.transpose() * S.inverse();
    x = Vec(m) + K * (y - H * Vec(m) - c_obs);
    P = Mat(cov) - K * H * Mat(cov);
  }
};

}  // namespace

TEST(Gain, ScalarKalmanGain) {
  for (double s : {0.1, 1.0, 3.0}) {
    for (double r : {0.01, 1.0}) {
      const Mat G = gain(synthetic_prediction(s * identity(2), identity(2), r * identity(2)));
      EXPECT_LT((G - s / (s + r) * identity(2)).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(Gain, UninformativeObservation) {
  Gen g(1);
  const Mat G = gain(synthetic_prediction(g.spd(2), g.mat(1, 2), 1e12 * identity(1)));
  EXPECT_LT(G.cwiseAbs().maxCoeff(), 1e-10);
}

// Joint (U_delta, Z_delta) ~ N(0, [[Xi, Xi J^T], [J Xi, J Xi J^T + beta]]):
// the gain is the regression coefficient of U on Z.
TEST(Gain, MatchesConditionalGaussianOfJoint) {
  Gen g(2);
  for (int t = 0; t < 20; ++t) {
    const int p = 2, q = 1 + t % 2;
    const Mat Xi = g.spd(p), J = g.mat(q, p), beta = g.spd(q, 0.1, 1.0);
    const PredictState s = synthetic_prediction(Xi, J, beta);
    const Mat G = gain(s);
    const Mat A = J * Xi;
    const Mat S = J * Xi * J.transpose() + beta;
    QuadraticGaussianModel m{Xi, A, S, A, Xi, zeros(q), zeros(p), Bilinear(p, p), Bilinear(q, p)};
    EXPECT_LT((G - gain_matrix(A, S)).cwiseAbs().maxCoeff(), 1e-12);
    const Vec z = g.vec(q);
    EXPECT_LT((G * z - conditional_gaussian(Xi, A, S, z, zeros(q)).first).norm(), 1e-12);
    // Var(U | Z) from the Gaussian conditional is the posterior (I - G J) Xi
    const Mat post = symmetrized((identity(p) - G * J) * Xi);
    EXPECT_LT((post - approx_conditional_var(m)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((post - (Xi - Xi * J.transpose() * S.inverse() * J * Xi)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Update, PosteriorNotAbovePrior) {
  Gen g(3);
  for (int t = 0; t < 20; ++t) {
    const InducedGeometry geom = make_model("warped-2d", {}, 0.2);
    const PredictState s = synthetic_prediction(g.spd(2), g.mat(1, 2), g.spd(1, 0.1, 1.0));
    const UpdateResult u = update(s, geom, g.vec(1));
    EXPECT_LT((u.Sigma_hat - u.Sigma_hat.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE(is_psd(Eigen::MatrixXd(s.Xi() - u.Sigma_hat), 1e-12));
  }
}

TEST(Update, ZeroInnovation) {
  const InducedGeometry geom = make_model("warped-2d", {}, 0.2);
  const ObservationMap obs = make_observation("quadratic", {}, 2, 0.2);
  const FilterBelief b{v2(0.4, -0.3), 0.04 * identity(2)};
  const PredictState s = predict(geom, obs, b, 0.04, 128);
  const UpdateResult u = update(s, geom, zeros(1));
  EXPECT_LT((u.mu_hat - (s.ailp_state - u.rho_bar)).norm(), 1e-15);
  EXPECT_GT(u.rho_bar.norm(), 0.0);
}

TEST(Update, InnovationOfLocationParameterIsZero) {
  const InducedGeometry geom = make_model("warped-2d", {}, 0.2);
  const ObservationMap obs = make_observation("quadratic", {}, 2, 0.2);
  const PredictState s = predict(geom, obs, FilterBelief{v2(0.4, -0.3), 0.04 * identity(2)}, 0.04, 128);
  const Vec y1 = s.y_delta + s.ailp_obs;  // flat M: exp is addition
  EXPECT_LT(innovation(s, obs, y1).norm(), 1e-15);
  const Vec y2 = v2(0.7, 0).head(1);
  EXPECT_NEAR(innovation(s, obs, y2)(0), y2(0) - s.y_delta(0) - s.ailp_obs(0), 1e-15);
}

TEST(Predict, SmallHorizonLimit) {
  const InducedGeometry geom = make_model("warped-2d", {}, 0.3);
  const ObservationMap obs = make_observation("quadratic", {}, 2, 0.3);
  const FilterBelief b{v2(0.5, 0.1), 0.09 * identity(2)};
  const PredictState s = predict(geom, obs, b, 1e-8, 1);
  EXPECT_LT((s.Xi() - b.Sigma0).cwiseAbs().maxCoeff(), 1e-6);
  // both location parameters shrink to their Sigma0 parts; the state one to 0
  EXPECT_LT(s.ailp_state.norm(), 1e-6);
  EXPECT_LT((s.ailp_obs - 0.5 * s.psi_sff.contract(b.Sigma0)).norm(), 1e-6);
}

TEST(Predict, FlatLinearMatchesLyapunov) {
  const InducedGeometry geom = make_model("flat-linear", {}, 0.3);
  const ObservationMap obs = make_observation("linear", {}, 2, 0.3);
  const FilterBelief b{v2(0.5, 0.1), 0.09 * identity(2)};
  const PredictState s = predict(geom, obs, b, 0.09, 256);
  Mat A(2, 2), S(2, 2);
  A << -0.5, 1, -1, -0.5;
  S << 1, 0, 0.3, 0.8;
  const auto [m, P] = oracle::linear_sde_moments(A, Eigen::Vector2d::Zero(), 0.09 * S * S.transpose(), b.base,
                                                 b.Sigma0, 0.09);
  EXPECT_LT((s.x_delta() - Vec(m)).norm(), 1e-12);
  EXPECT_LT((s.Xi() - Mat(P)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(s.ailp_state.norm() + s.ailp_obs.norm(), 1e-15);
}

// Intrinsic filter, EKF and Kalman over 20 steps on a flat linear scenario.
TEST(FilterRecursion, FlatLinearReducesToKalman) {
  const double gm = 0.3, delta = 0.2;
  const InducedGeometry geom = make_model("flat-linear", {{"c1", 0.2}}, gm);
  const ObservationMap obs = make_observation("linear", {{"c", 0.1}}, 2, gm);
  Kalman kf;
  kf.A.resize(2, 2);
  kf.A << -0.5, 1, -1, -0.5;
  Mat S(2, 2);
  S << 1, 0, 0.3, 0.8;
  kf.Q = gm * gm * S * S.transpose();
  kf.H = Mat(1, 2);
  kf.H << 1, 0.5;
  kf.R = gm * gm * identity(1);
  kf.c = v2(0.2, 0);
  kf.c_obs = Vec::Constant(1, 0.1);
  kf.x = v2(0.5, -0.5);
  kf.P = 0.05 * identity(2);
  FilterBelief b{kf.x, kf.P};
  EkfState ekf{kf.x, kf.P};
  NormalStream rng(3, 0, 99);
  for (int k = 0; k < 20; ++k) {
    const Vec y = Vec::Constant(1, 0.3 * std::sin(k) + 0.2 * rng.normal());
    kf.step(delta, y);
    const FilterStep st = filter_step(geom, obs, b, delta, y, 512);
    b = st.next;
    ekf = ekf_update(ekf_predict(geom.model, ekf.x, ekf.P, delta, 512), obs, y);
    EXPECT_LT((b.base - kf.x).cwiseAbs().maxCoeff(), 1e-10) << k;
    EXPECT_LT((b.Sigma0 - kf.P).cwiseAbs().maxCoeff(), 1e-10) << k;
    EXPECT_LT((ekf.x - kf.x).cwiseAbs().maxCoeff(), 1e-10) << k;
    EXPECT_LT((ekf.P - kf.P).cwiseAbs().maxCoeff(), 1e-10) << k;
  }
}

TEST(FilterRecursion, CurvedModelDiffersFromEkf) {
  const double gm = 0.2;
  const InducedGeometry geom = make_model("warped-2d", {}, gm);
  const ObservationMap obs = make_observation("quadratic", {}, 2, gm);
  const FilterBelief b{v2(0.6, 0.4), gm * gm * identity(2)};
  const double delta = gm * gm;
  const Vec y = Vec::Constant(1, 1.0);
  const FilterStep st = filter_step(geom, obs, b, delta, y, 256);
  const EkfState e = ekf_update(ekf_predict(geom.model, b.base, b.Sigma0, delta, 256), obs, y);
  const double d = (st.next.base - e.x).norm();
  EXPECT_GT(d, 1e-6);
  EXPECT_LT(d, 10 * gm * gm);
}

TEST(Recenter, TrivialCases) {
  Gen g(4);
  const Vec mu = 0.1 * g.vec(2);
  const Mat S = 0.01 * g.spd(2);
  EXPECT_LT((recenter(flat_chart(2), v2(0.3, 0.2), mu, S) - (v2(0.3, 0.2) + mu)).norm(), 1e-15);
  const Chart c = sphere_stereo_chart();
  EXPECT_LT((recenter(c, v2(0.3, 0.2), zeros(2), S) - v2(0.3, 0.2)).norm(), 1e-15);
  EXPECT_GT((recenter(c, v2(0.3, 0.2), mu, S) - exp_taylor(c, v2(0.3, 0.2), mu)).norm(), 0.0);
}

TEST(TransportCovariance, IdentityForZeroStepAndPreservesMetric) {
  Gen g(5);
  const Chart c = sphere_stereo_chart();
  const Mat S = 0.01 * g.spd(2);
  const Vec x = v2(0.3, 0.2);
  EXPECT_LT((transport_covariance(c, x, zeros(2), S) - S).norm(), 1e-15);
  // parallel transport is an isometry: g-traces of Sigma are preserved
  const Vec v = v2(0.2, -0.1);
  const Mat T = transport_covariance(c, x, v, S);
  const Vec x1 = exp_numeric(c, x, v, 256);
  EXPECT_NEAR((c.g(x1) * T).trace(), (c.g(x) * S).trace(), 1e-10);
}

TEST(Innovation, SphereValuedRoundTrip) {
  const Chart c = sphere_stereo_chart();
  Gen g(6);
  for (int t = 0; t < 10; ++t) {
    const Vec y = g.vec(2), v = 0.3 * g.vec(2);
    const Vec y1 = exp_numeric(c, y, v, 2048);
    EXPECT_LT((log_map(c, y, y1, LogOptions{2048, 1e-13, 50}) - v).norm(), 1e-10);
  }
}

TEST(Innovation, SphereObservationOfLocationParameterIsZero) {
  const double gm = 0.2;
  const InducedGeometry geom = make_model("warped-2d", {}, gm);
  ObservationMap obs = make_observation("identity", {}, 2, gm);
  obs.chart_M = sphere_stereo_chart();
  const PredictState s = predict(geom, obs, FilterBelief{v2(0.4, -0.3), gm * gm * identity(2)}, gm * gm, 128);
  const Vec y1 = exp_numeric(obs.chart_M, s.y_delta, s.ailp_obs, 2048);
  EXPECT_LT(innovation(s, obs, y1, LogOptions{2048, 1e-13, 50}).norm(), 1e-10);
}

TEST(Ekf, PredictMatchesLyapunovOnLinearModel) {
  Gen g(7);
  const Mat A = g.mat(2, 2), s = g.mat(2, 2) + 1.5 * identity(2);
  const Vec c = g.vec(2);
  const InducedGeometry geom = flat_linear_model(A, c, s, 0.4);
  const EkfState e = ekf_predict(geom.model, v2(0.1, 0.2), 0.02 * identity(2), 0.7, 512);
  const auto [m, P] = oracle::linear_sde_moments(A, c, 0.16 * s * s.transpose(), v2(0.1, 0.2), 0.02 * identity(2), 0.7);
  EXPECT_LT((e.x - Vec(m)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((e.P - Mat(P)).cwiseAbs().maxCoeff(), 1e-10);
}
