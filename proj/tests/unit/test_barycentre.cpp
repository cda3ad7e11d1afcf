// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "gifilter/barycentre.hpp"
#include "gifilter/mc/order_fit.hpp"
#include "support/gen.hpp"

using namespace gifilter;
using testgen::Gen;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// Gauss-Hermite rule for E[f(N(0, 1))] (Golub-Welsch).
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  return {es.eigenvalues(), es.eigenvectors().row(0).transpose().array().square()};
}

/// E[exp_z^{-1}(exp_x(eta))] for eta ~ N(mu, Sigma), by tensor Gauss-Hermite
/// quadrature with numerically integrated exp and log: a deterministic
/// stand-in for the Monte Carlo residual.
Vec quadrature_residual(const Chart& c, const Vec& x, const Vec& mu, const Mat& S, const Vec& z) {
  const auto [nodes, w] = gauss_hermite(8);
  const Mat L = Mat(Eigen::MatrixXd(S).llt().matrixL());
  Vec r = zeros(2);
  for (int i = 0; i < nodes.size(); ++i) {
    for (int j = 0; j < nodes.size(); ++j) {
      const Vec eta = mu + L * v2(nodes(i), nodes(j));
      r += w(i) * w(j) * log_numeric(c, z, exp_numeric(c, x, eta, 256), LogOptions{256, 1e-14, 50});
    }
  }
  return r;
}

}  // namespace

TEST(ExpBarycentre, FlatIsTranslation) {
  Gen g(1);
  const Vec x = g.vec(2), mu = g.vec(2);
  EXPECT_LT((exp_barycentre(flat_chart(2), {x, mu, g.spd(2)}) - (x + mu)).norm(), 1e-15);
}

TEST(ExpBarycentre, ZeroMeanIsBase) {
  Gen g(2);
  const Vec x = g.vec(2);
  EXPECT_LT((exp_barycentre(sphere_stereo_chart(), {x, zeros(2), g.spd(2)}) - x).norm(), 1e-15);
}

TEST(ExpBarycentre, RejectsBadMoments) {
  Mat S(2, 2);
  S << 1, 0.5, 0, 1;
  EXPECT_THROW(exp_barycentre(sphere_stereo_chart(), {zeros(2), zeros(2), S}), InvalidArgument);
  EXPECT_THROW(exp_barycentre(sphere_stereo_chart(), {zeros(2), zeros(2), -identity(2)}), InvalidArgument);
}

TEST(ExpBarycentre, InvariantUnderLinearReparametrization) {
  const Chart s = sphere_stereo_chart();
  LinearReparam r;
  r.T = Mat(2, 2);
  r.T << 1.5, 0.4, -0.2, 0.7;
  r.c = v2(0.3, -0.2);
  const Chart t = reparametrize(s, r);
  Gen g(3);
  for (int k = 0; k < 10; ++k) {
    const Vec x = g.vec(2), mu = 0.2 * g.vec(2);
    const Mat S = 0.04 * g.spd(2);
    const Vec a = exp_barycentre(s, {x, mu, S});
    const Vec b = exp_barycentre(t, {r.to_new(x), r.push(mu), r.push_form(S)});
    EXPECT_LT((r.to_old(b) - a).norm(), 1e-8);
  }
}

// Sphere, mu = gamma (cos, sin), Sigma = gamma^2 * SPD: the residual at the
// corrected point is fourth order, at exp_x(mu) only third order.
TEST(ExpBarycentre, QuadratureResidualOrders) {
  const Chart c = sphere_stereo_chart();
  const Vec x = v2(0.3, -0.2);
  const Vec dir = v2(0.8, 0.6);
  Mat S0(2, 2);
  S0 << 1.0, 0.3, 0.3, 0.6;
  const std::vector<double> gs = {0.2, 0.1, 0.05};
  std::vector<double> corrected, naive;
  for (double gm : gs) {
    const Vec mu = gm * dir;
    const Mat S = gm * gm * S0;
    corrected.push_back(quadrature_residual(c, x, mu, S, exp_barycentre(c, {x, mu, S})).norm());
    naive.push_back(quadrature_residual(c, x, mu, S, exp_numeric(c, x, mu, 256)).norm());
  }
  EXPECT_GE(order_fit(gs, corrected).slope, 3.5);
  const double ns = order_fit(gs, naive).slope;
  EXPECT_GT(ns, 2.7);
  EXPECT_LE(ns, 3.3);
}

TEST(ResidualMean, TrivialCases) {
  Gen g(4);
  const Chart c = sphere_stereo_chart();
  const Vec z = v2(0.2, 0.1);
  EXPECT_LT(residual_mean(c, z, std::vector<Vec>(5, z)).norm(), 1e-15);
  std::vector<Vec> s;
  Vec mean = zeros(2);
  for (int k = 0; k < 50; ++k) {
    s.push_back(g.vec(2));
    mean += s.back() / 50.0;
  }
  EXPECT_LT((residual_mean(flat_chart(2), z, s) - (mean - z)).norm(), 1e-14);
  EXPECT_THROW(residual_mean(c, z, {}), InvalidArgument);
}

TEST(ResidualMean, ThreadCountDoesNotChangeBits) {
  Gen g(5);
  const Chart c = sphere_stereo_chart();
  std::vector<Vec> s;
  for (int k = 0; k < 5000; ++k) s.push_back(0.3 * g.vec(2));
  const LogOptions opt{32, 1e-12, 50};
  const Vec a = residual_mean(c, zeros(2), s, opt, 1);
  const Vec b = residual_mean(c, zeros(2), s, opt, 3);
  EXPECT_EQ(a(0), b(0));
  EXPECT_EQ(a(1), b(1));
}

TEST(ThirdMoment, SymmetricSamplesInFlatChart) {
  Gen g(6);
  const Chart f = flat_chart(2);
  const Vec z = v2(0.5, 0.5);
  std::vector<Vec> s;
  for (int k = 0; k < 100; ++k) {
    const Vec e = g.vec(2);
    s.push_back(z + e);
    s.push_back(z - e);
  }
  EXPECT_LT(third_moment_check(f, z, s, metric_cubic_tensor(f, z)).norm(), 1e-14);
  EXPECT_LT(third_moment_check(f, z, s, curvature_tensor(f, z)).norm(), 1e-14);
}

TEST(ThirdMoment, GaussianSamplesInFlatChart) {
  Gen g(7);
  const Chart f = flat_chart(2);
  const Vec z = zeros(2);
  std::vector<Vec> s;
  const int n = 200000;
  for (int k = 0; k < n; ++k) s.push_back(g.normal_vec(2));
  // T(e, e, e) = |e|^2 e has per-coordinate variance E[|e|^4 e_1^2] = 12
  const Vec m = third_moment_check(f, z, s, metric_cubic_tensor(f, z));
  EXPECT_LT(m.cwiseAbs().maxCoeff(), 3 * std::sqrt(12.0 / n));
}

// R(e, e) e = 0 for every e: the curvature choice is identically zero.
TEST(ThirdMoment, CurvatureOnDiagonalVanishes) {
  Gen g(8);
  const Chart c = sphere_stereo_chart();
  std::vector<Vec> s;
  for (int k = 0; k < 100; ++k) s.push_back(0.3 * g.vec(2));
  EXPECT_LT(third_moment_check(c, zeros(2), s, curvature_tensor(c, zeros(2))).norm(), 1e-15);
}
