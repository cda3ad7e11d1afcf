// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>

#include "gifilter/core/types.hpp"

namespace gifilter {

/// X = Z + lambda(U, U), Y = V + theta(U, U) with (U, V) and (Z, V) jointly
/// Gaussian, E[U] = 0.
struct QuadraticGaussianModel {
  Mat Q;     // Var U          (p x p)
  Mat A;     // Cov(V, U)      (q x p)
  Mat S;     // Var V          (q x q)
  Mat C;     // Cov(V, Z)      (q x r)
  Mat Rcov;  // Var Z          (r x r)
  Vec muV;
  Vec muZ;
  Bilinear lambda;  // R^p x R^p -> R^r
  Bilinear theta;   // R^p x R^p -> R^q

  int p() const { return static_cast<int>(Q.rows()); }
  int q() const { return static_cast<int>(S.rows()); }
  int r() const { return static_cast<int>(Rcov.rows()); }

  void validate() const {
    const int p_ = p(), q_ = q(), r_ = r();
    require_dim(Q.cols(), p_, "QuadraticGaussianModel Q");
    require_dim(A.rows(), q_, "QuadraticGaussianModel A rows");
    require_dim(A.cols(), p_, "QuadraticGaussianModel A cols");
    require_dim(S.cols(), q_, "QuadraticGaussianModel S");
    require_dim(C.rows(), q_, "QuadraticGaussianModel C rows");
    require_dim(C.cols(), r_, "QuadraticGaussianModel C cols");
    require_dim(Rcov.cols(), r_, "QuadraticGaussianModel Rcov");
    require_dim(muV.size(), q_, "QuadraticGaussianModel muV");
    require_dim(muZ.size(), r_, "QuadraticGaussianModel muZ");
    require_dim(lambda.out_dim(), r_, "QuadraticGaussianModel lambda out");
    require_dim(lambda.in_dim(), p_, "QuadraticGaussianModel lambda in");
    require_dim(theta.out_dim(), q_, "QuadraticGaussianModel theta out");
    require_dim(theta.in_dim(), p_, "QuadraticGaussianModel theta in");
    const double tol = 1e-12;
    Eigen::MatrixXd uv(p_ + q_, p_ + q_);
    uv << Q, A.transpose(), A, S;
    Eigen::MatrixXd zv(r_ + q_, r_ + q_);
    zv << Rcov, C.transpose(), C, S;
    const double su = std::max(1.0, uv.cwiseAbs().maxCoeff()), sz = std::max(1.0, zv.cwiseAbs().maxCoeff());
    if (!is_psd(uv, tol * su)) throw InvalidArgument("QuadraticGaussianModel: joint (U, V) covariance not PSD");
    if (!is_psd(zv, tol * sz)) throw InvalidArgument("QuadraticGaussianModel: joint (Z, V) covariance not PSD");
    auto sym = [&](const Bilinear& b, const char* what) {
      for (int k = 0; k < b.out_dim(); ++k) {
        if ((b.form(k) - b.form(k).transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, b.form(k).cwiseAbs().maxCoeff())) {
          throw InvalidArgument(std::string("QuadraticGaussianModel: ") + what + " not symmetric");
        }
      }
    };
    sym(lambda, "lambda");
    sym(theta, "theta");
    if (!(spd_condition(S) <= 1e12)) throw SingularMatrixError("QuadraticGaussianModel: S singular or ill-conditioned");
  }

  Vec mean_x() const { return muZ + lambda.contract(Q); }
  Vec mean_y() const { return muV + theta.contract(Q); }
};

/// Mean and covariance of U given V = v.
inline std::pair<Vec, Mat> conditional_gaussian(const Mat& Q, const Mat& A, const Mat& S, const Vec& v,
                                                const Vec& muV) {
  require_dim(A.rows(), S.rows(), "conditional_gaussian A");
  require_dim(A.cols(), Q.rows(), "conditional_gaussian A");
  require_dim(v.size(), S.rows(), "conditional_gaussian v");
  const Mat SinvA = spd_solve(S, A, 1e12, "conditional_gaussian");
  const Vec m = SinvA.transpose() * (v - muV);
  return {m, symmetrized(Q - A.transpose() * SinvA)};
}

/// G = C^T S^{-1}.
inline Mat gain_matrix(const Mat& C, const Mat& S) {
  return spd_solve(S, C, 1e12, "gain_matrix").transpose();
}

/// rho(y, y) = (lambda - G theta)(H y, H y) with H = A^T S^{-1}, as a
/// bilinear map on R^q.
inline Bilinear quadratic_correction(const QuadraticGaussianModel& m) {
  const Mat G = gain_matrix(m.C, m.S);
  const Mat H = gain_matrix(m.A, m.S);
  return (m.lambda - m.theta.compose_left(G)).pullback(H);
}

/// W = E[X] + G Yhat + rho(Yhat, Yhat) - E[rho(Yhat, Yhat)], Yhat = y - E[Y],
/// with the coefficients computed once. The expectation uses Var(Yhat) = S
/// to leading order.
struct ConditionalMeanApprox {
  Vec mean_x, mean_y;
  Mat G;
  Bilinear rho;
  Vec rho_mean;

  explicit ConditionalMeanApprox(const QuadraticGaussianModel& m)
      : mean_x(m.mean_x()), mean_y(m.mean_y()), G(gain_matrix(m.C, m.S)), rho(quadratic_correction(m)),
        rho_mean(rho.contract(m.S)) {
    m.validate();
  }

  Vec operator()(const Vec& y) const {
    require_dim(y.size(), mean_y.size(), "approx_conditional_mean y");
    const Vec yh = y - mean_y;
    return mean_x + G * yh + rho(yh, yh) - rho_mean;
  }
};

inline Vec approx_conditional_mean(const QuadraticGaussianModel& m, const Vec& y) {
  return ConditionalMeanApprox(m)(y);
}

/// R - C^T S^{-1} C, the conditional variance in the case Z = U.
inline Mat approx_conditional_var(const QuadraticGaussianModel& m) {
  m.validate();
  return symmetrized(m.Rcov - m.C.transpose() * spd_solve(m.S, m.C, 1e12, "approx_conditional_var"));
}

}  // namespace gifilter
