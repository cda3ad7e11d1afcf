// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace gifilter::oracle {

/// Exact moments of the linear SDE dX = (A X + c) dt + sigma dW over [0, t]
/// from X_0 ~ (m0, P0): mean e^{At} m0 + int_0^t e^{As} c ds and covariance
/// e^{At} P0 e^{A^T t} + int_0^t e^{As} Q e^{A^T s} ds, Q = sigma sigma^T.
/// Van Loan's block-exponential construction.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> linear_sde_moments(const Eigen::MatrixXd& A,
                                                                      const Eigen::VectorXd& c,
                                                                      const Eigen::MatrixXd& Q,
                                                                      const Eigen::VectorXd& m0,
                                                                      const Eigen::MatrixXd& P0, double t) {
  const long n = A.rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = -A * t;
  M.topRightCorner(n, n) = Q * t;
  M.bottomRightCorner(n, n) = A.transpose() * t;
  const Eigen::MatrixXd E = M.exp();
  const Eigen::MatrixXd Phi = E.bottomRightCorner(n, n).transpose();  // e^{At}
  const Eigen::MatrixXd W = Phi * E.topRightCorner(n, n);
  Eigen::MatrixXd P = Phi * P0 * Phi.transpose() + W;
  P = 0.5 * (P + P.transpose()).eval();

  Eigen::MatrixXd Ma = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Ma.topLeftCorner(n, n) = A * t;
  Ma.topRightCorner(n, 1) = c * t;
  const Eigen::MatrixXd Ea = Ma.exp();
  const Eigen::VectorXd m = Ea.topLeftCorner(n, n) * m0 + Ea.topRightCorner(n, 1);
  return {m, P};
}

}  // namespace gifilter::oracle
