// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gifilter/core/errors.hpp"

namespace gifilter {

// Geometry lives in small charts. Runtime-sized vectors with a fixed
// capacity keep everything on the stack in the inner loops.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline Vec zeros(int n) { return Vec::Zero(n); }
inline Mat identity(int n) { return Mat::Identity(n, n); }

inline Vec basis(int n, int i) {
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

inline void require_dim(long got, long want, const char* what) {
  if (got != want) {
    throw InvalidArgument(std::string(what) + ": dimension " + std::to_string(got) + ", expected " +
                          std::to_string(want));
  }
}

template <class Derived>
auto symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return (0.5 * (m + m.transpose())).eval();
}

/// Ratio of extreme eigenvalues of a symmetric matrix; +inf when the
/// smallest is not positive.
template <class M>
double spd_condition(const M& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(symmetrized(s)),
                                                    Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev.size() == 0) return 1.0;
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

/// Solves S X = B for symmetric positive-definite S by Cholesky.
/// Throws SingularMatrixError when S is not SPD or its condition number
/// exceeds max_cond.
template <class MS, class MB>
auto spd_solve(const MS& s, const MB& b, double max_cond = 1e12, const char* what = "spd_solve") {
  using Plain = typename MS::PlainObject;
  const double cond = spd_condition(s);
  if (!(cond <= max_cond)) {
    throw SingularMatrixError(std::string(what) + ": matrix singular or ill-conditioned (cond " +
                              std::to_string(cond) + ")");
  }
  Eigen::LLT<Plain> llt(symmetrized(s));
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError(std::string(what) + ": Cholesky factorization failed");
  }
  return llt.solve(b).eval();
}

/// Lower Cholesky-type factor L with L L^T = C for a symmetric PSD matrix.
/// Falls back to an eigen-decomposition square root when C is singular.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& c) {
  Eigen::MatrixXd cs = symmetrized(c);
  Eigen::LLT<Eigen::MatrixXd> llt(cs);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cs);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

inline bool is_psd(const Eigen::MatrixXd& c, double tol = 1e-12) {
  if (c.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(c), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

/// Symmetric bilinear map R^in x R^in -> R^out, stored as one symmetric
/// in x in matrix per output coordinate. Used for connectors, second
/// fundamental forms and the quadratic terms of the conditional-mean formulas.
class Bilinear {
 public:
  Bilinear() = default;
  Bilinear(int out, int in) : forms_(static_cast<size_t>(out), Mat::Zero(in, in)), in_(in) {
    if (out > kMaxDim || in > kMaxDim) throw InvalidArgument("Bilinear: dimension exceeds kMaxDim");
  }

  int out_dim() const { return static_cast<int>(forms_.size()); }
  int in_dim() const { return in_; }

  Mat& form(int k) { return forms_[static_cast<size_t>(k)]; }
  const Mat& form(int k) const { return forms_[static_cast<size_t>(k)]; }

  template <class A, class B>
  Vec operator()(const A& u, const B& v) const {
    Vec r(out_dim());
    for (int k = 0; k < out_dim(); ++k) r(k) = u.dot(form(k) * v);
    return r;
  }

  /// Trace pairing with a (covariance) matrix: k-th entry is sum_ij B^k_ij C_ij.
  template <class M>
  Vec contract(const M& c) const {
    Vec r(out_dim());
    for (int k = 0; k < out_dim(); ++k) r(k) = form(k).cwiseProduct(c).sum();
    return r;
  }

  /// (u, v) -> B(A u, A v); A maps R^n -> R^in.
  template <class M>
  Bilinear pullback(const M& a) const {
    Bilinear r(out_dim(), static_cast<int>(a.cols()));
    for (int k = 0; k < out_dim(); ++k) r.form(k) = a.transpose() * form(k) * a;
    return r;
  }

  /// (u, v) -> L B(u, v); L maps R^out -> R^m.
  template <class M>
  Bilinear compose_left(const M& l) const {
    Bilinear r(static_cast<int>(l.rows()), in_);
    for (int m = 0; m < l.rows(); ++m) {
      for (int k = 0; k < out_dim(); ++k) r.form(m) += l(m, k) * form(k);
    }
    return r;
  }

  Bilinear& operator+=(const Bilinear& o) {
    for (int k = 0; k < out_dim(); ++k) form(k) += o.form(k);
    return *this;
  }
  Bilinear& operator-=(const Bilinear& o) {
    for (int k = 0; k < out_dim(); ++k) form(k) -= o.form(k);
    return *this;
  }
  Bilinear& operator*=(double s) {
    for (auto& f : forms_) f *= s;
    return *this;
  }
  friend Bilinear operator+(Bilinear a, const Bilinear& b) { return a += b; }
  friend Bilinear operator-(Bilinear a, const Bilinear& b) { return a -= b; }
  friend Bilinear operator*(double s, Bilinear a) { return a *= s; }

  void symmetrize() {
    for (auto& f : forms_) f = symmetrized(f);
  }

 private:
  std::vector<Mat> forms_;
  int in_ = 0;
};

}  // namespace gifilter
