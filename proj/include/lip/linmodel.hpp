#pragma once

#include "lip/errors.hpp"

#include <Eigen/Dense>

#include <limits>
#include <sstream>
#include <vector>

namespace lip {

using Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct RidgeConfig {
  double lambda = 1.0;
};

template <typename Scalar>
struct FitResult {
  Mat<Scalar> weights;
  // Always false: K is factored, never inverted.
  bool gram_inverse_applied = false;
};

namespace detail {

inline void require_same_rows(Index a, Index b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": row counts differ (" << a << " vs " << b << ")";
    throw ValidationError("shape", msg.str());
  }
}

}  // namespace detail

// Cholesky factor of K = X^T X + lambda I, shared by every solve against the
// same design matrix.
template <typename Scalar = double>
class RidgeSystem {
 public:
  template <typename DX>
  RidgeSystem(const Eigen::MatrixBase<DX>& X, Scalar lambda) : lambda_(lambda) {
    if (!(lambda >= Scalar(0)))
      throw ValidationError("config", "ridge lambda must be nonnegative");
    const Index q = X.cols();
    Mat<Scalar> K = Mat<Scalar>::Zero(q, q);
    K.template selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    K.diagonal().array() += lambda;
    K.template triangularView<Eigen::StrictlyUpper>() = K.transpose();
    if (lambda == Scalar(0)) {
      Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(K, Eigen::EigenvaluesOnly);
      const Scalar lo = eig.eigenvalues().minCoeff();
      const Scalar hi = eig.eigenvalues().maxCoeff();
      const Scalar tol = std::numeric_limits<Scalar>::epsilon() * Scalar(q) * std::max(hi, Scalar(1));
      if (lo <= tol) {
        std::ostringstream msg;
        msg << "X^T X is singular at lambda = 0 (smallest eigenvalue estimate " << lo << ")";
        throw NumericalError("conditioning", msg.str());
      }
    }
    llt_.compute(K);
    if (llt_.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(K, Eigen::EigenvaluesOnly);
      std::ostringstream msg;
      msg << "K is not positive definite (smallest eigenvalue estimate "
          << eig.eigenvalues().minCoeff() << ")";
      throw NumericalError("conditioning", msg.str());
    }
    q_ = q;
  }

  Index dim() const { return q_; }
  Scalar lambda() const { return lambda_; }

  // K^{-1} B
  template <typename DB>
  Mat<Scalar> solve(const Eigen::MatrixBase<DB>& B) const {
    return llt_.solve(B);
  }

  // K^{-1} X^T Y
  template <typename DX, typename DY>
  Mat<Scalar> fit(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& Y) const {
    detail::require_same_rows(X.rows(), Y.rows(), "ridge fit");
    if (X.cols() != q_) throw ValidationError("shape", "ridge fit: feature count changed");
    Mat<Scalar> XtY = X.transpose() * Y;
    return llt_.solve(XtY);
  }

 private:
  Eigen::LLT<Mat<Scalar>> llt_;
  Scalar lambda_;
  Index q_ = 0;
};

// W minimizing ||XW - Y||_F^2 + lambda ||W||_F^2.
template <typename DX, typename DY>
FitResult<typename DX::Scalar> ridge_fit(const Eigen::MatrixBase<DX>& X,
                                         const Eigen::MatrixBase<DY>& Y, const RidgeConfig& cfg) {
  using Scalar = typename DX::Scalar;
  detail::require_same_rows(X.rows(), Y.rows(), "ridge_fit");
  RidgeSystem<Scalar> sys(X, static_cast<Scalar>(cfg.lambda));
  return {sys.fit(X, Y), false};
}

// Residual of the normal equations, ||(X^T X + lambda I) W - X^T Y||_F.
template <typename DX, typename DY, typename DW>
typename DX::Scalar normal_equation_residual(const Eigen::MatrixBase<DX>& X,
                                             const Eigen::MatrixBase<DY>& Y,
                                             const Eigen::MatrixBase<DW>& W, double lambda) {
  using Scalar = typename DX::Scalar;
  Mat<Scalar> XW = X * W;
  Mat<Scalar> r = X.transpose() * (XW - Y);
  r += Scalar(lambda) * W;
  return r.norm();
}

// Row-wise argmax of XW, lowest index on ties.
template <typename DX, typename DW>
std::vector<Index> predict(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DW>& W) {
  if (X.cols() != W.rows()) throw ValidationError("shape", "predict: X columns must equal W rows");
  using Scalar = typename DX::Scalar;
  Mat<Scalar> scores = X * W;
  std::vector<Index> out(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < scores.cols(); ++j)
      if (scores(i, j) > scores(i, best)) best = j;
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

template <typename DG>
double accuracy(const std::vector<Index>& pred, const Eigen::MatrixBase<DG>& G) {
  if (static_cast<Index>(pred.size()) != G.rows())
    throw ValidationError("shape", "accuracy: prediction count does not match label rows");
  Index hits = 0;
  for (Index i = 0; i < G.rows(); ++i) {
    Index ones = 0;
    for (Index j = 0; j < G.cols(); ++j) {
      if (G(i, j) == 1) ++ones;
      else if (G(i, j) != 0) ones = -1000;
    }
    if (ones != 1) {
      std::ostringstream msg;
      msg << "accuracy: ground-truth row " << i + 1 << " is not one-hot";
      throw ValidationError("validity", msg.str());
    }
    const Index p = pred[static_cast<std::size_t>(i)];
    if (p >= 0 && p < G.cols() && G(i, p) == 1) ++hits;
  }
  return G.rows() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(G.rows());
}

}  // namespace lip
