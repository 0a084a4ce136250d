#pragma once

#include "lip/errors.hpp"
#include "lip/linmodel.hpp"
#include "lip/lip.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace lip {

struct SpectrumReport {
  std::vector<std::string> labels;
  std::vector<Eigen::VectorXd> spectra;
  std::vector<double> accuracies;
};

struct SimilarityGrid {
  Index i_max = 0;
  Index j_max = 0;
  Eigen::MatrixXd phi;  // phi(i-1, j-1) = similarity of top-i vs top-j
};

struct BoundReport {
  double delta_w_frob = 0;
  double delta_w_spec = 0;
  double frob_bound = 0;
  double sin_theta_measured = 0;
  double sin_theta_bound = 0;  // composed form, frob_bound / delta_gap
  double spectral_sin_theta_bound = 0;  // delta_w_spec / delta_gap
  double delta_gap = 0;
  double p_used = 0;
  double sigma_max_X = 0;
  double lambda_min_gram = 0;
  Index k = 0;
};

template <typename DW>
Vec<typename DW::Scalar> spectrum(const Eigen::MatrixBase<DW>& W) {
  using Scalar = typename DW::Scalar;
  if (!W.allFinite()) throw ValidationError("validity", "spectrum: matrix has non-finite entries");
  Eigen::BDCSVD<Mat<Scalar>> svd(W);
  return svd.singularValues();
}

// Largest |V^T V - I| entry.
template <typename DV>
typename DV::Scalar orthonormality_deviation(const Eigen::MatrixBase<DV>& V) {
  using Scalar = typename DV::Scalar;
  Mat<Scalar> G = V.transpose() * V;
  G.diagonal().array() -= Scalar(1);
  return G.cwiseAbs().maxCoeff();
}

template <typename DV>
void require_orthonormal(const Eigen::MatrixBase<DV>& V, const char* what, double tol = 1e-8) {
  if (V.cols() == 0) return;
  const double dev = static_cast<double>(orthonormality_deviation(V));
  if (!(dev <= tol)) {
    std::ostringstream msg;
    msg << what << ": columns are not orthonormal (max deviation " << dev << ")";
    throw ValidationError("validity", msg.str());
  }
}

// ||V_{:i}^T V'_{:j}||_F^2 / min(i, j)
template <typename D1, typename D2>
double subspace_similarity(const Eigen::MatrixBase<D1>& V, const Eigen::MatrixBase<D2>& V_prime,
                           Index i, Index j) {
  if (V.rows() != V_prime.rows())
    throw ValidationError("shape", "subspace_similarity: bases live in different dimensions");
  if (i < 1 || j < 1 || i > V.cols() || j > V_prime.cols())
    throw ValidationError("config", "subspace_similarity: i or j out of range");
  require_orthonormal(V, "subspace_similarity V");
  require_orthonormal(V_prime, "subspace_similarity V'");
  const double num = (V.leftCols(i).transpose() * V_prime.leftCols(j)).squaredNorm();
  return num / static_cast<double>(std::min(i, j));
}

// All cells at once from prefix sums of the squared cross-Gram entries.
template <typename D1, typename D2>
SimilarityGrid similarity_grid(const Eigen::MatrixBase<D1>& V, const Eigen::MatrixBase<D2>& V_prime,
                               Index i_max, Index j_max) {
  if (V.rows() != V_prime.rows())
    throw ValidationError("shape", "similarity_grid: bases live in different dimensions");
  if (i_max < 1 || j_max < 1 || i_max > V.cols() || j_max > V_prime.cols())
    throw ValidationError("config", "similarity_grid: i_max or j_max out of range");
  require_orthonormal(V, "similarity_grid V");
  require_orthonormal(V_prime, "similarity_grid V'");
  Eigen::MatrixXd C = (V.leftCols(i_max).transpose() * V_prime.leftCols(j_max))
                          .template cast<double>()
                          .array()
                          .square()
                          .matrix();
  SimilarityGrid g{i_max, j_max, Eigen::MatrixXd::Zero(i_max, j_max)};
  for (Index i = 0; i < i_max; ++i)
    for (Index j = 0; j < j_max; ++j) {
      double s = C(i, j);
      if (i > 0) s += g.phi(i - 1, j);
      if (j > 0) s += g.phi(i, j - 1);
      if (i > 0 && j > 0) s -= g.phi(i - 1, j - 1);
      g.phi(i, j) = s;
    }
  for (Index i = 0; i < i_max; ++i)
    for (Index j = 0; j < j_max; ++j) g.phi(i, j) /= static_cast<double>(std::min(i, j) + 1);
  return g;
}

// Delta W = K^{-1} X^T M. G is only used to check shapes and M + G >= 0.
template <typename DX, typename DG, typename DM>
Mat<typename DX::Scalar> perturbation_delta(const Eigen::MatrixBase<DX>& X,
                                            const Eigen::MatrixBase<DG>& G,
                                            const Eigen::MatrixBase<DM>& M, double lambda) {
  using Scalar = typename DX::Scalar;
  if (G.rows() != M.rows() || G.cols() != M.cols() || X.rows() != M.rows())
    throw ValidationError("shape", "perturbation_delta: X, G and M have inconsistent shapes");
  if (((G + M).array() < 0).any())
    throw ValidationError("validity", "perturbation_delta: mask violates M + G >= 0");
  RidgeSystem<Scalar> sys(X, static_cast<Scalar>(lambda));
  return sys.fit(X, M);
}

struct GramExtremes {
  double sigma_max = 0;   // largest singular value of X
  double lambda_min = 0;  // smallest eigenvalue of X^T X, zero when n < q
};

template <typename DX>
GramExtremes gram_extremes(const Eigen::MatrixBase<DX>& X) {
  using Scalar = typename DX::Scalar;
  Eigen::BDCSVD<Mat<Scalar>> svd(X);
  const auto& s = svd.singularValues();
  GramExtremes e;
  e.sigma_max = s.size() ? static_cast<double>(s(0)) : 0.0;
  if (X.rows() >= X.cols() && s.size()) {
    Mat<Scalar> K = X.transpose() * X;
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(K, Eigen::EigenvaluesOnly);
    e.lambda_min = std::max(0.0, static_cast<double>(eig.eigenvalues()(0)));
  }
  return e;
}

inline double frobenius_bound(const GramExtremes& e, double lambda, double p, Index n, Index l) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("config", "frobenius_bound: p outside [0, 1]");
  return e.sigma_max * std::sqrt(static_cast<double>(n) * static_cast<double>(l)) /
         (e.lambda_min + lambda) * std::sqrt(p);
}

// sigma_max(X) sqrt(n l) sqrt(p) / (lambda_min(X^T X) + lambda)
template <typename DX>
double frobenius_bound(const Eigen::MatrixBase<DX>& X, double lambda, double p, Index n, Index l) {
  return frobenius_bound(gram_extremes(X), lambda, p, n, l);
}

// Sine of the largest principal angle between span(V_k) and span(V'_k),
// taken as ||(I - V' V'^T) V||_2, which equals sqrt(1 - s_min^2) of V^T V'
// but keeps full relative accuracy at small angles.
template <typename D1, typename D2>
double sin_theta(const Eigen::MatrixBase<D1>& V_k, const Eigen::MatrixBase<D2>& V_prime_k) {
  using Scalar = typename D1::Scalar;
  if (V_k.rows() != V_prime_k.rows() || V_k.cols() != V_prime_k.cols() || V_k.cols() < 1)
    throw ValidationError("shape", "sin_theta: bases must have the same nonempty shape");
  require_orthonormal(V_k, "sin_theta V_k");
  require_orthonormal(V_prime_k, "sin_theta V'_k");
  Mat<Scalar> R = V_k - V_prime_k * (V_prime_k.transpose() * V_k);
  Eigen::JacobiSVD<Mat<Scalar>> svd(R);
  const double s = static_cast<double>(svd.singularValues()(0));
  return std::clamp(s, 0.0, 1.0);
}

// ||Delta W||_2 / delta, not capped at one.
inline double davis_kahan_bound(double delta_w_spec, double delta_gap) {
  if (!(delta_gap > 0.0)) {
    std::ostringstream msg;
    msg << "spectral gap must be positive, got " << delta_gap;
    throw NumericalError("gap", msg.str());
  }
  return delta_w_spec / delta_gap;
}

// sigma_k - sigma_{k+1} of a descending spectrum, sigma_{r+1} = 0.
inline double spectral_gap(const Eigen::VectorXd& s, Index k) {
  if (k < 1 || k > s.size()) throw ValidationError("config", "spectral_gap: k out of range");
  return s(k - 1) - (k < s.size() ? s(k) : 0.0);
}

// Bound report for clean weights W = ridge(X, G) and W' = ridge(X, G + M).
// A nonpositive gap leaves both sin-theta bounds at NaN.
template <typename DX, typename DG, typename DM>
BoundReport bound_report(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DG>& G,
                         const Eigen::MatrixBase<DM>& M, double lambda, Index k, double p_used,
                         double gap_override = std::numeric_limits<double>::quiet_NaN()) {
  RidgeSystem<double> sys(X, lambda);
  if (G.rows() != M.rows() || G.cols() != M.cols() || X.rows() != M.rows())
    throw ValidationError("shape", "bound_report: X, G and M have inconsistent shapes");
  Eigen::MatrixXd W = sys.fit(X, G);
  Eigen::MatrixXd dW = sys.fit(X, M);
  Eigen::MatrixXd Wp = W + dW;
  validate_k(k, W.rows(), W.cols());

  BoundReport b;
  b.k = k;
  b.p_used = p_used;
  b.delta_w_frob = dW.norm();
  b.delta_w_spec = spectrum(dW)(0);
  auto e = gram_extremes(X);
  b.sigma_max_X = e.sigma_max;
  b.lambda_min_gram = e.lambda_min;
  b.frob_bound = frobenius_bound(e, lambda, p_used, X.rows(), G.cols());
  auto f = svd_thin(W);
  auto fp = svd_thin(Wp);
  b.sin_theta_measured = sin_theta(f.V.leftCols(k), fp.V.leftCols(k));
  b.delta_gap = std::isnan(gap_override) ? spectral_gap(f.S, k) : gap_override;
  if (b.delta_gap > 0.0) {
    b.spectral_sin_theta_bound = davis_kahan_bound(b.delta_w_spec, b.delta_gap);
    b.sin_theta_bound = b.frob_bound / b.delta_gap;
  } else {
    b.spectral_sin_theta_bound = std::numeric_limits<double>::quiet_NaN();
    b.sin_theta_bound = std::numeric_limits<double>::quiet_NaN();
  }
  return b;
}

}  // namespace lip
