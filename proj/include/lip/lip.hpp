#pragma once

#include "lip/errors.hpp"
#include "lip/linmodel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <sstream>
#include <vector>

namespace lip {

template <typename Scalar>
struct SvdFactors {
  Mat<Scalar> U;  // q x r
  Vec<Scalar> S;  // r, descending
  Mat<Scalar> V;  // l x r

  Index rank() const { return S.size(); }
  Mat<Scalar> reconstruct() const { return U * S.asDiagonal() * V.transpose(); }
};

// Thin SVD with a fixed sign convention: the largest-magnitude entry of each
// right singular vector is nonnegative (lowest index wins ties), and the
// matching left vector is flipped along with it.
template <typename DW>
SvdFactors<typename DW::Scalar> svd_thin(const Eigen::MatrixBase<DW>& W) {
  using Scalar = typename DW::Scalar;
  if (!W.allFinite()) throw ValidationError("validity", "svd: matrix has non-finite entries");
  if (W.rows() < 1 || W.cols() < 1) throw ValidationError("shape", "svd: empty matrix");
  Eigen::BDCSVD<Mat<Scalar>> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors<Scalar> f{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Index c = 0; c < f.V.cols(); ++c) {
    Index at = 0;
    Scalar best = -1;
    for (Index i = 0; i < f.V.rows(); ++i) {
      const Scalar a = std::abs(f.V(i, c));
      if (a > best) {
        best = a;
        at = i;
      }
    }
    if (f.V(at, c) < 0) {
      f.V.col(c) = -f.V.col(c);
      f.U.col(c) = -f.U.col(c);
    }
  }
  return f;
}

struct LipConfig {
  Index k = 0;
};

// ceil(0.8 l), clamped to the rank bound min(q, l).
inline Index default_k(Index q, Index l) {
  const Index k = (4 * l + 4) / 5;
  return std::max<Index>(1, std::min({k, q, l}));
}

inline void validate_k(Index k, Index q, Index l) {
  if (k < 1 || k > std::min(q, l)) {
    std::ostringstream msg;
    msg << "k = " << k << " is outside [1, " << std::min(q, l) << "]";
    throw ValidationError("config", msg.str());
  }
}

template <typename Scalar>
struct PspResult {
  Mat<Scalar> W_k;
  SvdFactors<Scalar> factors;
};

// Rank-k truncation of W'.
template <typename DW>
PspResult<typename DW::Scalar> psp(const Eigen::MatrixBase<DW>& W_prime, const LipConfig& cfg) {
  validate_k(cfg.k, W_prime.rows(), W_prime.cols());
  auto f = svd_thin(W_prime);
  const Index k = cfg.k;
  Mat<typename DW::Scalar> W_k =
      f.U.leftCols(k) * f.S.head(k).asDiagonal() * f.V.leftCols(k).transpose();
  return {std::move(W_k), std::move(f)};
}

template <typename Scalar>
struct LapResult {
  Vec<Scalar> refit_tail;
  std::vector<Index> skipped_indices;  // 0-based component indices
};

// Closed-form refit of the tail singular values against (X, Y), singular
// vectors held fixed:
//   sigma_j* = u_j^T X^T (Y - X W_k) v_j / ||X u_j||^2
// Components whose denominator falls below 1e-12 ||X||_F^2 get sigma_j* = 0.
template <typename DX, typename DY, typename DK, typename Scalar>
LapResult<Scalar> lap(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& Y,
                      const Eigen::MatrixBase<DK>& W_k, const SvdFactors<Scalar>& f, Index k) {
  const Index r = f.rank();
  if (X.rows() != Y.rows() || X.cols() != f.U.rows() || Y.cols() != f.V.rows() ||
      W_k.rows() != f.U.rows() || W_k.cols() != f.V.rows())
    throw ValidationError("shape", "lap: X, Y, W_k and the factors have inconsistent shapes");
  if (k < 0 || k > r) throw ValidationError("config", "lap: k out of range");
  LapResult<Scalar> out;
  const Index t = r - k;
  out.refit_tail = Vec<Scalar>::Zero(t);
  if (t == 0) return out;

  const auto U_l = f.U.rightCols(t);
  const auto V_l = f.V.rightCols(t);
  // X [U_l, W_k V_l] in a single pass over X
  Mat<Scalar> B(f.U.rows(), 2 * t);
  B.leftCols(t) = U_l;
  B.rightCols(t) = W_k * V_l;
  Mat<Scalar> XB = X * B;
  Mat<Scalar> R = Y * V_l;
  R -= XB.rightCols(t);  // (Y - X W_k) V_l
  const Scalar eps_den = Scalar(1e-12) * X.squaredNorm();
  for (Index j = 0; j < t; ++j) {
    const Scalar den = XB.col(j).squaredNorm();
    if (den <= eps_den) {
      out.skipped_indices.push_back(k + j);
      continue;
    }
    out.refit_tail(j) = XB.col(j).dot(R.col(j)) / den;
  }
  return out;
}

template <typename Scalar>
struct LipResult {
  Mat<Scalar> W_k;
  Vec<Scalar> refit_tail;
  Mat<Scalar> W_star;
  std::vector<Index> skipped_indices;
  SvdFactors<Scalar> factors;
};

template <typename DX, typename DY, typename DW>
LipResult<typename DW::Scalar> lip_apply(const Eigen::MatrixBase<DX>& X,
                                         const Eigen::MatrixBase<DY>& Y,
                                         const Eigen::MatrixBase<DW>& W_prime,
                                         const LipConfig& cfg) {
  using Scalar = typename DW::Scalar;
  if (X.rows() != Y.rows() || X.cols() != W_prime.rows() || Y.cols() != W_prime.cols())
    throw ValidationError("shape", "lip_apply: X, Y and W' have inconsistent shapes");
  auto [W_k, f] = psp(W_prime, cfg);
  auto tail = lap(X, Y, W_k, f, cfg.k);
  const Index t = tail.refit_tail.size();
  Mat<Scalar> W_star = W_k;
  if (t > 0)
    W_star.noalias() +=
        f.U.rightCols(t) * tail.refit_tail.asDiagonal() * f.V.rightCols(t).transpose();
  return {std::move(W_k), std::move(tail.refit_tail), std::move(W_star),
          std::move(tail.skipped_indices), std::move(f)};
}

// Candidate k with the best validation accuracy, refitting the tail on
// (X_fit, Y_fit) and scoring predictions on X_val against G_val. Ties go to
// the smallest k.
template <typename D1, typename D2, typename D3, typename D4, typename DW>
Index select_k(const Eigen::MatrixBase<D1>& X_fit, const Eigen::MatrixBase<D2>& Y_fit,
               const Eigen::MatrixBase<D3>& X_val, const Eigen::MatrixBase<D4>& G_val,
               const Eigen::MatrixBase<DW>& W_prime, std::vector<Index> candidates) {
  if (candidates.empty()) throw ValidationError("config", "select_k: no candidates");
  for (Index k : candidates) validate_k(k, W_prime.rows(), W_prime.cols());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  Index best_k = candidates.front();
  double best = -1.0;
  for (Index k : candidates) {
    auto res = lip_apply(X_fit, Y_fit, W_prime, LipConfig{k});
    const double acc = accuracy(predict(X_val, res.W_star), G_val);
    if (acc > best) {
      best = acc;
      best_k = k;
    }
  }
  return best_k;
}

// Validation-set form: the tail refit uses the validation candidate labels.
template <typename D1, typename D2, typename D3, typename DW>
Index select_k(const Eigen::MatrixBase<D1>& X_val, const Eigen::MatrixBase<D2>& Y_val,
               const Eigen::MatrixBase<D3>& G_val, const Eigen::MatrixBase<DW>& W_prime,
               std::vector<Index> candidates) {
  return select_k(X_val, Y_val, X_val, G_val, W_prime, std::move(candidates));
}

}  // namespace lip
