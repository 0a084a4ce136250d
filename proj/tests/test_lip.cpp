#include "lip/errors.hpp"
#include "lip/lip.hpp"
#include "lip/noise.hpp"
#include "lip/synthetic.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace lip;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing_util::gaussian;

namespace {

double rel(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

TEST(SvdThin, DiagonalCase) {
  MatrixXd W(2, 2);
  W << 3, 0, 0, 1;
  auto f = svd_thin(W);
  EXPECT_NEAR(f.S(0), 3, 1e-15);
  EXPECT_NEAR(f.S(1), 1, 1e-15);
  EXPECT_LE((f.U - MatrixXd::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LE((f.V - MatrixXd::Identity(2, 2)).norm(), 1e-15);
}

TEST(SvdThin, ZeroMatrix) {
  auto f = svd_thin(MatrixXd::Zero(4, 3));
  EXPECT_TRUE(f.S.isZero());
  EXPECT_EQ(f.reconstruct(), MatrixXd::Zero(4, 3));
}

TEST(SvdThin, RandomResiduals) {
  testing_util::Rng rng(1);
  for (int t = 0; t < 30; ++t) {
    MatrixXd W = gaussian(8, 5, rng);
    if (t % 2) W.transposeInPlace();
    auto f = svd_thin(W);
    const Index r = f.rank();
    EXPECT_EQ(r, 5);
    EXPECT_LT((f.reconstruct() - W).norm(), 1e-10);
    EXPECT_LT((f.U.transpose() * f.U - MatrixXd::Identity(r, r)).norm(), 1e-10);
    EXPECT_LT((f.V.transpose() * f.V - MatrixXd::Identity(r, r)).norm(), 1e-10);
    for (Index i = 1; i < r; ++i) EXPECT_GE(f.S(i - 1), f.S(i));
    EXPECT_GE(f.S.minCoeff(), 0.0);
  }
}

TEST(SvdThin, SignConvention) {
  testing_util::Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    MatrixXd W = gaussian(6, 9, rng);
    auto f = svd_thin(W);
    auto g = svd_thin(MatrixXd(-W));
    for (Index c = 0; c < f.V.cols(); ++c) {
      Index at;
      f.V.col(c).cwiseAbs().maxCoeff(&at);
      EXPECT_GE(f.V(at, c), 0.0);
    }
    // flipping W flips U only, V is pinned by the convention
    EXPECT_LT((f.V - g.V).norm(), 1e-10);
    EXPECT_LT((f.U + g.U).norm(), 1e-10);
  }
}

TEST(SvdThin, RejectsNonFinite) {
  MatrixXd W = MatrixXd::Ones(2, 2);
  W(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(svd_thin(W), ValidationError);
}

TEST(Psp, FullRetentionIsIdentity) {
  testing_util::Rng rng(3);
  MatrixXd W = gaussian(7, 4, rng);
  EXPECT_LE(rel(psp(W, {4}).W_k, W), 1e-8);
}

TEST(Psp, DiagonalTruncation) {
  MatrixXd W(2, 2);
  W << 3, 0, 0, 1;
  MatrixXd want = MatrixXd::Zero(2, 2);
  want(0, 0) = 3;
  EXPECT_LE((psp(W, {1}).W_k - want).norm(), 1e-15);
}

TEST(Psp, EckartYoung) {
  testing_util::Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    MatrixXd W = gaussian(5 + t % 7, 3 + t % 11, rng);
    const Index r = std::min(W.rows(), W.cols());
    const Index k = 1 + t % r;
    auto res = psp(W, {k});
    const double tail = res.factors.S.tail(r - k).squaredNorm();
    const double err = (W - res.W_k).squaredNorm();
    EXPECT_NEAR(err, tail, 1e-8 * std::max(1.0, tail));
    // any other rank-k matrix does no better
    const auto& f = res.factors;
    MatrixXd A = gaussian(W.rows(), k, rng), B = gaussian(k, W.cols(), rng);
    MatrixXd other = (f.U.leftCols(k) * f.S.head(k).asDiagonal() + 1e-3 * A) *
                     (f.V.leftCols(k).transpose() + 1e-3 * B);
    EXPECT_GE((W - other).squaredNorm(), err);
  }
}

TEST(Psp, KOutOfRange) {
  MatrixXd W = MatrixXd::Ones(3, 5);
  EXPECT_THROW(psp(W, {0}), ValidationError);
  EXPECT_THROW(psp(W, {4}), ValidationError);
  try {
    psp(W, {4});
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.kind(), "config");
  }
}

TEST(DefaultK, CeilingOfFourFifths) {
  EXPECT_EQ(default_k(64, 10), 8);
  EXPECT_EQ(default_k(512, 100), 80);
  EXPECT_EQ(default_k(10, 1), 1);
  EXPECT_EQ(default_k(10, 3), 3);
  EXPECT_EQ(default_k(10, 5), 4);
  EXPECT_EQ(default_k(10, 11), 9);
  EXPECT_EQ(default_k(3, 10), 3);  // rank bound
}

TEST(Lap, ZeroResidualGivesZeroTail) {
  testing_util::Rng rng(5);
  MatrixXd X = gaussian(30, 6, rng);
  MatrixXd W = gaussian(6, 4, rng);
  auto p = psp(W, {2});
  MatrixXd Y = X * p.W_k;
  auto t = lap(X, Y, p.W_k, p.factors, 2);
  EXPECT_EQ(t.refit_tail.size(), 2);
  EXPECT_LE(t.refit_tail.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(t.skipped_indices.empty());
}

TEST(Lap, IdentityDesignRecoversLabelTail) {
  // X = I: sigma_j* = u_j^T (Y - W_k) v_j; truncating Y itself gives back its own tail
  testing_util::Rng rng(6);
  MatrixXd Y = gaussian(3, 3, rng);
  MatrixXd X = MatrixXd::Identity(3, 3);
  auto p = psp(Y, {1});
  auto t = lap(X, Y, p.W_k, p.factors, 1);
  const auto& f = p.factors;
  for (Index j = 0; j < 2; ++j) {
    const double dense = (f.U.col(1 + j).transpose() * (Y - p.W_k) * f.V.col(1 + j))(0);
    EXPECT_NEAR(t.refit_tail(j), dense, 1e-12);
    EXPECT_NEAR(t.refit_tail(j), f.S(1 + j), 1e-12);
  }
}

TEST(Lap, BruteForceOneDimensionalOracle) {
  testing_util::Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    MatrixXd X = gaussian(25, 5, rng);
    MatrixXd Y = (gaussian(25, 4, rng).array() > 0.5).cast<double>();
    MatrixXd W = gaussian(5, 4, rng);
    auto res = lip_apply(X, Y, W, {2});
    for (Index j = 0; j < 2; ++j) {
      const auto& f = res.factors;
      MatrixXd base = X * (res.W_star - res.refit_tail(j) * f.U.col(2 + j) * f.V.col(2 + j).transpose()) - Y;
      MatrixXd dir = X * f.U.col(2 + j) * f.V.col(2 + j).transpose();
      double best_s = 0, best = std::numeric_limits<double>::infinity();
      for (int i = -100000; i <= 100000; ++i) {
        const double s = 1e-4 * i;
        const double v = (base + s * dir).squaredNorm();
        if (v < best) best = v, best_s = s;
      }
      EXPECT_NEAR(res.refit_tail(j), best_s, 2e-4);
    }
  }
}

TEST(Lap, NullSpaceComponentsAreSkipped) {
  // n < q: X has a null space; place two tail directions of W inside it
  testing_util::Rng rng(8);
  MatrixXd X = gaussian(3, 6, rng);
  Eigen::FullPivLU<MatrixXd> lu(X);
  MatrixXd N = lu.kernel();  // 6 x 3
  Eigen::HouseholderQR<MatrixXd> qrN(N);
  MatrixXd Nq = qrN.householderQ() * MatrixXd::Identity(6, 3);
  Eigen::HouseholderQR<MatrixXd> qrR(X.transpose());
  MatrixXd Rq = qrR.householderQ() * MatrixXd::Identity(6, 3);
  MatrixXd U(6, 4);
  U << Rq.col(0), Rq.col(1), Nq.col(0), Nq.col(1);
  MatrixXd V = MatrixXd::Identity(4, 4);
  VectorXd S(4);
  S << 4, 3, 2, 1;
  MatrixXd W = U * S.asDiagonal() * V.transpose();
  MatrixXd Y = (gaussian(3, 4, rng).array() > 0).cast<double>();
  auto res = lip_apply(X, Y, W, {2});
  EXPECT_EQ(res.skipped_indices, (std::vector<Index>{2, 3}));
  EXPECT_EQ(res.refit_tail(0), 0.0);
  EXPECT_EQ(res.refit_tail(1), 0.0);
}

TEST(Lap, FullRankReturnsEmptyTail) {
  testing_util::Rng rng(9);
  MatrixXd X = gaussian(10, 3, rng), Y = gaussian(10, 4, rng), W = gaussian(3, 4, rng);
  auto p = psp(W, {3});
  EXPECT_EQ(lap(X, Y, p.W_k, p.factors, 3).refit_tail.size(), 0);
  EXPECT_THROW(lap(MatrixXd(gaussian(9, 3, rng)), Y, p.W_k, p.factors, 3), ValidationError);
}

TEST(Lap, TailVectorsMutuallyOrthogonal) {
  testing_util::Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    MatrixXd W = gaussian(12, 9, rng);
    auto f = svd_thin(W);
    MatrixXd cross = f.V.rightCols(5).transpose() * f.V.rightCols(5);
    cross.diagonal().setZero();
    EXPECT_LE(cross.cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(LipApply, IdentityAtFullRank) {
  testing_util::Rng rng(11);
  for (auto [q, l] : {std::pair<Index, Index>{5, 3}, {3, 5}, {4, 4}, {1, 6}, {6, 1}}) {
    MatrixXd X = gaussian(20, q, rng), Y = gaussian(20, l, rng), W = gaussian(q, l, rng);
    auto res = lip_apply(X, Y, W, {std::min(q, l)});
    EXPECT_LE((res.W_star - W).norm(), 1e-8 * W.norm());
  }
}

TEST(LipApply, AssemblyAndObjective) {
  testing_util::Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const Index q = 2 + t % 9, l = 2 + (t * 3) % 8;
    MatrixXd X = gaussian(15 + t % 30, q, rng);
    MatrixXd Y = (gaussian(X.rows(), l, rng).array() > 0.3).cast<double>();
    MatrixXd W = gaussian(q, l, rng);
    const Index r = std::min(q, l);
    const Index k = 1 + t % r;
    auto res = lip_apply(X, Y, W, {k});
    const auto& f = res.factors;
    MatrixXd assembled = res.W_k + f.U.rightCols(r - k) * res.refit_tail.asDiagonal() *
                                       f.V.rightCols(r - k).transpose();
    EXPECT_LE((res.W_star - assembled).norm(), 1e-8 * std::max(1.0, res.W_star.norm()));
    const double before = (X * res.W_k - Y).norm();
    EXPECT_LE((X * res.W_star - Y).norm(), before + 1e-12 * std::max(1.0, before));
  }
}

TEST(LipApply, DoesNotDamageCleanSolution) {
  SyntheticSpec s;
  s.seed = 3;
  auto d = gen_synthetic(s);
  MatrixXd W = ridge_fit(d.train.X, d.train.labels, {1.0}).weights;
  auto res = lip_apply(d.train.X, d.train.labels, W, {default_k(W.rows(), W.cols())});
  const double base = accuracy(predict(d.train.X, W), d.train.labels);
  EXPECT_GE(accuracy(predict(d.train.X, res.W_star), d.train.labels), base - 0.01);
}

TEST(LipApply, ShapeMismatch) {
  EXPECT_THROW(lip_apply(MatrixXd::Ones(4, 3), MatrixXd::Ones(4, 2), MatrixXd::Ones(3, 3), {1}),
               ValidationError);
}

namespace {

struct SelectFixture {
  MatrixXd X, Y, G, W;
  SelectFixture() {
    testing_util::Rng rng(13);
    SyntheticSpec s;
    s.n = 400;
    s.q = 16;
    s.l = 5;
    s.seed = 5;
    auto d = gen_synthetic(s);
    X = d.test.X;
    G = d.test.labels;
    Y = corrupt(G, {NoiseKind::candidate_flip, 0.2, 0.0, 1}).Y;
    W = ridge_fit(d.train.X, corrupt(d.train.labels, {NoiseKind::candidate_flip, 0.2, 0.0, 2}).Y,
                  {1.0}).weights;
  }
};

}  // namespace

TEST(SelectK, SingleCandidate) {
  SelectFixture f;
  EXPECT_EQ(select_k(f.X, f.Y, f.G, f.W, {3}), 3);
  EXPECT_EQ(select_k(f.X, f.Y, f.G, f.W, {default_k(16, 5)}), 4);
}

TEST(SelectK, PicksBestAndBreaksTiesLow) {
  SelectFixture f;
  std::vector<Index> all{5, 4, 3, 2, 1};
  const Index k = select_k(f.X, f.Y, f.G, f.W, all);
  double best = -1;
  Index oracle = 0;
  for (Index c = 1; c <= 5; ++c) {
    const double a = accuracy(predict(f.X, lip_apply(f.X, f.Y, f.W, {c}).W_star), f.G);
    if (a > best) best = a, oracle = c;
  }
  EXPECT_EQ(k, oracle);
  // X = 0 makes every candidate score the same, so the smallest wins
  MatrixXd Z = MatrixXd::Zero(f.X.rows(), f.X.cols());
  EXPECT_EQ(select_k(Z, f.Y, f.G, f.W, {4, 2}), 2);
}

TEST(SelectK, ErrorsOnEmptyOrOutOfRange) {
  SelectFixture f;
  EXPECT_THROW(select_k(f.X, f.Y, f.G, f.W, {}), ValidationError);
  EXPECT_THROW(select_k(f.X, f.Y, f.G, f.W, {6}), ValidationError);
}
