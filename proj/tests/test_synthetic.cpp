#include "lip/errors.hpp"
#include "lip/json_io.hpp"
#include "lip/linmodel.hpp"
#include "lip/synthetic.hpp"

#include <gtest/gtest.h>

using namespace lip;
using Eigen::Index;
using Eigen::MatrixXd;

TEST(GenSynthetic, NoiselessClustersSeparate) {
  SyntheticSpec s;
  s.n = 300;
  s.q = 12;
  s.l = 6;
  s.within_class_sigma = 0.0;
  s.seed = 4;
  auto d = gen_synthetic(s);
  MatrixXd W = ridge_fit(d.train.X, d.train.labels, {1e-6}).weights;
  EXPECT_EQ(accuracy(predict(d.test.X, W), d.test.labels), 1.0);
}

TEST(GenSynthetic, SameSeedSameData) {
  SyntheticSpec s;
  s.seed = 11;
  auto a = gen_synthetic(s), b = gen_synthetic(s);
  EXPECT_EQ(a.train.X, b.train.X);
  EXPECT_EQ(a.train.labels, b.train.labels);
  EXPECT_EQ(a.test.X, b.test.X);
  s.seed = 12;
  EXPECT_NE(gen_synthetic(s).train.X, a.train.X);
}

TEST(GenSynthetic, StandardConfigIsLearnable) {
  SyntheticSpec s;  // n=2000, q=64, l=10, separation / sigma = 10
  EXPECT_DOUBLE_EQ(s.cluster_separation / s.within_class_sigma, 10.0);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    s.seed = seed;
    auto d = gen_synthetic(s);
    MatrixXd W = ridge_fit(d.train.X, d.train.labels, {1.0}).weights;
    EXPECT_GE(accuracy(predict(d.test.X, W), d.test.labels), 0.99);
  }
}

TEST(GenSynthetic, StratifiedSplit) {
  SyntheticSpec s;
  s.n = 40;
  s.l = 20;
  s.q = 5;
  s.train_fraction = 0.9;
  auto d = gen_synthetic(s);
  EXPECT_EQ(d.train.n() + d.test.n(), 40);
  for (Index c = 0; c < 20; ++c) {
    EXPECT_EQ(d.train.labels.col(c).sum(), 1.0);
    EXPECT_EQ(d.test.labels.col(c).sum(), 1.0);
  }
  s.n = 2000;
  s.l = 10;
  s.train_fraction = 0.8;
  d = gen_synthetic(s);
  EXPECT_EQ(d.train.n(), 1600);
  for (Index c = 0; c < 10; ++c) EXPECT_EQ(d.train.labels.col(c).sum(), 160.0);
}

TEST(GenSynthetic, CentroidSpacingMatchesSeparation) {
  for (std::vector<double> scales : {std::vector<double>{}, {0.0, 0.6}, {0.3}}) {
    SyntheticSpec s;
    s.cluster_separation = 2.5;
    s.axis_scales = scales;
    MatrixXd C = synthetic_centroids(s);
    double total = 0;
    for (Index a = 0; a < s.l; ++a)
      for (Index b = 0; b < s.l; ++b) total += (C.row(a) - C.row(b)).norm();
    EXPECT_NEAR(total / (s.l * (s.l - 1)), 2.5, 1e-12);
    EXPECT_LE(C.colwise().sum().norm(), 1e-12);  // centred simplex
  }
}

TEST(GenSynthetic, RegularSimplexHasEqualDistances) {
  SyntheticSpec s;
  s.axis_scales.clear();
  s.l = 7;
  s.q = 3;  // fewer features than classes still embeds
  MatrixXd C = synthetic_centroids(s);
  EXPECT_EQ(C.rows(), 7);
  EXPECT_EQ(C.cols(), 3);
  s.q = 20;
  C = synthetic_centroids(s);
  for (Index a = 0; a < 7; ++a)
    for (Index b = a + 1; b < 7; ++b) EXPECT_NEAR((C.row(a) - C.row(b)).norm(), s.cluster_separation, 1e-12);
}

TEST(GenSynthetic, SpecErrors) {
  SyntheticSpec s;
  s.n = 19;
  s.l = 10;
  try {
    gen_synthetic(s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.kind(), "spec");
  }
  s.n = 100;
  s.train_fraction = 1.0;
  EXPECT_THROW(gen_synthetic(s), ValidationError);
  s.train_fraction = 0.5;
  s.cluster_separation = 0;
  EXPECT_THROW(gen_synthetic(s), ValidationError);
}

TEST(GenSynthetic, SpecJsonRoundTrip) {
  SyntheticSpec s;
  s.n = 123;
  s.seed = 99;
  s.axis_scales = {0.1, 0.2, 0.3};
  auto back = synthetic_spec_from_json(nlohmann::json::parse(to_json(s).dump()));
  EXPECT_EQ(back.n, 123);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.axis_scales, s.axis_scales);
  auto defaults = synthetic_spec_from_json(nlohmann::json::object());
  EXPECT_EQ(defaults.n, 2000);
}
