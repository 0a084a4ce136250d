#include "lip/synthetic.hpp"

#include "lip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lip {

void validate(const SyntheticSpec& s) {
  if (s.l < 1 || s.q < 1) throw ValidationError("spec", "synthetic: q and l must be positive");
  if (s.n < 2 * s.l) throw ValidationError("spec", "synthetic: n must be at least 2 l");
  if (!(s.cluster_separation > 0.0))
    throw ValidationError("spec", "synthetic: cluster_separation must be positive");
  if (!(s.within_class_sigma >= 0.0))
    throw ValidationError("spec", "synthetic: within_class_sigma must be nonnegative");
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0))
    throw ValidationError("spec", "synthetic: train_fraction must lie in (0, 1)");
  for (double a : s.axis_scales)
    if (!(a >= 0.0 && std::isfinite(a)))
      throw ValidationError("spec", "synthetic: axis_scales must be finite and nonnegative");
}

namespace {

using Rng = std::mt19937_64;

Eigen::MatrixXd gaussian(Index r, Index c, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

Eigen::MatrixXd orthonormal_columns(Index r, Index c, Rng& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(r, c, rng));
  return qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
}

Eigen::MatrixXd centroids(const SyntheticSpec& s, Rng& rng) {
  const Index l = s.l;
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(l, l) - Eigen::MatrixXd::Constant(l, l, 1.0 / l);
  if (l >= 2 && !s.axis_scales.empty()) {
    // orthonormal basis of the simplex span, contrast axis first
    Eigen::VectorXd w(l);
    for (Index i = 0; i < l; ++i) w(i) = i % 2 == 0 ? 1.0 : -1.0;
    w.array() -= w.mean();
    w.normalize();
    Eigen::MatrixXd rest = S - w * (w.transpose() * S);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rest, Eigen::ComputeFullU);
    const Index m = l - 2;
    Eigen::MatrixXd B(l, l - 1);
    B.col(0) = w;
    if (m > 0) B.rightCols(m) = svd.matrixU().leftCols(m) * orthonormal_columns(m, m, rng);
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(l - 1);
    for (std::size_t a = 0; a < s.axis_scales.size() && static_cast<Index>(a) < l - 1; ++a)
      scale(static_cast<Index>(a)) = s.axis_scales[a];
    S = S * B * scale.asDiagonal() * B.transpose();
  }
  Eigen::MatrixXd C;
  if (s.q >= l) C = S * orthonormal_columns(s.q, l, rng).transpose();
  else C = S * orthonormal_columns(l, s.q, rng);
  double total = 0.0;
  for (Index a = 0; a < l; ++a)
    for (Index b = 0; b < l; ++b) total += (C.row(a) - C.row(b)).norm();
  const double mean = l > 1 ? total / static_cast<double>(l * (l - 1)) : 0.0;
  if (mean > 0.0) C *= s.cluster_separation / mean;
  return C;
}

}  // namespace

Eigen::MatrixXd synthetic_centroids(const SyntheticSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  return centroids(spec, rng);
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

std::pair<std::vector<Index>, std::vector<Index>> stratified_split(const Eigen::MatrixXd& G,
                                                                   double fraction,
                                                                   std::uint64_t seed) {
  require_one_hot(G, "stratified_split labels");
  const Index l = G.cols();
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(l));
  for (Index i = 0; i < G.rows(); ++i) {
    Index c = 0;
    G.row(i).maxCoeff(&c);
    by_class[static_cast<std::size_t>(c)].push_back(i);
  }
  Rng rng(seed);
  std::vector<char> first(static_cast<std::size_t>(G.rows()), 0);
  for (auto& members : by_class) {
    const auto count = static_cast<Index>(members.size());
    if (count == 0) continue;
    std::shuffle(members.begin(), members.end(), rng);
    Index take = static_cast<Index>(std::llround(fraction * static_cast<double>(count)));
    if (count >= 2) take = std::clamp<Index>(take, 1, count - 1);
    for (Index t = 0; t < take; ++t) first[static_cast<std::size_t>(members[static_cast<std::size_t>(t)])] = 1;
  }
  std::pair<std::vector<Index>, std::vector<Index>> out;
  for (Index i = 0; i < G.rows(); ++i)
    (first[static_cast<std::size_t>(i)] ? out.first : out.second).push_back(i);
  return out;
}

SyntheticData gen_synthetic(const SyntheticSpec& s) {
  validate(s);
  Rng rng(s.seed);
  Eigen::MatrixXd C = centroids(s, rng);

  std::vector<Index> y(static_cast<std::size_t>(s.n));
  for (Index i = 0; i < s.n; ++i) y[static_cast<std::size_t>(i)] = i % s.l;
  std::shuffle(y.begin(), y.end(), rng);

  Eigen::MatrixXd X(s.n, s.q);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(s.n, s.l);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (Index i = 0; i < s.n; ++i) {
    const Index c = y[static_cast<std::size_t>(i)];
    G(i, c) = 1.0;
    for (Index j = 0; j < s.q; ++j) X(i, j) = C(c, j) + s.within_class_sigma * nd(rng);
  }

  auto [tr, te] = stratified_split(G, s.train_fraction, rng());
  SyntheticData d;
  d.train = validate_dataset(take_rows(X, tr), take_rows(G, tr), LabelKind::one_hot_truth);
  d.test = validate_dataset(take_rows(X, te), take_rows(G, te), LabelKind::one_hot_truth);
  return d;
}

}  // namespace lip
