#pragma once

#include "lip/matio.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace lip {

// Gaussian class clusters around the vertices of a regular simplex embedded
// at a random orientation in R^q.
//
// axis_scales reshapes the simplex before embedding: entry 0 scales the
// alternating-sign contrast axis (+,-,+,-,... over the classes, centred),
// entries 1.. scale further in-span axes drawn at random orientation. Axes
// without an entry keep scale 1, so an empty list gives the regular simplex.
// Centroids are then rescaled so that their mean pairwise distance equals
// cluster_separation.
struct SyntheticSpec {
  Index n = 2000;
  Index q = 64;
  Index l = 10;
  double cluster_separation = 0.4;
  double within_class_sigma = 0.04;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::vector<double> axis_scales = {0.0, 0.6};
};

void validate(const SyntheticSpec& spec);

// l x q class centroids.
Eigen::MatrixXd synthetic_centroids(const SyntheticSpec& spec);

struct SyntheticData {
  ValidatedDataset train;
  ValidatedDataset test;
};

// Balanced class assignment, stratified split (every class lands in both
// halves), deterministic in the seed.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

// Stratified split of a one-hot dataset. Returns (first, second) where the
// first part holds round(fraction * count) samples of every class, clamped
// so each part keeps at least one when the class has two or more.
std::pair<std::vector<Index>, std::vector<Index>> stratified_split(const Eigen::MatrixXd& G,
                                                                   double fraction,
                                                                   std::uint64_t seed);

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Index>& rows);

}  // namespace lip
