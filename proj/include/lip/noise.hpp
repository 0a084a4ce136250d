#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>

namespace lip {

using Eigen::Index;

enum class NoiseKind { candidate_flip, candidate_flip_with_truth_removal, symmetric, asymmetric };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(std::string_view s);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::candidate_flip;
  double p = 0.0;
  double removal_fraction = 0.0;
  std::uint64_t seed = 0;
};

void validate(const NoiseSpec& spec);

struct CorruptionResult {
  Eigen::MatrixXd Y;  // corrupted labels, entries in {0,1}
  Eigen::MatrixXd M;  // Y - G, entries in {-1,0,1}
  double realized_flip_rate = 0.0;  // nonzeros of M over n*l
};

// Rows are generated from independent streams keyed on (seed, row), so the
// result does not depend on evaluation order.
CorruptionResult corrupt(const Eigen::MatrixXd& G, const NoiseSpec& spec);

// sqrt of the number of nonzero entries; M must be ternary.
double mask_frobenius(const Eigen::MatrixXd& M);

}  // namespace lip
