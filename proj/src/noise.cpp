#include "lip/noise.hpp"

#include "lip/errors.hpp"
#include "lip/matio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

namespace lip {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::candidate_flip: return "candidate_flip";
    case NoiseKind::candidate_flip_with_truth_removal: return "candidate_flip_with_truth_removal";
    case NoiseKind::symmetric: return "symmetric";
    case NoiseKind::asymmetric: return "asymmetric";
  }
  return "candidate_flip";
}

NoiseKind noise_kind_from_string(std::string_view s) {
  if (s == "candidate_flip") return NoiseKind::candidate_flip;
  if (s == "candidate_flip_with_truth_removal") return NoiseKind::candidate_flip_with_truth_removal;
  if (s == "symmetric") return NoiseKind::symmetric;
  if (s == "asymmetric") return NoiseKind::asymmetric;
  throw ValidationError("config", "unknown noise kind '" + std::string(s) + "'");
}

void validate(const NoiseSpec& spec) {
  if (!(spec.p >= 0.0 && spec.p <= 1.0))
    throw ValidationError("config", "noise p must lie in [0, 1]");
  if (!(spec.removal_fraction >= 0.0 && spec.removal_fraction <= 1.0))
    throw ValidationError("config", "removal_fraction must lie in [0, 1]");
}

namespace {

using Rng = std::mt19937_64;

Rng row_stream(std::uint64_t seed, std::uint64_t row, std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32), salt};
  return Rng(seq);
}

// Independent Bernoulli(p) flips of the entries in `cols`, redrawn until
// the row keeps at least one label.
void flip_row(Eigen::MatrixXd& Y, const Eigen::MatrixXd& G, Index i, double p, Rng& rng,
              const std::vector<Index>& cols) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Index l = G.cols();
  for (;;) {
    Index kept = 0;
    for (Index j : cols) {
      const bool flip = u(rng) < p;
      Y(i, j) = flip ? 1.0 - G(i, j) : G(i, j);
    }
    for (Index j = 0; j < l; ++j) kept += Y(i, j) != 0.0;
    if (kept >= 1) return;
    if (p == 0.0) {
      // nothing would ever flip, plant one wrong label uniformly
      std::vector<Index> wrong;
      for (Index j : cols)
        if (G(i, j) == 0.0) wrong.push_back(j);
      if (wrong.empty())
        throw ValidationError("impossible_flip", "row " + std::to_string(i + 1) +
                                                     " cannot keep any label after truth removal");
      std::uniform_int_distribution<std::size_t> pick(0, wrong.size() - 1);
      Y(i, wrong[pick(rng)]) = 1.0;
      return;
    }
  }
}

Index true_class(const Eigen::MatrixXd& G, Index i) {
  Index c = 0;
  G.row(i).maxCoeff(&c);
  return c;
}

}  // namespace

CorruptionResult corrupt(const Eigen::MatrixXd& G, const NoiseSpec& spec) {
  validate(spec);
  require_one_hot(G, "ground truth");
  const Index n = G.rows();
  const Index l = G.cols();
  const bool single = spec.kind == NoiseKind::symmetric || spec.kind == NoiseKind::asymmetric;
  if (single && l == 1)
    throw ValidationError("impossible_flip", "cannot flip labels with a single class");
  if (l == 1 && spec.p == 1.0)
    throw ValidationError("impossible_flip", "p = 1 would empty every row of a single-class matrix");

  Eigen::MatrixXd Y = G;
  std::vector<Index> all_cols(static_cast<std::size_t>(l));
  std::iota(all_cols.begin(), all_cols.end(), Index(0));

  std::vector<char> remove(static_cast<std::size_t>(n), 0);
  if (spec.kind == NoiseKind::candidate_flip_with_truth_removal) {
    const auto count = static_cast<Index>(std::llround(spec.removal_fraction * static_cast<double>(n)));
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index(0));
    Rng sel = row_stream(spec.seed, ~std::uint64_t(0), 1);
    std::shuffle(idx.begin(), idx.end(), sel);
    for (Index t = 0; t < count; ++t) remove[static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])] = 1;
    if (l == 1 && count > 0)
      throw ValidationError("impossible_flip", "cannot remove the only class of a sample");
  }

  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    Rng rng = row_stream(spec.seed, static_cast<std::uint64_t>(i), 0);
    const Index c = true_class(G, i);
    switch (spec.kind) {
      case NoiseKind::candidate_flip:
        flip_row(Y, G, i, spec.p, rng, all_cols);
        break;
      case NoiseKind::candidate_flip_with_truth_removal: {
        flip_row(Y, G, i, spec.p, rng, all_cols);
        if (remove[static_cast<std::size_t>(i)]) {
          Y(i, c) = 0.0;
          if (Y.row(i).sum() < 1.0) {
            std::vector<Index> wrong;
            for (Index j = 0; j < l; ++j)
              if (j != c) wrong.push_back(j);
            flip_row(Y, G, i, spec.p, rng, wrong);
          }
        }
        break;
      }
      case NoiseKind::symmetric:
        if (u(rng) < spec.p) {
          std::uniform_int_distribution<Index> pick(0, l - 2);
          Index d = pick(rng);
          if (d >= c) ++d;
          Y(i, c) = 0.0;
          Y(i, d) = 1.0;
        }
        break;
      case NoiseKind::asymmetric:
        if (u(rng) < spec.p) {
          Y(i, c) = 0.0;
          Y(i, (c + 1) % l) = 1.0;
        }
        break;
    }
  }

  CorruptionResult r;
  r.M = Y - G;
  const Index nnz = (r.M.array() != 0.0).count();
  r.realized_flip_rate = n * l == 0 ? 0.0 : static_cast<double>(nnz) / static_cast<double>(n * l);
  r.Y = std::move(Y);
  return r;
}

double mask_frobenius(const Eigen::MatrixXd& M) {
  Index nnz = 0;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) {
      const double v = M(i, j);
      if (v == 0.0) continue;
      if (v != 1.0 && v != -1.0) {
        std::ostringstream msg;
        msg << "mask entry at row " << i + 1 << ", column " << j + 1 << " is not in {-1, 0, 1}";
        throw ValidationError("validity", msg.str());
      }
      ++nnz;
    }
  return std::sqrt(static_cast<double>(nnz));
}

}  // namespace lip
