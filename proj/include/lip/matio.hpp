#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>

namespace lip {

using Eigen::Index;

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// CSV text, comma separated, no header, "\n" after every row.
std::string format_matrix(const Eigen::MatrixXd& m);
Eigen::MatrixXd parse_matrix(std::string_view text, std::string_view source = "<memory>");

Eigen::MatrixXd load_matrix(const std::filesystem::path& path);
void save_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

enum class LabelKind { one_hot_truth, candidate_set };

std::string to_string(LabelKind kind);
LabelKind label_kind_from_string(std::string_view s);

struct DatasetManifest {
  std::filesystem::path features_path;
  std::filesystem::path labels_path;
  Index n = 0;
  Index q = 0;
  Index l = 0;
  LabelKind label_kind = LabelKind::one_hot_truth;
};

// Relative paths inside a manifest file are resolved against its directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& m);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

struct ValidatedDataset {
  Eigen::MatrixXd X;       // n x q
  Eigen::MatrixXd labels;  // n x l
  LabelKind label_kind = LabelKind::one_hot_truth;

  Index n() const { return X.rows(); }
  Index q() const { return X.cols(); }
  Index l() const { return labels.cols(); }
};

ValidatedDataset validate_manifest(const DatasetManifest& m);

// Checks shapes against the expected dimensions and the label invariants.
// Expected dimensions of -1 are taken from the matrices.
ValidatedDataset validate_dataset(Eigen::MatrixXd X, Eigen::MatrixXd labels, LabelKind kind,
                                  Index n = -1, Index q = -1, Index l = -1);

// Throws ValidationError("validity") naming the first row that is not one-hot.
void require_one_hot(const Eigen::MatrixXd& G, std::string_view what = "label matrix");
// Entries in {0,1} and every row sum >= 1.
void require_candidate_set(const Eigen::MatrixXd& Y, std::string_view what = "label matrix");

}  // namespace lip
