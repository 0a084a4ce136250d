#include "lip/matio.hpp"

#include "lip/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace lip {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 12);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Eigen::MatrixXd parse_matrix(std::string_view text, std::string_view source) {
  std::vector<double> data;
  Index cols = -1;
  Index rows = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++rows;
    Index c = 0;
    std::size_t cpos = 0;
    while (true) {
      std::size_t cend = line.find(',', cpos);
      std::string_view cell = trim(line.substr(cpos, cend == std::string_view::npos ? line.npos : cend - cpos));
      ++c;
      double v = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      auto r = std::from_chars(first, last, v);
      if (cell.empty() || r.ec != std::errc() || r.ptr != last) {
        std::ostringstream msg;
        msg << source << ": cannot parse '" << cell << "' at row " << rows << ", column " << c;
        throw MatrixFormatError("parse", msg.str(), rows, c);
      }
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << source << ": non-finite value at row " << rows << ", column " << c;
        throw MatrixFormatError("validity", msg.str(), rows, c);
      }
      data.push_back(v);
      if (cend == std::string_view::npos) break;
      cpos = cend + 1;
    }
    if (cols < 0) {
      cols = c;
    } else if (c != cols) {
      std::ostringstream msg;
      msg << source << ": ragged row " << rows << " has " << c << " columns, expected " << cols;
      throw MatrixFormatError("format", msg.str(), rows, 0);
    }
  }
  if (rows == 0) throw MatrixFormatError("format", std::string(source) + ": empty matrix file", 0, 0);
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i * cols + j)];
  return m;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

Eigen::MatrixXd load_matrix(const fs::path& path) {
  return parse_matrix(read_text(path), path.string());
}

void save_matrix(const Eigen::MatrixXd& m, const fs::path& path) {
  if (m.rows() < 1 || m.cols() < 1) throw ValidationError("shape", "cannot save an empty matrix");
  if (!m.allFinite()) throw ValidationError("validity", "cannot save a matrix with non-finite entries");
  write_text(path, format_matrix(m));
}

std::string to_string(LabelKind kind) {
  return kind == LabelKind::one_hot_truth ? "one_hot_truth" : "candidate_set";
}

LabelKind label_kind_from_string(std::string_view s) {
  if (s == "one_hot_truth") return LabelKind::one_hot_truth;
  if (s == "candidate_set") return LabelKind::candidate_set;
  throw ValidationError("config", "unknown label_kind '" + std::string(s) + "'");
}

DatasetManifest load_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("parse", path.string() + ": " + e.what());
  }
  DatasetManifest m;
  try {
    fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) {
      fs::path f(p);
      return f.is_absolute() ? f : base / f;
    };
    m.features_path = resolve(j.at("features_path").get<std::string>());
    m.labels_path = resolve(j.at("labels_path").get<std::string>());
    m.n = j.at("n").get<Index>();
    m.q = j.at("q").get<Index>();
    m.l = j.at("l").get<Index>();
    m.label_kind = label_kind_from_string(j.at("label_kind").get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError("parse", path.string() + ": " + e.what());
  }
  return m;
}

std::string format_manifest(const DatasetManifest& m) {
  json j = {{"features_path", m.features_path.generic_string()},
            {"labels_path", m.labels_path.generic_string()},
            {"n", m.n},
            {"q", m.q},
            {"l", m.l},
            {"label_kind", to_string(m.label_kind)}};
  return j.dump(2) + "\n";
}

void save_manifest(const DatasetManifest& m, const fs::path& path) {
  write_text(path, format_manifest(m));
}

void require_one_hot(const Eigen::MatrixXd& G, std::string_view what) {
  for (Index i = 0; i < G.rows(); ++i) {
    Index ones = 0;
    bool binary = true;
    for (Index j = 0; j < G.cols(); ++j) {
      if (G(i, j) == 1.0) ++ones;
      else if (G(i, j) != 0.0) binary = false;
    }
    if (!binary || ones != 1) {
      std::ostringstream msg;
      msg << what << ": row " << i + 1 << " is not one-hot (row sum " << G.row(i).sum() << ")";
      throw MatrixFormatError("row_sum", msg.str(), i + 1, 0);
    }
  }
}

void require_candidate_set(const Eigen::MatrixXd& Y, std::string_view what) {
  for (Index i = 0; i < Y.rows(); ++i) {
    Index ones = 0;
    for (Index j = 0; j < Y.cols(); ++j) {
      if (Y(i, j) == 1.0) {
        ++ones;
      } else if (Y(i, j) != 0.0) {
        std::ostringstream msg;
        msg << what << ": entry at row " << i + 1 << ", column " << j + 1 << " is not 0/1";
        throw MatrixFormatError("validity", msg.str(), i + 1, j + 1);
      }
    }
    if (ones < 1) {
      std::ostringstream msg;
      msg << what << ": row " << i + 1 << " has no candidate label";
      throw MatrixFormatError("row_sum", msg.str(), i + 1, 0);
    }
  }
}

ValidatedDataset validate_dataset(Eigen::MatrixXd X, Eigen::MatrixXd labels, LabelKind kind,
                                  Index n, Index q, Index l) {
  if (n < 0) n = X.rows();
  if (q < 0) q = X.cols();
  if (l < 0) l = labels.cols();
  if (n < 1 || q < 1 || l < 1) throw ValidationError("shape", "dataset dimensions must be positive");
  auto shape = [](const Eigen::MatrixXd& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
  };
  if (X.rows() != n || X.cols() != q)
    throw ValidationError("shape", "features are " + shape(X) + ", expected " + std::to_string(n) +
                                       "x" + std::to_string(q));
  if (labels.rows() != n || labels.cols() != l)
    throw ValidationError("shape", "labels are " + shape(labels) + ", expected " +
                                       std::to_string(n) + "x" + std::to_string(l));
  if (!X.allFinite() || !labels.allFinite())
    throw ValidationError("validity", "dataset contains non-finite entries");
  if (kind == LabelKind::one_hot_truth) require_one_hot(labels);
  else require_candidate_set(labels);
  return ValidatedDataset{std::move(X), std::move(labels), kind};
}

ValidatedDataset validate_manifest(const DatasetManifest& m) {
  if (m.n < 1 || m.q < 1 || m.l < 1)
    throw ValidationError("shape", "manifest dimensions must be positive");
  return validate_dataset(load_matrix(m.features_path), load_matrix(m.labels_path), m.label_kind,
                          m.n, m.q, m.l);
}

}  // namespace lip
