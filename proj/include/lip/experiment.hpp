#pragma once

#include "lip/analysis.hpp"
#include "lip/linmodel.hpp"
#include "lip/matio.hpp"
#include "lip/noise.hpp"
#include "lip/synthetic.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace lip {

struct ManifestSource {
  DatasetManifest manifest;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;
};

enum class KMode { default_rule, fixed, grid };

struct ExperimentPlan {
  std::variant<SyntheticSpec, ManifestSource> dataset;
  std::vector<NoiseSpec> noise_levels;
  RidgeConfig ridge;
  KMode k_mode = KMode::default_rule;
  Index k = 0;                        // used when k_mode == fixed
  std::vector<Index> grid_candidates;  // empty means 1..min(q,l)
  Index trials = 1;
  std::filesystem::path output_dir;
};

void validate(const ExperimentPlan& plan);

// Relative paths (manifest, output_dir) are resolved against base_dir.
ExperimentPlan plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentPlan load_plan(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentPlan& plan);

struct TrialRecord {
  Index level = 0;
  Index trial = 0;
  bool ok = false;
  std::string error_kind;
  std::string error_message;

  NoiseSpec noise;  // seed as used for this trial
  double realized_flip_rate = 0;
  double accuracy_clean_W = 0;
  double accuracy_noisy_W = 0;
  double accuracy_psp_only = 0;
  double accuracy_lip = 0;
  Index k = 0;
  std::vector<Index> skipped_indices;
  BoundReport bounds;
  double phi_11 = 0;
  Eigen::VectorXd spectrum_clean;
  Eigen::VectorXd spectrum_noisy;
  std::string spectrum_path;  // relative to output_dir
  std::string grid_path;
  std::string bounds_path;

  // wall-clock seconds, reported only in timing.log
  double train_seconds = 0;
  double lip_seconds = 0;
};

struct ArmSummary {
  double mean = 0;
  double stddev = 0;
};

struct LevelAggregate {
  Index level = 0;
  NoiseSpec noise;
  Index completed = 0;
  Index failed = 0;
  ArmSummary clean, noisy, psp_only, lip;
};

struct ExperimentReport {
  std::vector<TrialRecord> records;  // level-major order
  std::vector<LevelAggregate> aggregates;
};

// Runs every (noise level, trial). A trial that throws is recorded as a
// failure entry and the sweep continues. When output_dir is nonempty the
// artifacts, report.json and timing.log are written under it.
ExperimentReport run_experiment(const ExperimentPlan& plan);

nlohmann::json to_json(const ExperimentReport& r, const ExperimentPlan& plan);

}  // namespace lip
