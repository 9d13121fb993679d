#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftscan/evaluate.hpp"
#include "driftscan/forest.hpp"
#include "driftscan/smote.hpp"
#include "driftscan/stats.hpp"

namespace driftscan {

struct DatasetConfig {
  std::string name;
  std::string csv;
  std::vector<std::string> schema;  // empty = every non-label column
  std::string label_column;         // empty = unlabeled
};

struct PreprocessOptions {
  // entropy normalization: "auto" applies it when both columns exist,
  // "on" requires them, "off" skips
  std::string entropy_normalize = "auto";
  double spearman_threshold = 0.7;
  bool scale = true;
};

struct GroupingOptions {
  int group_size = 100;
  int train_groups = 5;
  int vl_gap_groups = 1;
};

struct ScoreOptions {
  std::vector<std::string> reports;     // report.json files or directories
  std::vector<std::string> references;  // reference-drift JSON files
  int tolerance_groups = 3;
  int group_size = 100;           // commit units per group for the tolerance
  long long tolerance_commits = -1;  // explicit override; -1 = groups * size
  std::vector<std::string> methods;   // column order; empty = sorted
};

struct RankOptions {
  std::string scores_json;
  std::vector<std::string> measures;  // empty = all five
};

// One config drives every subcommand; flags override single fields.
struct RunConfig {
  uint64_t seed = 0;
  std::string output_dir = "out";
  double alpha = 0.05;
  std::vector<DatasetConfig> datasets;
  PreprocessOptions preprocess;
  GroupingOptions grouping;
  ForestConfig forest;
  int repetitions = 10;  // repeated-prediction runs
  int ime_samples_per_feature = 100;
  size_t reference_cap = 1000;
  PHConfig ph;
  SmoteConfig smote_cfg;
  std::vector<std::string> detectors;
  std::vector<std::string> baseline_metrics;  // cmd_baseline targets
  std::vector<DriftSpec> synth_specs;
  std::vector<std::string> synth_names;
  ScoreOptions score_opts;
  RankOptions rank_opts;

  nlohmann::ordered_json raw;  // the resolved document (audit snapshot)
};

// Parse + validate a config document; unknown detector ids, malformed
// values, and missing required sections fail here, before any computation.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

// Apply "a.b.c=value" overrides (value parsed as JSON, else string).
void apply_override(nlohmann::json& doc, const std::string& assignment);

// The audit snapshot embedded in every output file.
nlohmann::ordered_json config_snapshot(const RunConfig& cfg);

// Known detector ids, in dispatch order.
const std::vector<std::string>& known_detectors();

}  // namespace driftscan
