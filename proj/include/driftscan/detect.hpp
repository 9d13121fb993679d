#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftscan/explain.hpp"
#include "driftscan/forest.hpp"
#include "driftscan/metrics.hpp"
#include "driftscan/stats.hpp"
#include "driftscan/stream.hpp"

namespace driftscan {

// Count, per group, how many earlier groups differ significantly.
enum class DiffMode { per_feature, multivariate };

struct DiffCountTable {
  std::vector<std::string> column_names;  // features, or {"multivariate"}
  std::vector<int> group_indices;         // ascending test-group indices
  Matrix counts;                          // one row per group, per-column counts
  std::vector<double> sums;               // row sums (the detector input series)
};

// vectors_per_group[i] is the observation matrix of group i (rows x dims).
// per_feature compares each column with a univariate test; multivariate
// compares whole rows. Cell [i][j] counts earlier groups h < i whose
// comparison p-value is below alpha.
DiffCountTable build_diff_count_table(const std::vector<Matrix>& vectors_per_group,
                                      double alpha, DiffMode mode,
                                      const std::vector<int>& group_indices = {});

struct DriftReport {
  std::string detector_id;
  std::string dataset;
  std::vector<int> drift_groups;          // group indices where the alarm fired
  std::vector<long long> drift_commits;   // group index * group_size
  nlohmann::ordered_json config_snapshot;
};

// Drift from shifts in what the records (or their attributions) look like.
// With method raw the groups' preprocessed feature rows feed the table
// directly and model may be null; with ime/breakdown the per-record
// contribution vectors do. rebalanced only affects the detector id (the
// caller already trained the model accordingly).
struct InterpretationResult {
  DriftReport report;
  DiffCountTable table;
};
InterpretationResult detect_interpretation_drift(const GroupedStream& gs,
                                                 const ForestModel* model,
                                                 const ExplainConfig& explain_cfg,
                                                 const PHConfig& ph, double alpha,
                                                 bool rebalanced);

// Drift from shifts in repeated-prediction distributions. with_label shifts
// each probability by the true label (label - p), requiring labels.
InterpretationResult detect_prediction_drift(const GroupedStream& gs,
                                             const Matrix& train_rows,
                                             const std::vector<int>& train_labels,
                                             int r, bool with_label,
                                             const ForestConfig& forest_cfg,
                                             const PHConfig& ph, double alpha,
                                             bool rebalanced);

// Drift from a monitored performance metric of a fixed model.
struct MonitorSeries {
  std::string metric_name;
  std::vector<int> group_indices;
  std::vector<double> values;  // error-like, larger is worse
};
struct PerformanceResult {
  DriftReport report;
  MonitorSeries series;
};
PerformanceResult detect_performance_drift(const GroupedStream& gs,
                                           const ForestModel& model,
                                           const std::string& metric_name,
                                           const PHConfig& ph);

// Detector ids: raw_base, IME_base, BD_base (r-prefixed when the training
// window was rebalanced), Pred/Pred_c (R-prefixed likewise), and the
// performance baselines (ER-PH, AUC-Er-PH, ...).
std::string interpretation_detector_id(ExplainMethod method, bool rebalanced);
std::string prediction_detector_id(bool with_label, bool rebalanced);
std::string baseline_detector_id(const std::string& metric_name);
bool is_baseline_id(const std::string& detector_id);
// Inverse of baseline_detector_id; throws ConfigError for unknown ids.
std::string baseline_metric_from_id(const std::string& detector_id);

nlohmann::ordered_json report_to_json(const DriftReport& r);
DriftReport report_from_json(const nlohmann::json& j);
nlohmann::ordered_json table_to_json(const DiffCountTable& t);
std::string table_to_csv(const DiffCountTable& t);
std::string monitor_to_csv(const MonitorSeries& s);

}  // namespace driftscan
