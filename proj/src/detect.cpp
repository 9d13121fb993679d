#include "driftscan/detect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "driftscan/errors.hpp"

namespace driftscan {

namespace {

// group_size * group index as a commit position in the stream
std::vector<long long> to_commits(const std::vector<int>& groups, int group_size) {
  std::vector<long long> out;
  out.reserve(groups.size());
  for (int g : groups)
    out.push_back(static_cast<long long>(g) * static_cast<long long>(group_size));
  return out;
}

nlohmann::ordered_json ph_snapshot(const PHConfig& ph) {
  nlohmann::ordered_json j;
  j["lambda_threshold"] = ph.lambda_threshold;
  j["delta"] = ph.delta;
  j["fading"] = ph.fading;
  j["min_instances"] = ph.min_instances;
  j["normalize"] = ph.normalize;
  return j;
}

void finish_report(DriftReport& rep, const GroupedStream& gs,
                   const std::vector<int>& alarm_offsets, int first_group) {
  for (int a : alarm_offsets) rep.drift_groups.push_back(first_group + a);
  rep.drift_commits = to_commits(rep.drift_groups, gs.group_size);
  rep.dataset = gs.dataset;
}

}  // namespace

DiffCountTable build_diff_count_table(const std::vector<Matrix>& vectors_per_group,
                                      double alpha, DiffMode mode,
                                      const std::vector<int>& group_indices) {
  if (vectors_per_group.size() < 2)
    throw DataError("build_diff_count_table: need at least 2 groups");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw ConfigError("build_diff_count_table: alpha must lie in (0,1)");
  size_t dims = 0;
  for (size_t g = 0; g < vectors_per_group.size(); ++g) {
    const Matrix& m = vectors_per_group[g];
    if (m.size() < 2)
      throw DataError("build_diff_count_table: group " + std::to_string(g) +
                      " has fewer than 2 rows");
    if (g == 0) dims = m[0].size();
    for (const auto& row : m)
      if (row.size() != dims)
        throw DataError("build_diff_count_table: inconsistent row width in group " +
                        std::to_string(g));
  }
  if (dims == 0) throw DataError("build_diff_count_table: zero-width rows");
  if (!group_indices.empty() && group_indices.size() != vectors_per_group.size())
    throw ConfigError("build_diff_count_table: group_indices length mismatch");

  size_t n_groups = vectors_per_group.size();
  size_t n_cols = mode == DiffMode::per_feature ? dims : 1;

  DiffCountTable t;
  t.group_indices.resize(n_groups);
  for (size_t g = 0; g < n_groups; ++g)
    t.group_indices[g] = group_indices.empty() ? static_cast<int>(g) : group_indices[g];
  t.counts.assign(n_groups, std::vector<double>(n_cols, 0.0));
  t.sums.assign(n_groups, 0.0);

  if (mode == DiffMode::per_feature) {
    // column cache: per group, per feature
    std::vector<std::vector<std::vector<double>>> cols(n_groups);
    for (size_t g = 0; g < n_groups; ++g) {
      cols[g].assign(dims, {});
      for (size_t f = 0; f < dims; ++f) {
        cols[g][f].reserve(vectors_per_group[g].size());
        for (const auto& row : vectors_per_group[g]) cols[g][f].push_back(row[f]);
      }
    }
    for (size_t g = 0; g < n_groups; ++g) {
      for (size_t f = 0; f < dims; ++f) {
        double count = 0.0;
        for (size_t h = 0; h < g; ++h)
          if (anova_oneway(cols[g][f], cols[h][f]).p_value < alpha) count += 1.0;
        t.counts[g][f] = count;
        t.sums[g] += count;
      }
    }
  } else {
    for (size_t g = 0; g < n_groups; ++g) {
      double count = 0.0;
      for (size_t h = 0; h < g; ++h)
        if (manova_two_group(vectors_per_group[g], vectors_per_group[h]).p_value < alpha)
          count += 1.0;
      t.counts[g][0] = count;
      t.sums[g] = count;
    }
  }
  return t;
}

std::string interpretation_detector_id(ExplainMethod method, bool rebalanced) {
  switch (method) {
    case ExplainMethod::raw:
      return "raw_base";
    case ExplainMethod::ime:
      return rebalanced ? "rIME_base" : "IME_base";
    case ExplainMethod::breakdown:
      return rebalanced ? "rBD_base" : "BD_base";
  }
  throw ConfigError("interpretation_detector_id: unknown method");
}

std::string prediction_detector_id(bool with_label, bool rebalanced) {
  if (rebalanced) return with_label ? "Rpred_c" : "Rpred";
  return with_label ? "Pred_c" : "Pred";
}

std::string baseline_detector_id(const std::string& metric_name) {
  if (metric_name == "er") return "ER-PH";
  if (metric_name == "accuracy") return "Accuracy-Er-PH";
  if (metric_name == "auc") return "AUC-Er-PH";
  if (metric_name == "mcc") return "MCC-Er-PH";
  if (metric_name == "recall") return "Recall-Er-PH";
  if (metric_name == "kappa") return "Kappa-Er-PH";
  if (metric_name == "precision") return "Precision-Er-PH";
  if (metric_name == "gmean") return "Gmean-Er-PH";
  if (metric_name == "fmeasure") return "Fmeasure-Er-PH";
  if (metric_name == "specificity") return "Specificity-Er-PH";
  throw ConfigError("baseline_detector_id: unknown metric '" + metric_name + "'");
}

bool is_baseline_id(const std::string& detector_id) {
  for (const std::string& m : monitorable_metrics())
    if (baseline_detector_id(m) == detector_id) return true;
  return false;
}

std::string baseline_metric_from_id(const std::string& detector_id) {
  for (const std::string& m : monitorable_metrics())
    if (baseline_detector_id(m) == detector_id) return m;
  throw ConfigError("baseline_metric_from_id: unknown baseline '" + detector_id + "'");
}

InterpretationResult detect_interpretation_drift(const GroupedStream& gs,
                                                 const ForestModel* model,
                                                 const ExplainConfig& explain_cfg,
                                                 const PHConfig& ph, double alpha,
                                                 bool rebalanced) {
  if (explain_cfg.method != ExplainMethod::raw && model == nullptr)
    throw ConfigError("detect_interpretation_drift: attribution methods need a model");
  int first = gs.first_test_group();
  if (static_cast<size_t>(first) >= gs.n_groups())
    throw DataError("detect_interpretation_drift: no test groups after the gap");

  std::vector<Matrix> vectors;
  std::vector<int> indices;
  for (size_t g = static_cast<size_t>(first); g < gs.n_groups(); ++g) {
    const Group& grp = gs.groups[g];
    if (explain_cfg.method == ExplainMethod::raw) {
      vectors.push_back(grp.rows);
    } else {
      AttributionMatrix am = attribute_group(*model, grp, explain_cfg);
      Matrix m;
      m.reserve(am.rows.size());
      for (auto& att : am.rows) m.push_back(att.contributions);
      vectors.push_back(std::move(m));
    }
    indices.push_back(grp.index);
  }

  InterpretationResult res;
  res.table = build_diff_count_table(vectors, alpha, DiffMode::per_feature, indices);
  res.table.column_names = explain_cfg.method == ExplainMethod::raw
                               ? gs.feature_names
                               : model->feature_names;

  std::vector<int> alarms = page_hinkley(res.table.sums, ph);
  res.report.detector_id = interpretation_detector_id(explain_cfg.method, rebalanced);
  finish_report(res.report, gs, alarms, first);

  nlohmann::ordered_json snap;
  snap["detector_id"] = res.report.detector_id;
  snap["family"] = "interpretation";
  snap["method"] = explain_cfg.method == ExplainMethod::raw
                       ? "raw"
                       : (explain_cfg.method == ExplainMethod::ime ? "ime" : "breakdown");
  snap["rebalanced"] = rebalanced;
  snap["labels_used"] = false;
  snap["alpha"] = alpha;
  snap["ph"] = ph_snapshot(ph);
  if (explain_cfg.method != ExplainMethod::raw) {
    snap["ime_samples_per_feature"] = explain_cfg.ime_samples_per_feature;
    snap["reference_records"] = explain_cfg.reference.size();
    snap["seed"] = explain_cfg.seed;
  }
  res.report.config_snapshot = std::move(snap);
  return res;
}

InterpretationResult detect_prediction_drift(const GroupedStream& gs,
                                             const Matrix& train_rows,
                                             const std::vector<int>& train_labels,
                                             int r, bool with_label,
                                             const ForestConfig& forest_cfg,
                                             const PHConfig& ph, double alpha,
                                             bool rebalanced) {
  if (with_label && !gs.labeled)
    throw DataError("detect_prediction_drift: label-shifted variant needs a labeled stream");
  int first = gs.first_test_group();
  if (static_cast<size_t>(first) >= gs.n_groups())
    throw DataError("detect_prediction_drift: no test groups after the gap");

  std::vector<ForestModel> forests =
      train_repeated(train_rows, train_labels, gs.feature_names, r, forest_cfg);

  std::vector<Matrix> vectors;
  std::vector<int> indices;
  for (size_t g = static_cast<size_t>(first); g < gs.n_groups(); ++g) {
    PredictionSet ps = repeated_predict_with(forests, gs.groups[g]);
    if (with_label) {
      for (size_t i = 0; i < ps.matrix.size(); ++i) {
        double lab = static_cast<double>(ps.labels[i]);
        for (double& v : ps.matrix[i]) v = lab - v;
      }
    }
    vectors.push_back(std::move(ps.matrix));
    indices.push_back(gs.groups[g].index);
  }

  InterpretationResult res;
  res.table = build_diff_count_table(vectors, alpha, DiffMode::multivariate, indices);
  res.table.column_names = {"multivariate"};

  std::vector<int> alarms = page_hinkley(res.table.sums, ph);
  res.report.detector_id = prediction_detector_id(with_label, rebalanced);
  finish_report(res.report, gs, alarms, first);

  nlohmann::ordered_json snap;
  snap["detector_id"] = res.report.detector_id;
  snap["family"] = "prediction";
  snap["rebalanced"] = rebalanced;
  snap["labels_used"] = with_label;
  snap["repetitions"] = r;
  snap["alpha"] = alpha;
  snap["ph"] = ph_snapshot(ph);
  snap["forest"] = {{"n_trees", forest_cfg.n_trees},
                    {"max_depth", forest_cfg.max_depth},
                    {"min_leaf", forest_cfg.min_leaf},
                    {"features_per_split", forest_cfg.features_per_split},
                    {"seed", forest_cfg.seed}};
  res.report.config_snapshot = std::move(snap);
  return res;
}

PerformanceResult detect_performance_drift(const GroupedStream& gs,
                                           const ForestModel& model,
                                           const std::string& metric_name,
                                           const PHConfig& ph) {
  if (!gs.labeled)
    throw DataError("detect_performance_drift: performance monitoring needs labels");
  int first = gs.first_test_group();
  if (static_cast<size_t>(first) >= gs.n_groups())
    throw DataError("detect_performance_drift: no test groups after the gap");

  PerformanceResult res;
  res.series.metric_name = metric_name;
  double previous = 0.0;  // carry-forward start for undefined groups
  for (size_t g = static_cast<size_t>(first); g < gs.n_groups(); ++g) {
    const Group& grp = gs.groups[g];
    std::vector<double> probs = predict_proba(model, grp.rows);
    MetricVector mv = group_metrics(probs, grp.labels);
    bool defined = true;
    double e = monitored_error(metric_name, mv, previous, &defined);
    if (!defined)
      log_warn("detect_performance_drift: metric '" + metric_name +
               "' undefined for group " + std::to_string(grp.index) +
               ", carrying previous value forward");
    res.series.values.push_back(e);
    res.series.group_indices.push_back(grp.index);
    previous = e;
  }

  std::vector<int> alarms = page_hinkley(res.series.values, ph);
  res.report.detector_id = baseline_detector_id(metric_name);
  finish_report(res.report, gs, alarms, first);

  nlohmann::ordered_json snap;
  snap["detector_id"] = res.report.detector_id;
  snap["family"] = "performance";
  snap["metric"] = metric_name;
  snap["rebalanced"] = false;
  snap["labels_used"] = true;
  snap["ph"] = ph_snapshot(ph);
  res.report.config_snapshot = std::move(snap);
  return res;
}

nlohmann::ordered_json report_to_json(const DriftReport& r) {
  nlohmann::ordered_json j;
  j["detector_id"] = r.detector_id;
  j["dataset"] = r.dataset;
  j["drift_groups"] = r.drift_groups;
  j["drift_commits"] = r.drift_commits;
  j["config_snapshot"] = r.config_snapshot;
  return j;
}

DriftReport report_from_json(const nlohmann::json& j) {
  DriftReport r;
  r.detector_id = j.at("detector_id").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.drift_groups = j.at("drift_groups").get<std::vector<int>>();
  r.drift_commits = j.at("drift_commits").get<std::vector<long long>>();
  if (j.contains("config_snapshot")) r.config_snapshot = j.at("config_snapshot");
  return r;
}

nlohmann::ordered_json table_to_json(const DiffCountTable& t) {
  nlohmann::ordered_json j;
  j["columns"] = t.column_names;
  j["group_indices"] = t.group_indices;
  j["counts"] = t.counts;
  j["sums"] = t.sums;
  return j;
}

std::string table_to_csv(const DiffCountTable& t) {
  std::ostringstream os;
  os << "group";
  for (const auto& c : t.column_names) os << "," << c;
  os << ",sum\n";
  for (size_t i = 0; i < t.counts.size(); ++i) {
    os << t.group_indices[i];
    for (double v : t.counts[i]) os << "," << static_cast<long long>(v);
    os << "," << static_cast<long long>(t.sums[i]) << "\n";
  }
  return os.str();
}

std::string monitor_to_csv(const MonitorSeries& s) {
  std::ostringstream os;
  os << "group," << s.metric_name << "_error\n";
  os.precision(17);
  for (size_t i = 0; i < s.values.size(); ++i)
    os << s.group_indices[i] << "," << s.values[i] << "\n";
  return os.str();
}

}  // namespace driftscan
