#include "driftscan/config.hpp"

#include <algorithm>
#include <fstream>

#include "driftscan/detect.hpp"
#include "driftscan/errors.hpp"
#include "driftscan/metrics.hpp"

namespace driftscan {

namespace {

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

const std::vector<std::string>& known_detectors() {
  static const std::vector<std::string> ids = {
      "raw_base", "IME_base", "BD_base",  "rIME_base", "rBD_base",
      "Pred",     "Pred_c",   "Rpred",    "Rpred_c",
      "ER-PH",    "Accuracy-Er-PH", "AUC-Er-PH", "MCC-Er-PH", "Recall-Er-PH",
      "Kappa-Er-PH", "Precision-Er-PH", "Gmean-Er-PH", "Fmeasure-Er-PH",
      "Specificity-Er-PH"};
  return ids;
}

RunConfig parse_run_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
  RunConfig cfg;
  cfg.seed = field_or<uint64_t>(doc, "seed", 0);
  cfg.output_dir = field_or<std::string>(doc, "output_dir", "out");
  cfg.alpha = field_or<double>(doc, "alpha", 0.05);
  if (!(cfg.alpha > 0.0) || !(cfg.alpha < 1.0))
    throw ConfigError("alpha must lie in (0,1)");

  auto parse_dataset = [](const nlohmann::json& d) {
    DatasetConfig ds;
    ds.csv = field_or<std::string>(d, "csv", "");
    if (ds.csv.empty()) throw ConfigError("dataset entry lacks 'csv'");
    ds.name = field_or<std::string>(d, "name", "");
    if (ds.name.empty()) {
      std::string stem = ds.csv;
      size_t slash = stem.find_last_of("/\\");
      if (slash != std::string::npos) stem = stem.substr(slash + 1);
      size_t dot = stem.find_last_of('.');
      if (dot != std::string::npos) stem = stem.substr(0, dot);
      ds.name = stem;
    }
    ds.schema = field_or<std::vector<std::string>>(d, "schema", {});
    ds.label_column = field_or<std::string>(d, "label_column", "");
    return ds;
  };
  if (doc.contains("datasets")) {
    if (!doc.at("datasets").is_array())
      throw ConfigError("'datasets' must be an array");
    for (const auto& d : doc.at("datasets")) cfg.datasets.push_back(parse_dataset(d));
  } else if (doc.contains("dataset")) {
    cfg.datasets.push_back(parse_dataset(doc.at("dataset")));
  }
  {
    std::vector<std::string> names;
    for (const auto& ds : cfg.datasets) names.push_back(ds.name);
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
      throw ConfigError("dataset names must be unique");
  }

  if (doc.contains("preprocess")) {
    const auto& p = doc.at("preprocess");
    if (p.contains("entropy_normalize")) {
      const auto& e = p.at("entropy_normalize");
      if (e.is_boolean()) cfg.preprocess.entropy_normalize = e.get<bool>() ? "on" : "off";
      else cfg.preprocess.entropy_normalize = e.get<std::string>();
      const std::string& v = cfg.preprocess.entropy_normalize;
      if (v != "auto" && v != "on" && v != "off")
        throw ConfigError("preprocess.entropy_normalize must be auto/on/off");
    }
    cfg.preprocess.spearman_threshold =
        field_or<double>(p, "spearman_threshold", cfg.preprocess.spearman_threshold);
    if (!(cfg.preprocess.spearman_threshold > 0.0) ||
        cfg.preprocess.spearman_threshold > 1.0)
      throw ConfigError("preprocess.spearman_threshold must lie in (0,1]");
    cfg.preprocess.scale = field_or<bool>(p, "scale", cfg.preprocess.scale);
  }

  if (doc.contains("grouping")) {
    const auto& g = doc.at("grouping");
    cfg.grouping.group_size = field_or<int>(g, "group_size", cfg.grouping.group_size);
    cfg.grouping.train_groups = field_or<int>(g, "train_groups", cfg.grouping.train_groups);
    cfg.grouping.vl_gap_groups =
        field_or<int>(g, "vl_gap_groups", cfg.grouping.vl_gap_groups);
    if (cfg.grouping.group_size < 2) throw ConfigError("grouping.group_size must be >= 2");
    if (cfg.grouping.train_groups < 1)
      throw ConfigError("grouping.train_groups must be >= 1");
    if (cfg.grouping.vl_gap_groups < 0)
      throw ConfigError("grouping.vl_gap_groups must be >= 0");
  }

  if (doc.contains("forest")) {
    const auto& f = doc.at("forest");
    cfg.forest.n_trees = field_or<int>(f, "n_trees", cfg.forest.n_trees);
    cfg.forest.max_depth = field_or<int>(f, "max_depth", cfg.forest.max_depth);
    cfg.forest.min_leaf = field_or<int>(f, "min_leaf", cfg.forest.min_leaf);
    cfg.forest.features_per_split =
        field_or<int>(f, "features_per_split", cfg.forest.features_per_split);
    if (cfg.forest.n_trees < 1) throw ConfigError("forest.n_trees must be >= 1");
    if (cfg.forest.min_leaf < 1) throw ConfigError("forest.min_leaf must be >= 1");
  }
  cfg.forest.seed = cfg.seed;

  cfg.repetitions = field_or<int>(doc, "repetitions", cfg.repetitions);
  if (cfg.repetitions < 2) throw ConfigError("repetitions must be >= 2");

  if (doc.contains("explain")) {
    const auto& e = doc.at("explain");
    cfg.ime_samples_per_feature =
        field_or<int>(e, "ime_samples_per_feature", cfg.ime_samples_per_feature);
    if (cfg.ime_samples_per_feature < 1)
      throw ConfigError("explain.ime_samples_per_feature must be >= 1");
    cfg.reference_cap = field_or<size_t>(e, "reference_cap", cfg.reference_cap);
    if (cfg.reference_cap == 0) throw ConfigError("explain.reference_cap must be >= 1");
  }

  if (doc.contains("ph")) {
    const auto& p = doc.at("ph");
    cfg.ph.lambda_threshold =
        field_or<double>(p, "lambda_threshold", cfg.ph.lambda_threshold);
    cfg.ph.delta = field_or<double>(p, "delta", cfg.ph.delta);
    cfg.ph.fading = field_or<double>(p, "fading", cfg.ph.fading);
    cfg.ph.min_instances = field_or<int>(p, "min_instances", cfg.ph.min_instances);
    cfg.ph.normalize = field_or<bool>(p, "normalize", cfg.ph.normalize);
    if (!(cfg.ph.lambda_threshold > 0.0))
      throw ConfigError("ph.lambda_threshold must be positive");
    if (!(cfg.ph.fading > 0.0) || cfg.ph.fading > 1.0)
      throw ConfigError("ph.fading must lie in (0,1]");
    if (cfg.ph.delta < 0.0) throw ConfigError("ph.delta must be non-negative");
    if (cfg.ph.min_instances < 1) throw ConfigError("ph.min_instances must be >= 1");
  }

  if (doc.contains("smote")) {
    const auto& s = doc.at("smote");
    cfg.smote_cfg.k_neighbors = field_or<int>(s, "k_neighbors", cfg.smote_cfg.k_neighbors);
    cfg.smote_cfg.target_ratio =
        field_or<double>(s, "target_ratio", cfg.smote_cfg.target_ratio);
    if (cfg.smote_cfg.k_neighbors < 1) throw ConfigError("smote.k_neighbors must be >= 1");
    if (!(cfg.smote_cfg.target_ratio > 0.0) || cfg.smote_cfg.target_ratio > 1.0)
      throw ConfigError("smote.target_ratio must lie in (0,1]");
  }
  cfg.smote_cfg.seed = cfg.seed;

  cfg.detectors = field_or<std::vector<std::string>>(doc, "detectors", {});
  for (const auto& id : cfg.detectors) {
    const auto& known = known_detectors();
    if (std::find(known.begin(), known.end(), id) == known.end())
      throw ConfigError("unknown detector '" + id + "'");
  }

  cfg.baseline_metrics = field_or<std::vector<std::string>>(
      doc, "baseline_metrics",
      {"er", "auc", "gmean", "precision", "fmeasure", "recall", "mcc"});
  if (cfg.baseline_metrics.empty())
    throw ConfigError("baseline_metrics must not be empty");
  for (const auto& m : cfg.baseline_metrics) {
    const auto& ok = monitorable_metrics();
    if (std::find(ok.begin(), ok.end(), m) == ok.end())
      throw ConfigError("unknown baseline metric '" + m + "'");
  }

  auto parse_synth = [](const nlohmann::json& s) {
    DriftSpec sp;
    sp.n_groups = field_or<int>(s, "n_groups", sp.n_groups);
    sp.group_size = field_or<int>(s, "group_size", sp.group_size);
    sp.n_features = field_or<int>(s, "n_features", sp.n_features);
    sp.drift_points = field_or<std::vector<int>>(s, "drift_points", {});
    for (const std::string& k :
         field_or<std::vector<std::string>>(s, "kinds", {}))
      sp.kinds.push_back(drift_kind_from_string(k));
    sp.magnitude = field_or<double>(s, "magnitude", sp.magnitude);
    sp.base_defect_rate = field_or<double>(s, "base_defect_rate", sp.base_defect_rate);
    if (sp.kinds.size() != sp.drift_points.size())
      throw ConfigError("synth: 'kinds' and 'drift_points' must align");
    return sp;
  };
  if (doc.contains("synth")) {
    const auto& s = doc.at("synth");
    if (s.is_array()) {
      for (const auto& one : s) {
        DriftSpec sp = parse_synth(one);
        sp.seed = field_or<uint64_t>(one, "seed", cfg.seed);
        cfg.synth_specs.push_back(sp);
        cfg.synth_names.push_back(field_or<std::string>(one, "name", ""));
      }
    } else {
      DriftSpec sp = parse_synth(s);
      sp.seed = field_or<uint64_t>(s, "seed", cfg.seed);
      cfg.synth_specs.push_back(sp);
      cfg.synth_names.push_back(field_or<std::string>(s, "name", ""));
    }
    for (size_t i = 0; i < cfg.synth_names.size(); ++i)
      if (cfg.synth_names[i].empty())
        cfg.synth_names[i] =
            cfg.synth_specs.size() == 1 ? "synth" : "synth" + std::to_string(i + 1);
  }

  if (doc.contains("score")) {
    const auto& s = doc.at("score");
    cfg.score_opts.reports = field_or<std::vector<std::string>>(s, "reports", {});
    cfg.score_opts.references = field_or<std::vector<std::string>>(s, "references", {});
    cfg.score_opts.tolerance_groups =
        field_or<int>(s, "tolerance_groups", cfg.score_opts.tolerance_groups);
    cfg.score_opts.group_size = field_or<int>(s, "group_size", cfg.grouping.group_size);
    cfg.score_opts.tolerance_commits =
        field_or<long long>(s, "tolerance_commits", cfg.score_opts.tolerance_commits);
    cfg.score_opts.methods = field_or<std::vector<std::string>>(s, "methods", {});
    if (cfg.score_opts.tolerance_groups < 0)
      throw ConfigError("score.tolerance_groups must be non-negative");
  } else {
    cfg.score_opts.group_size = cfg.grouping.group_size;
  }

  if (doc.contains("rank")) {
    const auto& r = doc.at("rank");
    cfg.rank_opts.scores_json = field_or<std::string>(r, "scores_json", "");
    cfg.rank_opts.measures = field_or<std::vector<std::string>>(r, "measures", {});
  }

  cfg.raw = nlohmann::ordered_json(doc);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return parse_run_config(doc);
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like path.to.key=value: '" + assignment + "'");
  std::string path = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    parsed = value;  // plain string
  }
  nlohmann::json* cur = &doc;
  size_t start = 0;
  while (true) {
    size_t dot = path.find('.', start);
    std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("override path has an empty segment: '" + path + "'");
    if (dot == std::string::npos) {
      (*cur)[key] = parsed;
      break;
    }
    if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = nlohmann::json::object();
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

nlohmann::ordered_json config_snapshot(const RunConfig& cfg) {
  nlohmann::ordered_json snap;
  snap["seed"] = cfg.seed;
  snap["config"] = cfg.raw;
  return snap;
}

}  // namespace driftscan
