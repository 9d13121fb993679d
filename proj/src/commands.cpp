#include "driftscan/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "driftscan/detect.hpp"
#include "driftscan/errors.hpp"
#include "driftscan/evaluate.hpp"
#include "driftscan/smote.hpp"

namespace fs = std::filesystem;

namespace driftscan {

namespace {

nlohmann::ordered_json run_snapshot(const RunConfig& cfg, const std::string& command) {
  nlohmann::ordered_json snap = config_snapshot(cfg);
  snap["command"] = command;
  return snap;
}

std::string csv_config_line(const nlohmann::ordered_json& snap) {
  return "# config " + snap.dump() + "\n";
}

std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// ---- detect helpers -------------------------------------------------------

struct DatasetModels {
  Matrix train_rows;
  std::vector<int> train_labels;
  std::optional<ForestModel> plain;
  std::optional<Matrix> reb_rows;
  std::optional<std::vector<int>> reb_labels;
  std::optional<ForestModel> rebalanced;
};

const ForestModel& plain_model(DatasetModels& dm, const GroupedStream& gs,
                               const RunConfig& cfg) {
  if (!dm.plain)
    dm.plain = train_forest(dm.train_rows, dm.train_labels, gs.feature_names, cfg.forest);
  return *dm.plain;
}

void ensure_rebalanced_window(DatasetModels& dm, const RunConfig& cfg) {
  if (!dm.reb_rows) {
    auto [rows, labels] = smote(dm.train_rows, dm.train_labels, cfg.smote_cfg);
    dm.reb_rows = std::move(rows);
    dm.reb_labels = std::move(labels);
  }
}

const ForestModel& rebalanced_model(DatasetModels& dm, const GroupedStream& gs,
                                    const RunConfig& cfg) {
  ensure_rebalanced_window(dm, cfg);
  if (!dm.rebalanced)
    dm.rebalanced =
        train_forest(*dm.reb_rows, *dm.reb_labels, gs.feature_names, cfg.forest);
  return *dm.rebalanced;
}

void write_report_files(const std::string& dir, const DriftReport& report,
                        const DiffCountTable* table, const MonitorSeries* series,
                        const nlohmann::ordered_json& snap) {
  fs::create_directories(dir);
  nlohmann::ordered_json rj = report_to_json(report);
  // merge the run-level snapshot around the detector-level one
  nlohmann::ordered_json full = snap;
  full["detector"] = report.config_snapshot;
  rj["config_snapshot"] = full;
  atomic_write(dir + "/report.json", json_text(rj));
  if (table) {
    atomic_write(dir + "/diff_table.csv", csv_config_line(full) + table_to_csv(*table));
    nlohmann::ordered_json tj = table_to_json(*table);
    tj["config_snapshot"] = full;
    atomic_write(dir + "/diff_table.json", json_text(tj));
  }
  if (series) {
    atomic_write(dir + "/monitor.csv", csv_config_line(full) + monitor_to_csv(*series));
  }
}

void run_one_detector(const std::string& id, const GroupedStream& gs, DatasetModels& dm,
                      const RunConfig& cfg, const nlohmann::ordered_json& snap,
                      const std::string& ds_dir) {
  const bool needs_model = id != "raw_base";
  if (needs_model && !gs.labeled)
    throw DataError("detector '" + id + "' needs a labeled dataset, '" + gs.dataset +
                    "' has no label column");

  if (id == "raw_base") {
    ExplainConfig ec;
    ec.method = ExplainMethod::raw;
    InterpretationResult res =
        detect_interpretation_drift(gs, nullptr, ec, cfg.ph, cfg.alpha, false);
    write_report_files(ds_dir + "/" + id, res.report, &res.table, nullptr, snap);
    return;
  }
  if (id == "IME_base" || id == "BD_base" || id == "rIME_base" || id == "rBD_base") {
    bool rebalanced = id[0] == 'r';
    bool ime = id.find("IME") != std::string::npos;
    const ForestModel& model =
        rebalanced ? rebalanced_model(dm, gs, cfg) : plain_model(dm, gs, cfg);
    const Matrix& ref_pool = rebalanced ? *dm.reb_rows : dm.train_rows;
    ExplainConfig ec;
    ec.method = ime ? ExplainMethod::ime : ExplainMethod::breakdown;
    ec.reference = cap_reference(ref_pool, cfg.reference_cap, cfg.seed);
    ec.ime_samples_per_feature = cfg.ime_samples_per_feature;
    ec.seed = cfg.seed;
    InterpretationResult res =
        detect_interpretation_drift(gs, &model, ec, cfg.ph, cfg.alpha, rebalanced);
    write_report_files(ds_dir + "/" + id, res.report, &res.table, nullptr, snap);
    return;
  }
  if (id == "Pred" || id == "Pred_c" || id == "Rpred" || id == "Rpred_c") {
    bool rebalanced = id[0] == 'R';
    bool with_label = id.size() > 2 && id.compare(id.size() - 2, 2, "_c") == 0;
    const Matrix* rows = &dm.train_rows;
    const std::vector<int>* labels = &dm.train_labels;
    if (rebalanced) {
      ensure_rebalanced_window(dm, cfg);
      rows = &*dm.reb_rows;
      labels = &*dm.reb_labels;
    }
    InterpretationResult res =
        detect_prediction_drift(gs, *rows, *labels, cfg.repetitions, with_label,
                                cfg.forest, cfg.ph, cfg.alpha, rebalanced);
    write_report_files(ds_dir + "/" + id, res.report, &res.table, nullptr, snap);
    return;
  }
  if (is_baseline_id(id)) {
    std::string metric = baseline_metric_from_id(id);
    PerformanceResult res =
        detect_performance_drift(gs, plain_model(dm, gs, cfg), metric, cfg.ph);
    write_report_files(ds_dir + "/" + id, res.report, nullptr, &res.series, snap);
    return;
  }
  throw ConfigError("unknown detector '" + id + "'");
}

// ---- score helpers --------------------------------------------------------

struct ReferenceEntry {
  std::vector<long long> points;
  long long series_length = -1;
  std::string source;
};

std::map<std::string, ReferenceEntry> load_references(const std::vector<std::string>& files) {
  std::map<std::string, ReferenceEntry> out;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw DataError("score: cannot open reference file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("score: reference '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("dataset") || !j.contains("points"))
      throw DataError("score: reference '" + path + "' lacks 'dataset' or 'points'");
    ReferenceEntry e;
    e.points = j.at("points").get<std::vector<long long>>();
    if (!std::is_sorted(e.points.begin(), e.points.end()))
      throw DataError("score: reference points in '" + path + "' are not ascending");
    e.series_length = j.value("series_length", -1LL);
    e.source = j.value("source", "reference");
    std::string ds = j.at("dataset").get<std::string>();
    if (out.count(ds))
      throw ConfigError("score: duplicate reference for dataset '" + ds + "'");
    out[ds] = std::move(e);
  }
  return out;
}

std::vector<DriftReport> load_reports(const std::vector<std::string>& entries) {
  std::vector<std::string> files;
  for (const auto& entry : entries) {
    fs::path p(entry);
    if (fs::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& de : fs::recursive_directory_iterator(p))
        if (de.is_regular_file() && de.path().filename() == "report.json")
          found.push_back(de.path().string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(entry);
    }
  }
  std::vector<DriftReport> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw DataError("score: cannot open report '" + f + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("score: report '" + f + "' is not valid JSON: " + e.what());
    }
    try {
      out.push_back(report_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("score: report '" + f + "' is malformed: " + e.what());
    }
  }
  return out;
}

struct MeasureDef {
  const char* name;
  RankDirection direction;
};

constexpr MeasureDef kMeasures[] = {
    {"cdd_accuracy", RankDirection::higher_is_better},
    {"mdr", RankDirection::lower_is_better},
    {"mtd", RankDirection::lower_is_better},
    {"mtfa", RankDirection::higher_is_better},
    {"mtr", RankDirection::higher_is_better},
};

double measure_value(const EvalScores& s, const std::string& name) {
  if (name == "cdd_accuracy") return s.cdd_accuracy;
  if (name == "mdr") return s.mdr;
  if (name == "mtd") return s.mtd_defined ? s.mtd : std::numeric_limits<double>::quiet_NaN();
  if (name == "mtfa") return s.mtfa;
  if (name == "mtr") return s.mtr;
  throw ConfigError("unknown measure '" + name + "'");
}

}  // namespace

void atomic_write(const std::string& path, const std::string& content) {
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw DataError("write failed for '" + tmp + "'");
  }
  fs::rename(tmp, target);
}

GroupedStream prepare_dataset(const RunConfig& cfg, const DatasetConfig& ds) {
  CommitStream cs = load_csv(ds.csv, ds.schema, ds.label_column);
  cs.name = ds.name;

  const std::string& en = cfg.preprocess.entropy_normalize;
  if (en == "on") {
    cs = normalize_entropy(cs);
  } else if (en == "auto") {
    if (cs.find_feature("entropy") >= 0 && cs.find_feature("nf") >= 0)
      cs = normalize_entropy(cs);
  }

  auto [pruned, removed] = spearman_prune(cs, cfg.preprocess.spearman_threshold);
  if (!removed.empty()) {
    std::string names;
    for (const auto& r : removed) names += (names.empty() ? "" : ", ") + r;
    log_info("dataset '" + ds.name + "': pruned correlated feature(s): " + names);
  }
  cs = std::move(pruned);

  if (cfg.preprocess.scale) {
    size_t fit_end = static_cast<size_t>(cfg.grouping.train_groups) *
                     static_cast<size_t>(cfg.grouping.group_size);
    if (cs.n() < fit_end) {
      // raise the canonical sizing error
      chunk_groups(cs, cfg.grouping.group_size, cfg.grouping.train_groups,
                   cfg.grouping.vl_gap_groups);
    }
    cs = zscore_scale(cs, 0, fit_end);
  }

  return chunk_groups(cs, cfg.grouping.group_size, cfg.grouping.train_groups,
                      cfg.grouping.vl_gap_groups);
}

void cmd_synth(const RunConfig& cfg) {
  if (cfg.synth_specs.empty())
    throw ConfigError("synth: config has no 'synth' section");
  nlohmann::ordered_json snap = run_snapshot(cfg, "synth");
  for (size_t i = 0; i < cfg.synth_specs.size(); ++i) {
    const DriftSpec& spec = cfg.synth_specs[i];
    const std::string& name = cfg.synth_names[i];
    auto [cs, ref] = synth_stream(spec);
    cs.name = name;
    ref.dataset = name;

    std::ostringstream csv;
    csv << csv_config_line(snap);
    for (size_t j = 0; j < cs.feature_names.size(); ++j)
      csv << (j ? "," : "") << cs.feature_names[j];
    csv << ",label\n";
    csv.precision(17);
    for (size_t r = 0; r < cs.rows.size(); ++r) {
      for (size_t j = 0; j < cs.rows[r].size(); ++j) csv << (j ? "," : "") << cs.rows[r][j];
      csv << "," << cs.labels[r] << "\n";
    }
    std::string dir = cfg.output_dir;
    atomic_write(dir + "/" + name + ".csv", csv.str());

    nlohmann::ordered_json truth;
    truth["dataset"] = name;
    truth["points"] = ref.points;
    truth["source"] = ref.source;
    truth["series_length"] =
        static_cast<long long>(spec.n_groups) * static_cast<long long>(spec.group_size);
    nlohmann::ordered_json kinds = nlohmann::ordered_json::array();
    for (DriftKind k : spec.kinds) kinds.push_back(drift_kind_to_string(k));
    truth["kinds"] = kinds;
    truth["config_snapshot"] = snap;
    atomic_write(dir + "/" + name + "_truth.json", json_text(truth));
  }
}

void cmd_detect(const RunConfig& cfg) {
  if (cfg.datasets.empty()) throw ConfigError("detect: config has no datasets");
  if (cfg.detectors.empty()) throw ConfigError("detect: config has no detectors");
  nlohmann::ordered_json snap = run_snapshot(cfg, "detect");
  for (const DatasetConfig& ds : cfg.datasets) {
    GroupedStream gs = prepare_dataset(cfg, ds);
    std::string ds_dir = cfg.output_dir + "/" + ds.name;
    {
      nlohmann::ordered_json manifest = grouping_manifest(gs);
      manifest["config_snapshot"] = snap;
      atomic_write(ds_dir + "/grouping.json", json_text(manifest));
    }
    DatasetModels dm;
    training_window(gs, dm.train_rows, dm.train_labels);
    for (const std::string& id : cfg.detectors)
      run_one_detector(id, gs, dm, cfg, snap, ds_dir);
  }
}

void cmd_baseline(const RunConfig& cfg) {
  if (cfg.datasets.empty()) throw ConfigError("baseline: config has no datasets");
  nlohmann::ordered_json snap = run_snapshot(cfg, "baseline");
  for (const DatasetConfig& ds : cfg.datasets) {
    GroupedStream gs = prepare_dataset(cfg, ds);
    if (!gs.labeled)
      throw DataError("baseline: dataset '" + ds.name + "' has no label column");
    std::string ds_dir = cfg.output_dir + "/" + ds.name;
    DatasetModels dm;
    training_window(gs, dm.train_rows, dm.train_labels);
    const ForestModel& model = plain_model(dm, gs, cfg);
    for (const std::string& metric : cfg.baseline_metrics) {
      PerformanceResult res = detect_performance_drift(gs, model, metric, cfg.ph);
      std::string dir = ds_dir + "/" + res.report.detector_id;
      write_report_files(dir, res.report, nullptr, &res.series, snap);
      // single-row table of the detected drift commit positions
      std::ostringstream pts;
      pts << csv_config_line(snap) << "dataset";
      for (size_t i = 0; i < res.report.drift_commits.size(); ++i)
        pts << ",drift_" << (i + 1);
      pts << "\n" << ds.name;
      for (long long c : res.report.drift_commits) pts << "," << c;
      pts << "\n";
      atomic_write(dir + "/points.csv", pts.str());
    }
  }
}

void cmd_score(const RunConfig& cfg) {
  const ScoreOptions& so = cfg.score_opts;
  if (so.reports.empty()) throw ConfigError("score: config lists no reports");
  if (so.references.empty()) throw ConfigError("score: config lists no references");

  std::map<std::string, ReferenceEntry> refs = load_references(so.references);
  std::vector<DriftReport> reports = load_reports(so.reports);
  if (reports.empty()) throw DataError("score: no reports found");

  long long tolerance = so.tolerance_commits >= 0
                            ? so.tolerance_commits
                            : static_cast<long long>(so.tolerance_groups) *
                                  static_cast<long long>(so.group_size);

  std::set<std::string> dataset_set;
  std::set<std::string> method_set;
  std::map<std::pair<std::string, std::string>, const DriftReport*> by_cell;
  for (const auto& r : reports) {
    dataset_set.insert(r.dataset);
    method_set.insert(r.detector_id);
    auto key = std::make_pair(r.dataset, r.detector_id);
    if (by_cell.count(key))
      throw DataError("score: duplicate report for dataset '" + r.dataset +
                      "', detector '" + r.detector_id + "'");
    by_cell[key] = &r;
  }
  std::vector<std::string> datasets(dataset_set.begin(), dataset_set.end());
  std::vector<std::string> methods;
  if (!so.methods.empty()) {
    methods = so.methods;
  } else {
    methods.assign(method_set.begin(), method_set.end());
  }

  for (const auto& ds : datasets)
    if (!refs.count(ds))
      throw ConfigError("score: no reference drifts for dataset '" + ds + "'");

  nlohmann::ordered_json snap = run_snapshot(cfg, "score");
  nlohmann::ordered_json cells = nlohmann::ordered_json::object();
  std::map<std::string, Matrix> values;
  for (const auto& m : kMeasures)
    values[m.name].assign(datasets.size(), std::vector<double>(methods.size(), 0.0));

  for (size_t di = 0; di < datasets.size(); ++di) {
    const std::string& ds = datasets[di];
    const ReferenceEntry& ref = refs.at(ds);
    if (ref.series_length <= 0)
      throw ConfigError("score: reference for dataset '" + ds +
                        "' lacks a positive series_length");
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (size_t mi = 0; mi < methods.size(); ++mi) {
      auto it = by_cell.find(std::make_pair(ds, methods[mi]));
      if (it == by_cell.end()) {
        log_warn("score: no report for dataset '" + ds + "', method '" + methods[mi] +
                 "'; cell left undefined");
        for (const auto& m : kMeasures)
          values[m.name][di][mi] = std::numeric_limits<double>::quiet_NaN();
        row[methods[mi]] = nullptr;
        continue;
      }
      MatchResult mr = match_drifts(it->second->drift_commits, ref.points, tolerance);
      EvalScores sc = score(mr, ref.points.size(), ref.series_length);
      for (const auto& m : kMeasures) values[m.name][di][mi] = measure_value(sc, m.name);
      row[methods[mi]] = scores_to_json(sc);
    }
    cells[ds] = std::move(row);
  }

  nlohmann::ordered_json out;
  out["command"] = "score";
  out["tolerance_commits"] = tolerance;
  out["datasets"] = datasets;
  out["methods"] = methods;
  out["cells"] = cells;
  nlohmann::ordered_json measures = nlohmann::ordered_json::object();

  for (const auto& m : kMeasures) {
    const Matrix& mat = values[m.name];
    nlohmann::ordered_json mj;
    mj["direction"] =
        m.direction == RankDirection::lower_is_better ? "lower_is_better" : "higher_is_better";
    nlohmann::ordered_json vals = nlohmann::ordered_json::array();
    for (const auto& r : mat) {
      nlohmann::ordered_json vr = nlohmann::ordered_json::array();
      for (double v : r) {
        if (std::isnan(v)) vr.push_back(nullptr);
        else if (std::isinf(v)) vr.push_back(v > 0 ? "infinite" : "-infinite");
        else vr.push_back(v);
      }
      vals.push_back(std::move(vr));
    }
    mj["values"] = std::move(vals);

    // Friedman mean ranks as the meanAvg footer; needs 2+ datasets and methods.
    nlohmann::ordered_json fr;
    std::vector<double> mean_ranks;
    bool ranked = false;
    if (datasets.size() >= 2 && methods.size() >= 2) {
      try {
        FriedmanResult f = friedman_ranks(mat, m.direction);
        fr["mean_ranks"] = f.mean_ranks;
        fr["statistic"] = f.statistic;
        fr["p_value"] = f.p_value;
        fr["rows_used"] = f.rows_used;
        mean_ranks = f.mean_ranks;
        ranked = true;
      } catch (const ConfigError& e) {
        log_info(std::string("score: ranking skipped for ") + m.name + ": " + e.what());
      }
    } else {
      log_info(std::string("score: ranking skipped for ") + m.name +
               ": needs at least 2 datasets and 2 methods");
    }
    mj["friedman"] = ranked ? fr : nlohmann::ordered_json();
    measures[m.name] = std::move(mj);

    std::ostringstream csv;
    csv << csv_config_line(snap) << "dataset";
    for (const auto& mm : methods) csv << "," << mm;
    csv << "\n";
    for (size_t di = 0; di < datasets.size(); ++di) {
      csv << datasets[di];
      for (size_t mi = 0; mi < methods.size(); ++mi)
        csv << "," << format_double(mat[di][mi]);
      csv << "\n";
    }
    if (ranked) {
      csv << "meanAvg";
      for (double r : mean_ranks) csv << "," << format_double(r);
      csv << "\n";
    }
    atomic_write(cfg.output_dir + "/" + m.name + ".csv", csv.str());
  }
  out["measures"] = std::move(measures);
  out["config_snapshot"] = snap;
  atomic_write(cfg.output_dir + "/scores.json", json_text(out));
}

void cmd_rank(const RunConfig& cfg) {
  if (cfg.rank_opts.scores_json.empty())
    throw ConfigError("rank: config lacks rank.scores_json");
  std::ifstream in(cfg.rank_opts.scores_json);
  if (!in)
    throw DataError("rank: cannot open scores file '" + cfg.rank_opts.scores_json + "'");
  nlohmann::json sj;
  try {
    in >> sj;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("rank: scores file is not valid JSON: " + std::string(e.what()));
  }

  std::vector<std::string> measures = cfg.rank_opts.measures;
  if (measures.empty())
    for (const auto& m : kMeasures) measures.push_back(m.name);

  std::vector<std::string> datasets, methods;
  try {
    datasets = sj.at("datasets").get<std::vector<std::string>>();
    methods = sj.at("methods").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("rank: scores file is malformed: " + std::string(e.what()));
  }

  nlohmann::ordered_json snap = run_snapshot(cfg, "rank");
  nlohmann::ordered_json out;
  out["command"] = "rank";
  out["methods"] = methods;
  nlohmann::ordered_json per_measure = nlohmann::ordered_json::object();

  for (const std::string& name : measures) {
    RankDirection dir = RankDirection::lower_is_better;
    bool known = false;
    for (const auto& m : kMeasures)
      if (name == m.name) {
        dir = m.direction;
        known = true;
      }
    if (!known) throw ConfigError("rank: unknown measure '" + name + "'");
    if (!sj.at("measures").contains(name))
      throw DataError("rank: scores file has no measure '" + name + "'");

    Matrix mat(datasets.size(), std::vector<double>(methods.size(), 0.0));
    const auto& vals = sj.at("measures").at(name).at("values");
    for (size_t di = 0; di < datasets.size(); ++di)
      for (size_t mi = 0; mi < methods.size(); ++mi) {
        const auto& cell = vals.at(di).at(mi);
        if (cell.is_null()) mat[di][mi] = std::numeric_limits<double>::quiet_NaN();
        else if (cell.is_string())
          mat[di][mi] = cell.get<std::string>() == "-infinite"
                            ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
        else mat[di][mi] = cell.get<double>();
      }

    RankTable rt = rank_methods(methods, datasets, mat, dir);
    nlohmann::ordered_json mj;
    mj["mean_ranks"] = rt.friedman.mean_ranks;
    mj["statistic"] = rt.friedman.statistic;
    mj["p_value"] = rt.friedman.p_value;
    mj["rows_used"] = rt.friedman.rows_used;
    per_measure[name] = std::move(mj);

    // method/mean-rank table, best first
    std::vector<size_t> order(methods.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
      return rt.friedman.mean_ranks[x] < rt.friedman.mean_ranks[y];
    });
    std::ostringstream csv;
    csv << csv_config_line(snap) << "method,mean_rank\n";
    for (size_t i : order)
      csv << methods[i] << "," << format_double(rt.friedman.mean_ranks[i]) << "\n";
    atomic_write(cfg.output_dir + "/rank_" + name + ".csv", csv.str());
  }
  out["measures"] = std::move(per_measure);
  out["config_snapshot"] = snap;
  atomic_write(cfg.output_dir + "/rank.json", json_text(out));
}

}  // namespace driftscan
