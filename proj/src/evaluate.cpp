#include "driftscan/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "driftscan/errors.hpp"
#include "driftscan/special.hpp"

namespace driftscan {

MatchResult match_drifts(const std::vector<long long>& detected,
                         const std::vector<long long>& reference, long long tolerance) {
  if (tolerance < 0) throw ConfigError("match_drifts: tolerance must be non-negative");
  if (!std::is_sorted(detected.begin(), detected.end()))
    throw DataError("match_drifts: detected points must be ascending");
  if (!std::is_sorted(reference.begin(), reference.end()))
    throw DataError("match_drifts: reference points must be ascending");

  MatchResult res;
  std::vector<bool> used(detected.size(), false);
  for (long long ref : reference) {
    bool matched = false;
    for (size_t i = 0; i < detected.size(); ++i) {
      if (used[i]) continue;
      if (detected[i] < ref) continue;
      if (detected[i] - ref > tolerance) break;  // ascending: nothing later fits
      used[i] = true;
      res.matches.emplace_back(detected[i], ref);
      matched = true;
      break;
    }
    if (!matched) res.misses.push_back(ref);
  }
  for (size_t i = 0; i < detected.size(); ++i)
    if (!used[i]) res.false_alarms.push_back(detected[i]);
  return res;
}

EvalScores score(const MatchResult& m, size_t reference_count, long long series_length) {
  if (series_length <= 0) throw ConfigError("score: series_length must be positive");
  if (m.matches.size() + m.misses.size() != reference_count)
    throw DataError("score: match result does not add up to the reference count");

  EvalScores s;
  s.matches = static_cast<int>(m.matches.size());
  s.misses = static_cast<int>(m.misses.size());
  s.false_alarms = static_cast<int>(m.false_alarms.size());

  if (reference_count == 0) {
    s.cdd_accuracy = m.false_alarms.empty() ? 1.0 : 0.0;
  } else {
    s.cdd_accuracy = static_cast<double>(m.matches.size()) /
                     static_cast<double>(reference_count);
  }
  s.mdr = 1.0 - s.cdd_accuracy;

  // mean gap between consecutive false alarms, the series boundaries acting
  // as virtual endpoints (so no alarms over L commits give L)
  {
    double gaps = 0.0;
    long long prev = 0;
    for (long long fa : m.false_alarms) {
      gaps += static_cast<double>(fa - prev);
      prev = fa;
    }
    gaps += static_cast<double>(series_length - prev);
    s.mtfa = gaps / static_cast<double>(m.false_alarms.size() + 1);
  }

  if (m.matches.empty()) {
    s.mtd_defined = false;
    s.mtd = std::numeric_limits<double>::quiet_NaN();
    s.mtr = 0.0;  // nothing detected in time: no restoration capability
    return s;
  }
  double acc = 0.0;
  for (const auto& [det, ref] : m.matches) acc += static_cast<double>(det - ref);
  s.mtd = acc / static_cast<double>(m.matches.size());

  if (s.mtd == 0.0) {
    s.mtr_infinite = true;
    s.mtr = std::numeric_limits<double>::infinity();
  } else {
    s.mtr = s.mtfa / s.mtd * (1.0 - s.mdr);
  }
  return s;
}

nlohmann::ordered_json scores_to_json(const EvalScores& s) {
  nlohmann::ordered_json j;
  j["cdd_accuracy"] = s.cdd_accuracy;
  j["mdr"] = s.mdr;
  if (s.mtd_defined) j["mtd"] = s.mtd;
  else j["mtd"] = nullptr;  // no match, delay undefined
  j["mtd_defined"] = s.mtd_defined;
  j["mtfa"] = s.mtfa;
  if (s.mtr_infinite) j["mtr"] = "infinite";
  else j["mtr"] = s.mtr;
  j["mtr_infinite"] = s.mtr_infinite;
  j["matches"] = s.matches;
  j["misses"] = s.misses;
  j["false_alarms"] = s.false_alarms;
  return j;
}

RankTable rank_methods(const std::vector<std::string>& methods,
                       const std::vector<std::string>& datasets, const Matrix& values,
                       RankDirection direction) {
  if (methods.size() < 2) throw ConfigError("rank_methods: need at least 2 methods");
  if (datasets.size() < 2) throw ConfigError("rank_methods: need at least 2 datasets");
  if (values.size() != datasets.size())
    throw DataError("rank_methods: values row count does not match datasets");
  for (const auto& row : values)
    if (row.size() != methods.size())
      throw DataError("rank_methods: values column count does not match methods");
  RankTable t;
  t.methods = methods;
  t.datasets = datasets;
  t.values = values;
  t.friedman = friedman_ranks(values, direction);
  return t;
}

DriftKind drift_kind_from_string(const std::string& s) {
  if (s == "feature_shift") return DriftKind::feature_shift;
  if (s == "label_flip") return DriftKind::label_flip;
  if (s == "imbalance_shift") return DriftKind::imbalance_shift;
  throw ConfigError("drift kind '" + s + "' is not one of feature_shift, label_flip, imbalance_shift");
}

std::string drift_kind_to_string(DriftKind k) {
  switch (k) {
    case DriftKind::feature_shift: return "feature_shift";
    case DriftKind::label_flip: return "label_flip";
    case DriftKind::imbalance_shift: return "imbalance_shift";
  }
  throw ConfigError("drift_kind_to_string: unknown kind");
}

std::vector<long long> drift_commits_of(const DriftSpec& spec) {
  std::vector<long long> out;
  out.reserve(spec.drift_points.size());
  for (int g : spec.drift_points)
    out.push_back(static_cast<long long>(g) * static_cast<long long>(spec.group_size));
  return out;
}

std::pair<CommitStream, ReferenceDrifts> synth_stream(const DriftSpec& spec) {
  if (spec.n_groups < 2) throw ConfigError("synth_stream: n_groups must be at least 2");
  if (spec.group_size < 2)
    throw ConfigError("synth_stream: group_size must be at least 2");
  if (spec.n_features < 1)
    throw ConfigError("synth_stream: n_features must be at least 1");
  if (!(spec.base_defect_rate > 0.0) || !(spec.base_defect_rate < 1.0))
    throw ConfigError("synth_stream: base_defect_rate must lie in (0,1)");
  if (spec.drift_points.size() != spec.kinds.size())
    throw ConfigError("synth_stream: drift_points and kinds differ in length");
  if (!std::is_sorted(spec.drift_points.begin(), spec.drift_points.end()))
    throw ConfigError("synth_stream: drift_points must be ascending");
  for (int p : spec.drift_points)
    if (p <= 0 || p >= spec.n_groups)
      throw ConfigError("synth_stream: drift point " + std::to_string(p) +
                        " outside (0, n_groups)");

  size_t d = static_cast<size_t>(spec.n_features);
  CommitStream cs;
  cs.name = "synth";
  cs.labeled = true;
  for (size_t j = 0; j < d; ++j) cs.feature_names.push_back("f" + std::to_string(j + 1));

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> mu(d, 0.0);
  double flip = 1.0;  // -1 after a label_flip
  double prevalence = spec.base_defect_rate;
  double q = special::normal_quantile(1.0 - prevalence);
  size_t next_drift = 0;

  for (int g = 0; g < spec.n_groups; ++g) {
    while (next_drift < spec.drift_points.size() && spec.drift_points[next_drift] == g) {
      switch (spec.kinds[next_drift]) {
        case DriftKind::feature_shift:
          for (double& m : mu) m += spec.magnitude;
          break;
        case DriftKind::label_flip:
          flip = -flip;
          break;
        case DriftKind::imbalance_shift:
          // swing the prevalence to the other side of 1/2
          prevalence = 1.0 - prevalence;
          q = special::normal_quantile(1.0 - prevalence);
          break;
      }
      ++next_drift;
    }
    for (int i = 0; i < spec.group_size; ++i) {
      std::vector<double> row(d);
      double z = 0.0;
      for (size_t j = 0; j < d; ++j) {
        double noise = gauss(rng);
        row[j] = mu[j] + noise;
        z += noise;
      }
      z /= std::sqrt(static_cast<double>(d));
      int label = z > q ? 1 : 0;
      if (flip < 0.0) label = 1 - label;
      cs.rows.push_back(std::move(row));
      cs.labels.push_back(label);
    }
  }

  ReferenceDrifts ref;
  ref.dataset = cs.name;
  ref.points = drift_commits_of(spec);
  ref.source = "synthetic";
  return {cs, ref};
}

}  // namespace driftscan
