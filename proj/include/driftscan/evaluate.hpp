#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftscan/stats.hpp"
#include "driftscan/stream.hpp"

namespace driftscan {

// Ground-truth (or agreed reference) drift positions, in commit units.
struct ReferenceDrifts {
  std::string dataset;
  std::vector<long long> points;
  std::string source;  // "synthetic", "baseline:<id>", ...
};

struct MatchResult {
  std::vector<std::pair<long long, long long>> matches;  // (detected, reference)
  std::vector<long long> misses;                         // unmatched reference points
  std::vector<long long> false_alarms;                   // unmatched detections
};

// Greedy chronological one-to-one matching: each reference point takes the
// earliest unused detection d with ref <= d <= ref + tolerance.
MatchResult match_drifts(const std::vector<long long>& detected,
                         const std::vector<long long>& reference, long long tolerance);

struct EvalScores {
  double cdd_accuracy = 1.0;
  double mdr = 0.0;
  double mtd = 0.0;
  bool mtd_defined = true;  // false when nothing matched
  double mtfa = 0.0;
  double mtr = 0.0;
  bool mtr_infinite = false;  // mtd was exactly zero
  int matches = 0;
  int misses = 0;
  int false_alarms = 0;
};

// cdd_accuracy = matched / |reference| (empty reference: 1 without false
// alarms, else 0); mdr = 1 - cdd_accuracy; mtd = mean detection delay over
// matches (undefined marker when none); mtfa = mean gap between false alarms
// with the series boundaries as virtual endpoints (= length/(count+1));
// mtr = mtfa/mtd * (1 - mdr), with an infinity marker when mtd = 0 and 0
// when mtd is undefined.
EvalScores score(const MatchResult& m, size_t reference_count, long long series_length);

nlohmann::ordered_json scores_to_json(const EvalScores& s);

// Friedman mean ranks over a datasets-by-methods score matrix.
struct RankTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  Matrix values;  // datasets x methods, NaN = missing
  FriedmanResult friedman;
};

RankTable rank_methods(const std::vector<std::string>& methods,
                       const std::vector<std::string>& datasets, const Matrix& values,
                       RankDirection direction);

// ---- synthetic streams ----------------------------------------------------

enum class DriftKind { feature_shift, label_flip, imbalance_shift };

DriftKind drift_kind_from_string(const std::string& s);
std::string drift_kind_to_string(DriftKind k);

struct DriftSpec {
  int n_groups = 40;
  int group_size = 100;
  int n_features = 6;
  std::vector<int> drift_points;   // group indices, each in (0, n_groups)
  std::vector<DriftKind> kinds;    // parallel to drift_points
  double magnitude = 3.0;          // feature-shift size in feature stddevs
  double base_defect_rate = 0.35;  // class-1 prevalence
  uint64_t seed = 0;
};

// Piecewise-stationary labeled stream: features are unit-variance Gaussians
// around a regime mean; the label rule thresholds the regime-standardized
// feature sum at the prevalence quantile. feature_shift moves every feature
// mean by +magnitude (the rule follows the regime, so the feature-to-label
// map changes); label_flip inverts the rule output; imbalance_shift changes
// the prevalence.
std::pair<CommitStream, ReferenceDrifts> synth_stream(const DriftSpec& spec);

// Drift positions in commit units (group index * group_size).
std::vector<long long> drift_commits_of(const DriftSpec& spec);

}  // namespace driftscan
