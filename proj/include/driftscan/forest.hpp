#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftscan/stats.hpp"   // Matrix
#include "driftscan/stream.hpp"  // Group

namespace driftscan {

struct ForestConfig {
  int n_trees = 100;
  int max_depth = -1;          // -1 = grow until pure / too small
  int min_leaf = 1;            // minimum records per child
  int features_per_split = 0;  // 0 = ceil(sqrt(d))
  uint64_t seed = 0;
};

// Flat binary tree; feature < 0 marks a leaf carrying the majority vote
// (ties go to class 0). Internal nodes route row[feature] <= threshold left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int vote = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  int predict(const double* row) const {
    int cur = 0;
    while (nodes[static_cast<size_t>(cur)].feature >= 0) {
      const TreeNode& nd = nodes[static_cast<size_t>(cur)];
      cur = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<size_t>(cur)].vote;
  }
};

struct ForestModel {
  std::vector<Tree> trees;
  std::vector<std::string> feature_names;

  // Fraction of trees voting class 1.
  double predict_one(const double* row) const {
    int ones = 0;
    for (const Tree& t : trees) ones += t.predict(row);
    return static_cast<double>(ones) / static_cast<double>(trees.size());
  }
  bool uses_feature(int j) const;
};

// Bagged Gini decision trees: bootstrap of size n per tree, a fresh random
// feature subset at every split, midpoint thresholds. Requires both classes
// in the training window.
ForestModel train_forest(const Matrix& rows, const std::vector<int>& labels,
                         const std::vector<std::string>& feature_names,
                         const ForestConfig& cfg);

std::vector<double> predict_proba(const ForestModel& model, const Matrix& rows);

// Versioned round-trip serialization.
nlohmann::ordered_json forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const nlohmann::json& j);

// One test group scored by r independently seeded forests (seed, seed+1, ...):
// matrix cell [i][run] is the class-1 probability of record i under run.
struct PredictionSet {
  int group_index = 0;
  Matrix matrix;  // n_records x r
  std::vector<int> labels;
  bool labeled = false;
};

PredictionSet repeated_predict(const Matrix& train_rows, const std::vector<int>& train_labels,
                               const std::vector<std::string>& feature_names,
                               const Group& test, int r, const ForestConfig& cfg);

// The r forests behind repeated_predict, reusable across many test groups.
std::vector<ForestModel> train_repeated(const Matrix& train_rows,
                                        const std::vector<int>& train_labels,
                                        const std::vector<std::string>& feature_names,
                                        int r, const ForestConfig& cfg);

PredictionSet repeated_predict_with(const std::vector<ForestModel>& forests,
                                    const Group& test);

}  // namespace driftscan
