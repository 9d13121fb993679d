#include "driftscan/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "driftscan/errors.hpp"

namespace driftscan {

namespace {

struct TreeBuilder {
  const Matrix& rows;
  const std::vector<int>& labels;
  int mtry;
  int max_depth;
  int min_leaf;
  std::mt19937_64& rng;
  Tree out;
  std::vector<int> feat_pool;       // shuffled prefix = candidate features
  std::vector<std::pair<double, int>> scratch;  // (value, label) sort buffer

  int make_leaf(const std::vector<size_t>& idx) {
    int ones = 0;
    for (size_t i : idx) ones += labels[i];
    TreeNode nd;
    nd.feature = -1;
    nd.vote = 2 * ones > static_cast<int>(idx.size()) ? 1 : 0;  // tie -> 0
    out.nodes.push_back(nd);
    return static_cast<int>(out.nodes.size() - 1);
  }

  int build(std::vector<size_t>& idx, int depth) {
    size_t n = idx.size();
    int ones = 0;
    for (size_t i : idx) ones += labels[i];
    bool pure = ones == 0 || ones == static_cast<int>(n);
    if (pure || n < 2 * static_cast<size_t>(min_leaf) || n < 2 ||
        (max_depth >= 0 && depth >= max_depth))
      return make_leaf(idx);

    // fresh random feature subset for this split
    size_t d = feat_pool.size();
    for (size_t i = 0; i < static_cast<size_t>(mtry) && i + 1 < d; ++i) {
      std::uniform_int_distribution<size_t> pick(i, d - 1);
      std::swap(feat_pool[i], feat_pool[pick(rng)]);
    }

    double best_gini = std::numeric_limits<double>::infinity();
    int best_f = -1;
    double best_thr = 0.0;
    for (int fi = 0; fi < mtry; ++fi) {
      int f = feat_pool[static_cast<size_t>(fi)];
      scratch.clear();
      for (size_t i : idx) scratch.emplace_back(rows[i][static_cast<size_t>(f)], labels[i]);
      std::sort(scratch.begin(), scratch.end());
      if (scratch.front().first == scratch.back().first) continue;  // constant here
      // prefix scan: consider cuts between distinct neighbor values
      double left_n = 0, left_ones = 0;
      double tot = static_cast<double>(n), tot_ones = static_cast<double>(ones);
      for (size_t i = 0; i + 1 < n; ++i) {
        left_n += 1.0;
        left_ones += scratch[i].second;
        if (scratch[i].first == scratch[i + 1].first) continue;
        double right_n = tot - left_n;
        if (left_n < min_leaf || right_n < min_leaf) continue;
        double right_ones = tot_ones - left_ones;
        double pl = left_ones / left_n, pr = right_ones / right_n;
        double gl = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl);
        double gr = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr);
        double g = (left_n * gl + right_n * gr) / tot;
        if (g < best_gini) {
          best_gini = g;
          best_f = f;
          best_thr = scratch[i].first + 0.5 * (scratch[i + 1].first - scratch[i].first);
        }
      }
    }
    if (best_f < 0) return make_leaf(idx);  // candidates were all constant

    std::vector<size_t> left_idx, right_idx;
    for (size_t i : idx) {
      if (rows[i][static_cast<size_t>(best_f)] <= best_thr) left_idx.push_back(i);
      else right_idx.push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) return make_leaf(idx);

    TreeNode nd;
    nd.feature = best_f;
    nd.threshold = best_thr;
    int self = static_cast<int>(out.nodes.size());
    out.nodes.push_back(nd);
    idx.clear();
    idx.shrink_to_fit();
    int l = build(left_idx, depth + 1);
    int r = build(right_idx, depth + 1);
    out.nodes[static_cast<size_t>(self)].left = l;
    out.nodes[static_cast<size_t>(self)].right = r;
    return self;
  }
};

uint64_t tree_seed(uint64_t base, int tree_index) {
  // distinct, deterministic streams per tree
  return base + 0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(tree_index + 1);
}

}  // namespace

bool ForestModel::uses_feature(int j) const {
  for (const Tree& t : trees)
    for (const TreeNode& nd : t.nodes)
      if (nd.feature == j) return true;
  return false;
}

ForestModel train_forest(const Matrix& rows, const std::vector<int>& labels,
                         const std::vector<std::string>& feature_names,
                         const ForestConfig& cfg) {
  if (rows.size() != labels.size())
    throw DataError("train_forest: rows and labels differ in length");
  if (rows.size() < 2) throw DataError("train_forest: need at least 2 records");
  if (cfg.n_trees < 1) throw ConfigError("train_forest: n_trees must be at least 1");
  if (cfg.min_leaf < 1) throw ConfigError("train_forest: min_leaf must be at least 1");
  size_t d = feature_names.size();
  if (d == 0 || rows[0].size() != d)
    throw DataError("train_forest: feature_names do not match row width");
  {
    int ones = 0;
    for (int l : labels) {
      if (l != 0 && l != 1) throw DataError("train_forest: label outside {0,1}");
      ones += l;
    }
    if (ones == 0 || ones == static_cast<int>(labels.size()))
      throw DataError("train_forest: training window contains a single class");
  }

  int mtry = cfg.features_per_split > 0
                 ? std::min<int>(cfg.features_per_split, static_cast<int>(d))
                 : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  ForestModel model;
  model.feature_names = feature_names;
  model.trees.resize(static_cast<size_t>(cfg.n_trees));
  size_t n = rows.size();
  for (int t = 0; t < cfg.n_trees; ++t) {
    std::mt19937_64 rng(tree_seed(cfg.seed, t));
    std::vector<size_t> boot(n);
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    for (size_t i = 0; i < n; ++i) boot[i] = pick(rng);
    TreeBuilder builder{rows, labels, mtry, cfg.max_depth, cfg.min_leaf, rng, {}, {}, {}};
    builder.feat_pool.resize(d);
    std::iota(builder.feat_pool.begin(), builder.feat_pool.end(), 0);
    builder.build(boot, 0);
    model.trees[static_cast<size_t>(t)] = std::move(builder.out);
  }
  return model;
}

std::vector<double> predict_proba(const ForestModel& model, const Matrix& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() != model.feature_names.size())
      throw DataError("predict_proba: row width does not match the model");
    out.push_back(model.predict_one(row.data()));
  }
  return out;
}

nlohmann::ordered_json forest_to_json(const ForestModel& model) {
  nlohmann::ordered_json j;
  j["format"] = "driftscan-forest";
  j["version"] = 1;
  j["feature_names"] = model.feature_names;
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const Tree& t : model.trees) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const TreeNode& nd : t.nodes)
      nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.vote});
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j;
}

ForestModel forest_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "driftscan-forest")
    throw DataError("forest_from_json: not a forest document");
  if (j.value("version", 0) != 1)
    throw DataError("forest_from_json: unsupported version " +
                    std::to_string(j.value("version", 0)));
  ForestModel model;
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const auto& tj : j.at("trees")) {
    Tree t;
    for (const auto& nj : tj) {
      TreeNode nd;
      nd.feature = nj.at(0).get<int>();
      nd.threshold = nj.at(1).get<double>();
      nd.left = nj.at(2).get<int>();
      nd.right = nj.at(3).get<int>();
      nd.vote = nj.at(4).get<int>();
      t.nodes.push_back(nd);
    }
    if (t.nodes.empty()) throw DataError("forest_from_json: empty tree");
    model.trees.push_back(std::move(t));
  }
  if (model.trees.empty()) throw DataError("forest_from_json: no trees");
  return model;
}

std::vector<ForestModel> train_repeated(const Matrix& train_rows,
                                        const std::vector<int>& train_labels,
                                        const std::vector<std::string>& feature_names,
                                        int r, const ForestConfig& cfg) {
  if (r < 2) throw ConfigError("train_repeated: need at least 2 repetitions");
  std::vector<ForestModel> forests;
  forests.reserve(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) {
    ForestConfig c = cfg;
    c.seed = cfg.seed + static_cast<uint64_t>(i);
    forests.push_back(train_forest(train_rows, train_labels, feature_names, c));
  }
  return forests;
}

PredictionSet repeated_predict_with(const std::vector<ForestModel>& forests,
                                    const Group& test) {
  PredictionSet ps;
  ps.group_index = test.index;
  ps.labeled = !test.labels.empty();
  ps.labels = test.labels;
  ps.matrix.assign(test.rows.size(), std::vector<double>(forests.size(), 0.0));
  for (size_t run = 0; run < forests.size(); ++run) {
    for (size_t i = 0; i < test.rows.size(); ++i)
      ps.matrix[i][run] = forests[run].predict_one(test.rows[i].data());
  }
  return ps;
}

PredictionSet repeated_predict(const Matrix& train_rows, const std::vector<int>& train_labels,
                               const std::vector<std::string>& feature_names,
                               const Group& test, int r, const ForestConfig& cfg) {
  return repeated_predict_with(train_repeated(train_rows, train_labels, feature_names, r, cfg),
                               test);
}

}  // namespace driftscan
