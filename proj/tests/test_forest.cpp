#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "driftscan/errors.hpp"
#include "driftscan/forest.hpp"

using namespace driftscan;

namespace {

// Two well-separated Gaussian blobs; class follows the blob.
void make_blobs(size_t n, uint64_t seed, Matrix& rows, std::vector<int>& labels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  rows.clear();
  labels.clear();
  for (size_t i = 0; i < n; ++i) {
    int cls = static_cast<int>(i % 2);
    double cx = cls == 1 ? 6.0 : -6.0;
    rows.push_back({cx + g(rng), cx + g(rng), g(rng)});
    labels.push_back(cls);
  }
}

// Labels independent of features: a fair coin.
void make_noise(size_t n, uint64_t seed, Matrix& rows, std::vector<int>& labels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  rows.clear();
  labels.clear();
  for (size_t i = 0; i < n; ++i) {
    rows.push_back({g(rng), g(rng), g(rng)});
    labels.push_back(coin(rng) ? 1 : 0);
  }
}

double held_out_accuracy(const ForestModel& m, const Matrix& rows,
                         const std::vector<int>& labels) {
  int hits = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    int pred = m.predict_one(rows[i].data()) > 0.5 ? 1 : 0;
    if (pred == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

const std::vector<std::string> kNames3 = {"f1", "f2", "f3"};

}  // namespace

TEST_CASE("the ensemble separates well-separated classes") {
  Matrix train, test;
  std::vector<int> train_labels, test_labels;
  make_blobs(400, 1, train, train_labels);
  make_blobs(200, 2, test, test_labels);
  ForestConfig cfg;
  cfg.n_trees = 50;
  cfg.seed = 7;
  ForestModel m = train_forest(train, train_labels, kNames3, cfg);
  CHECK(held_out_accuracy(m, test, test_labels) >= 0.95);
}

TEST_CASE("held-out probability stays near one half on coin-flip labels") {
  Matrix train, test;
  std::vector<int> train_labels, test_labels;
  make_noise(600, 3, train, train_labels);
  make_noise(300, 4, test, test_labels);
  ForestConfig cfg;
  cfg.n_trees = 60;
  cfg.seed = 11;
  ForestModel m = train_forest(train, train_labels, kNames3, cfg);
  double acc = held_out_accuracy(m, test, test_labels);
  CHECK(acc >= 0.4);
  CHECK(acc <= 0.6);
}

TEST_CASE("training is seed-deterministic") {
  // coin-flip labels force the trees to memorize bootstrap-specific noise,
  // so the bagging seed is visible in the probe predictions
  Matrix train;
  std::vector<int> labels;
  make_noise(200, 5, train, labels);
  ForestConfig cfg;
  cfg.n_trees = 20;
  cfg.seed = 42;
  ForestModel a = train_forest(train, labels, kNames3, cfg);
  ForestModel b = train_forest(train, labels, kNames3, cfg);
  REQUIRE(a.trees.size() == b.trees.size());
  Matrix probe;
  std::vector<int> probe_labels;
  make_noise(100, 6, probe, probe_labels);
  std::vector<double> pa = predict_proba(a, probe);
  std::vector<double> pb = predict_proba(b, probe);
  CHECK(pa == pb);
  cfg.seed = 43;
  ForestModel c = train_forest(train, labels, kNames3, cfg);
  CHECK(predict_proba(c, probe) != pa);  // a different seed changes the bagging
}

TEST_CASE("probabilities are tree-vote fractions") {
  Matrix train;
  std::vector<int> labels;
  make_blobs(200, 8, train, labels);
  ForestConfig cfg;
  cfg.n_trees = 40;
  cfg.seed = 1;
  ForestModel m = train_forest(train, labels, kNames3, cfg);
  Matrix probe;
  std::vector<int> probe_labels;
  make_noise(150, 9, probe, probe_labels);
  for (double p : predict_proba(m, probe)) {
    double scaled = p * 40.0;
    CHECK(std::fabs(scaled - std::round(scaled)) < 1e-9);  // integral vote count
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
  // deep in either blob the forest is unanimous
  std::vector<double> deep_pos = {8.0, 8.0, 0.0};
  std::vector<double> deep_neg = {-8.0, -8.0, 0.0};
  CHECK(m.predict_one(deep_pos.data()) == doctest::Approx(1.0));
  CHECK(m.predict_one(deep_neg.data()) == doctest::Approx(0.0));
}

TEST_CASE("serialization round-trips predictions exactly") {
  Matrix train;
  std::vector<int> labels;
  make_blobs(250, 10, train, labels);
  ForestConfig cfg;
  cfg.n_trees = 25;
  cfg.seed = 3;
  ForestModel m = train_forest(train, labels, kNames3, cfg);
  nlohmann::ordered_json j = forest_to_json(m);
  CHECK(j["format"] == "driftscan-forest");
  CHECK(j["version"] == 1);
  CHECK(j["feature_names"].size() == 3);
  ForestModel back = forest_from_json(j);
  CHECK(back.feature_names == m.feature_names);
  REQUIRE(back.trees.size() == m.trees.size());
  Matrix probe;
  std::vector<int> probe_labels;
  make_noise(120, 11, probe, probe_labels);
  CHECK(predict_proba(back, probe) == predict_proba(m, probe));

  nlohmann::json bad = j;
  bad["version"] = 99;
  CHECK_THROWS_AS(forest_from_json(bad), DataError);
  bad = j;
  bad["format"] = "something-else";
  CHECK_THROWS_AS(forest_from_json(bad), DataError);
}

TEST_CASE("feature usage is reported from the grown trees") {
  // labels depend only on feature 0; feature 2 is constant and unusable
  Matrix train;
  std::vector<int> labels;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    double x = g(rng);
    train.push_back({x, g(rng), 5.0});
    labels.push_back(x > 0.0 ? 1 : 0);
  }
  ForestConfig cfg;
  cfg.n_trees = 30;
  cfg.seed = 2;
  ForestModel m = train_forest(train, labels, kNames3, cfg);
  CHECK(m.uses_feature(0));
  CHECK(!m.uses_feature(2));  // constant column can never split
}

TEST_CASE("training validates its inputs") {
  ForestConfig cfg;
  Matrix rows = {{1, 2, 3}, {4, 5, 6}};
  CHECK_THROWS_AS(train_forest(rows, {1, 1}, kNames3, cfg), DataError);
  CHECK_THROWS_AS(train_forest(rows, {0, 0}, kNames3, cfg), DataError);
  CHECK_THROWS_AS(train_forest({}, {}, kNames3, cfg), DataError);
  CHECK_THROWS_AS(train_forest(rows, {1}, kNames3, cfg), DataError);
  ForestConfig bad;
  bad.n_trees = 0;
  CHECK_THROWS_AS(train_forest(rows, {1, 0}, kNames3, bad), ConfigError);
}

TEST_CASE("repeated scoring produces one column per run") {
  Matrix train;
  std::vector<int> train_labels;
  make_blobs(300, 14, train, train_labels);
  Group test;
  test.index = 9;
  // probe between the blobs, where bootstrap-dependent thresholds disagree
  Matrix test_rows;
  std::vector<int> test_labels;
  make_noise(80, 15, test_rows, test_labels);
  test.rows = test_rows;
  test.labels = test_labels;
  for (size_t i = 0; i < test_rows.size(); ++i) test.seqs.push_back(900 + i);

  ForestConfig cfg;
  cfg.n_trees = 15;
  cfg.seed = 100;
  PredictionSet ps = repeated_predict(train, train_labels, kNames3, test, 10, cfg);
  CHECK(ps.group_index == 9);
  CHECK(ps.labeled);
  CHECK(ps.labels == test_labels);
  REQUIRE(ps.matrix.size() == 80);
  for (const auto& row : ps.matrix) REQUIRE(row.size() == 10);

  // run columns come from independently seeded forests: the same columns
  // appear when the forests are trained once and reused
  std::vector<ForestModel> forests = train_repeated(train, train_labels, kNames3, 10, cfg);
  REQUIRE(forests.size() == 10);
  PredictionSet via = repeated_predict_with(forests, test);
  CHECK(via.matrix == ps.matrix);

  // columns are not all identical (bagging differs across runs)
  bool any_diff = false;
  for (const auto& row : ps.matrix)
    for (size_t rcol = 1; rcol < row.size(); ++rcol)
      if (row[rcol] != row[0]) any_diff = true;
  CHECK(any_diff);

  CHECK_THROWS_AS(train_repeated(train, train_labels, kNames3, 1, cfg), ConfigError);
}

TEST_CASE("stump-depth forests on separable data still agree across runs") {
  // with max_depth 1 every tree can only use one split, yet the blobs are
  // separable on either of the first two features
  Matrix train;
  std::vector<int> train_labels;
  make_blobs(300, 16, train, train_labels);
  ForestConfig cfg;
  cfg.n_trees = 30;
  cfg.max_depth = 1;
  cfg.seed = 5;
  ForestModel m = train_forest(train, train_labels, kNames3, cfg);
  for (const Tree& t : m.trees) {
    // depth limit respected: root children are leaves
    const TreeNode& root = t.nodes[0];
    if (root.feature < 0) continue;
    CHECK(t.nodes[static_cast<size_t>(root.left)].feature < 0);
    CHECK(t.nodes[static_cast<size_t>(root.right)].feature < 0);
  }
  Matrix probe;
  std::vector<int> probe_labels;
  make_blobs(100, 17, probe, probe_labels);
  CHECK(held_out_accuracy(m, probe, probe_labels) >= 0.95);
}
