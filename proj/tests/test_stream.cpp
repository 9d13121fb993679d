#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "driftscan/errors.hpp"
#include "driftscan/stream.hpp"

using namespace driftscan;
namespace fs = std::filesystem;

namespace {

fs::path fixture_dir() {
  fs::path dir = fs::temp_directory_path() / "driftscan_stream_fixtures";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  fs::path p = fixture_dir() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

CommitStream make_stream(const std::vector<std::string>& names, const Matrix& rows,
                         const std::vector<int>& labels = {}) {
  CommitStream cs;
  cs.name = "inline";
  cs.feature_names = names;
  cs.rows = rows;
  cs.labels = labels;
  cs.labeled = !labels.empty();
  return cs;
}

}  // namespace

TEST_CASE("load_csv reads a labeled stream with schema and seq validation") {
  fs::path p = write_file("basic.csv",
                          "seq,ns,nf,entropy,fix,bug\n"
                          "1, 2, 3, 0.5, 0, 0\n"
                          "2, 4, 1, 0.0, 1, 1\n"
                          "5, 1, 2, 1.0, 0, true\n"
                          "9, 3, 2, 0.25, 1, false\n");
  CommitStream cs = load_csv(p.string(), {"ns", "nf", "entropy", "fix"}, "bug");
  CHECK(cs.name == "basic");
  CHECK(cs.labeled);
  REQUIRE(cs.n() == 4);
  REQUIRE(cs.d() == 4);
  CHECK(cs.feature_names == std::vector<std::string>{"ns", "nf", "entropy", "fix"});
  CHECK(cs.rows[0] == std::vector<double>{2, 3, 0.5, 0});
  CHECK(cs.rows[2] == std::vector<double>{1, 2, 1.0, 0});
  CHECK(cs.labels == std::vector<int>{0, 1, 1, 0});
  // seq is not a feature
  CHECK(cs.find_feature("seq") == -1);
  CHECK(cs.find_feature("entropy") == 2);
}

TEST_CASE("load_csv skips comment lines so its own outputs round-trip") {
  fs::path p = write_file("commented.csv",
                          "# config {\"seed\":5}\n"
                          "f1,f2,label\n"
                          "0.5,1.5,0\n"
                          "# stray note\n"
                          "2.5,3.5,1\n");
  CommitStream cs = load_csv(p.string(), {}, "label");
  CHECK(cs.feature_names == std::vector<std::string>{"f1", "f2"});
  REQUIRE(cs.n() == 2);
  CHECK(cs.rows[1] == std::vector<double>{2.5, 3.5});
  CHECK(cs.labels == std::vector<int>{0, 1});

  fs::path only_comments = write_file("only_comments.csv", "# one\n# two\n");
  CHECK_THROWS_AS(load_csv(only_comments.string(), {}, ""), DataError);
}

TEST_CASE("load_csv without a schema takes every non-label non-seq column") {
  fs::path p = write_file("auto.csv",
                          "seq,a,b,bug\n"
                          "1,1.5,2.5,0\n"
                          "2,3.5,4.5,1\n");
  CommitStream cs = load_csv(p.string(), {}, "bug");
  CHECK(cs.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(cs.labels == std::vector<int>{0, 1});

  CommitStream unlabeled = load_csv(p.string(), {}, "");
  CHECK(!unlabeled.labeled);
  CHECK(unlabeled.feature_names == std::vector<std::string>{"a", "b", "bug"});
}

TEST_CASE("load_csv reports the offending row and column on parse errors") {
  fs::path p = write_file("bad_cell.csv",
                          "ns,nf,bug\n"
                          "1,2,0\n"
                          "3,oops,1\n");
  try {
    load_csv(p.string(), {"ns", "nf"}, "bug");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("column nf") != std::string::npos);
    CHECK(msg.find("oops") != std::string::npos);
  }
}

TEST_CASE("load_csv rejects structural problems") {
  fs::path p = write_file("struct.csv",
                          "ns,nf,bug\n"
                          "1,2,0\n");
  CHECK_THROWS_AS(load_csv(p.string(), {"ns", "missing_col"}, "bug"), DataError);
  CHECK_THROWS_AS(load_csv(p.string(), {}, "no_such_label"), DataError);
  CHECK_THROWS_AS(load_csv((fixture_dir() / "nope.csv").string(), {}, ""), DataError);

  fs::path ragged = write_file("ragged.csv",
                               "ns,nf,bug\n"
                               "1,2,0\n"
                               "1,2\n");
  CHECK_THROWS_AS(load_csv(ragged.string(), {}, "bug"), DataError);

  fs::path empty = write_file("empty.csv", "");
  CHECK_THROWS_AS(load_csv(empty.string(), {}, ""), DataError);

  fs::path header_only = write_file("header_only.csv", "ns,nf\n");
  CHECK_THROWS_AS(load_csv(header_only.string(), {}, ""), DataError);
}

TEST_CASE("load_csv enforces binary labels and increasing seq") {
  fs::path bad_label = write_file("bad_label.csv",
                                  "ns,bug\n"
                                  "1,0\n"
                                  "2,2\n");
  try {
    load_csv(bad_label.string(), {}, "bug");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("binary label") != std::string::npos);
  }

  fs::path bad_seq = write_file("bad_seq.csv",
                                "seq,ns\n"
                                "1,5\n"
                                "3,6\n"
                                "3,7\n");
  try {
    load_csv(bad_seq.string(), {}, "");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("seq") != std::string::npos);
  }
}

TEST_CASE("entropy normalization divides by log2 of the file count") {
  CommitStream cs = make_stream({"entropy", "nf", "other"},
                                {{1.0, 2.0, 5.0},
                                 {2.0, 4.0, 6.0},
                                 {0.9, 1.0, 7.0},
                                 {3.0, 8.0, 8.0}});
  CommitStream out = normalize_entropy(cs);
  CHECK(out.rows[0][0] == doctest::Approx(1.0).epsilon(1e-12));  // 1/log2(2)
  CHECK(out.rows[1][0] == doctest::Approx(1.0).epsilon(1e-12));  // 2/log2(4)
  CHECK(out.rows[2][0] == doctest::Approx(0.0));                 // nf <= 1 -> 0
  CHECK(out.rows[3][0] == doctest::Approx(1.0).epsilon(1e-12));  // 3/log2(8)
  // companions untouched
  for (size_t i = 0; i < cs.n(); ++i) {
    CHECK(out.rows[i][1] == cs.rows[i][1]);
    CHECK(out.rows[i][2] == cs.rows[i][2]);
  }
  CommitStream no_nf = make_stream({"entropy", "x"}, {{1, 2}});
  CHECK_THROWS_AS(normalize_entropy(no_nf), DataError);
}

TEST_CASE("correlation pruning drops the higher-mean member, tie to later column") {
  // f2 duplicates f1's ranks except one swap, f3 except another; f2 carries
  // the largest mean absolute correlation and goes first, then the f1/f3 tie
  // resolves toward the later column.
  Matrix rows;
  std::vector<double> f1 = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> f2 = {2, 1, 3, 4, 5, 6, 7, 8};
  std::vector<double> f3 = {2, 1, 3, 4, 5, 6, 8, 7};
  for (size_t i = 0; i < 8; ++i) rows.push_back({f1[i], f2[i], f3[i]});
  CommitStream cs = make_stream({"f1", "f2", "f3"}, rows);
  auto [pruned, removed] = spearman_prune(cs, 0.7);
  CHECK(removed == std::vector<std::string>{"f2", "f3"});
  CHECK(pruned.feature_names == std::vector<std::string>{"f1"});
  REQUIRE(pruned.n() == 8);
  CHECK(pruned.rows[4] == std::vector<double>{5});
}

TEST_CASE("correlation pruning keeps weakly related features and is idempotent") {
  Matrix rows;
  std::vector<double> a = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> b = {2, 4, 6, 8, 10, 12, 14, 16};  // same ranks as a
  std::vector<double> c = {5, 1, 4, 2, 8, 3, 7, 6};      // |rho| to a is 20/42
  for (size_t i = 0; i < 8; ++i) rows.push_back({a[i], b[i], c[i]});
  CommitStream cs = make_stream({"a", "b", "c"}, rows);
  auto [pruned, removed] = spearman_prune(cs, 0.7);
  CHECK(removed == std::vector<std::string>{"b"});  // tie with a -> later column
  CHECK(pruned.feature_names == std::vector<std::string>{"a", "c"});
  auto [again, removed2] = spearman_prune(pruned, 0.7);
  CHECK(removed2.empty());
  CHECK(again.feature_names == pruned.feature_names);
  CHECK_THROWS_AS(spearman_prune(cs, 0.0), ConfigError);
}

TEST_CASE("z-scoring uses population variance over the fit window only") {
  CommitStream cs = make_stream({"x", "Fix"},
                                {{1, 1}, {2, 0}, {3, 1}, {100, 0}});
  CommitStream out = zscore_scale(cs, 0, 3);
  double unit = std::sqrt(3.0 / 2.0);  // 1 / population sd of {1,2,3}
  CHECK(out.rows[0][0] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(out.rows[1][0] == doctest::Approx(0.0));
  CHECK(out.rows[2][0] == doctest::Approx(1.224744871391589).epsilon(1e-12));
  // the out-of-window record is scaled by window statistics, not its own
  CHECK(out.rows[3][0] == doctest::Approx(98.0 * unit).epsilon(1e-12));
  // the boolean indicator column is untouched, case-insensitively
  for (size_t i = 0; i < cs.n(); ++i) CHECK(out.rows[i][1] == cs.rows[i][1]);
}

TEST_CASE("z-scoring zeroes constant features and validates the window") {
  CommitStream cs = make_stream({"x"}, {{7}, {7}, {7}});
  CommitStream out = zscore_scale(cs, 0, 3);
  for (const auto& row : out.rows) CHECK(row[0] == 0.0);
  CHECK_THROWS_AS(zscore_scale(cs, 2, 2), ConfigError);
  CHECK_THROWS_AS(zscore_scale(cs, 0, 4), ConfigError);
}

TEST_CASE("the fit window excludes later records entirely") {
  // doubling a record after the window must not change scaled outputs
  CommitStream base = make_stream({"x"}, {{1}, {2}, {3}, {4}, {50}});
  CommitStream tweaked = base;
  tweaked.rows[4][0] = 5000.0;
  CommitStream a = zscore_scale(base, 0, 4);
  CommitStream b = zscore_scale(tweaked, 0, 4);
  for (size_t i = 0; i < 4; ++i)
    CHECK(a.rows[i][0] == doctest::Approx(b.rows[i][0]).epsilon(1e-15));
}

TEST_CASE("chunking produces full groups and drops the remainder") {
  Matrix rows;
  std::vector<int> labels;
  for (int i = 0; i < 950; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i % 2);
  }
  CommitStream cs = make_stream({"x"}, rows, labels);
  GroupedStream gs = chunk_groups(cs, 100, 5, 1);
  CHECK(gs.n_groups() == 9);
  CHECK(gs.dropped_records == 50);
  CHECK(gs.first_test_group() == 6);
  CHECK(gs.group_size == 100);
  CHECK(gs.groups[3].index == 3);
  CHECK(gs.groups[3].rows[0][0] == doctest::Approx(300.0));
  CHECK(gs.groups[3].seqs[0] == 300);
  CHECK(gs.groups[3].seqs[99] == 399);
  CHECK(gs.groups[3].labels.size() == 100);

  Matrix train;
  std::vector<int> train_labels;
  training_window(gs, train, train_labels);
  CHECK(train.size() == 500);
  CHECK(train_labels.size() == 500);
  CHECK(train[499][0] == doctest::Approx(499.0));
}

TEST_CASE("chunking refuses streams too short for train, gap, and test") {
  Matrix rows;
  for (int i = 0; i < 650; ++i) rows.push_back({static_cast<double>(i)});
  CommitStream cs = make_stream({"x"}, rows);
  try {
    chunk_groups(cs, 100, 5, 1);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("650") != std::string::npos);
    CHECK(msg.find("700") != std::string::npos);  // minimum record count named
  }
  CHECK_THROWS_AS(chunk_groups(cs, 1, 1, 1), ConfigError);
  CHECK_THROWS_AS(chunk_groups(cs, 100, 0, 1), ConfigError);
  CHECK_THROWS_AS(chunk_groups(cs, 100, 1, -1), ConfigError);
}

TEST_CASE("the grouping manifest captures the layout") {
  Matrix rows;
  std::vector<int> labels;
  for (int i = 0; i < 430; ++i) {
    rows.push_back({static_cast<double>(i), 1.0});
    labels.push_back(0);
  }
  CommitStream cs = make_stream({"x", "y"}, rows, labels);
  cs.name = "demo";
  GroupedStream gs = chunk_groups(cs, 100, 2, 1);
  nlohmann::ordered_json j = grouping_manifest(gs);
  CHECK(j["dataset"] == "demo");
  CHECK(j["group_size"] == 100);
  CHECK(j["n_groups"] == 4);
  CHECK(j["train_groups"] == 2);
  CHECK(j["vl_gap_groups"] == 1);
  CHECK(j["first_test_group"] == 3);
  CHECK(j["dropped_records"] == 30);
  CHECK(j["labeled"] == true);
  CHECK(j["feature_names"].size() == 2);
}
