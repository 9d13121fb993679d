#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftscan/stats.hpp"  // Matrix

namespace driftscan {

// A chronologically ordered table of commit-level records. Row order is the
// chronology; an optional "seq" column in the source CSV is validated
// (strictly increasing) and then dropped from the features.
struct CommitStream {
  std::string name;
  std::vector<std::string> feature_names;
  Matrix rows;              // row-major, columns follow feature_names
  std::vector<int> labels;  // parallel to rows when labeled
  bool labeled = false;

  size_t n() const { return rows.size(); }
  size_t d() const { return feature_names.size(); }
  int find_feature(const std::string& name) const;
};

// Load a CSV with a header row. When schema is non-empty, exactly those
// columns are taken as features (all must exist); otherwise every column
// except label_column and "seq" becomes a feature. label_column may be
// empty for unlabeled data; label cells accept 0/1/true/false.
CommitStream load_csv(const std::string& path, const std::vector<std::string>& schema,
                      const std::string& label_column);

// Replace the "entropy" column by entropy / log2(nf) where nf > 1, else 0.
// Both columns must exist.
CommitStream normalize_entropy(const CommitStream& in);

// Iteratively drop one feature of the most-correlated pair (|spearman| >
// threshold); the dropped one has the larger mean absolute correlation to
// the remaining features, ties resolved toward the later schema position.
// Returns the pruned stream and the removed names in removal order.
std::pair<CommitStream, std::vector<std::string>> spearman_prune(const CommitStream& in,
                                                                 double threshold);

// Z-score each feature using mean/stddev (population) estimated on rows
// [fit_begin, fit_end) only, applied to all rows. The boolean "fix" column
// is left untouched; zero-variance features map to all zeros.
CommitStream zscore_scale(const CommitStream& in, size_t fit_begin, size_t fit_end);

struct Group {
  int index = 0;  // position in the chunked sequence, 0-based
  Matrix rows;
  std::vector<int> labels;
  std::vector<size_t> seqs;  // original record positions in the stream
};

struct GroupedStream {
  std::string dataset;
  std::vector<std::string> feature_names;
  bool labeled = false;
  std::vector<Group> groups;
  int group_size = 100;
  int train_groups = 1;
  int vl_gap_groups = 1;
  size_t dropped_records = 0;  // tail remainder not forming a full group

  int first_test_group() const { return train_groups + vl_gap_groups; }
  size_t n_groups() const { return groups.size(); }
};

// Split the stream into consecutive fixed-size groups; the tail remainder is
// dropped (logged). Requires at least train_groups + vl_gap_groups + 1 full
// groups, otherwise a sizing error naming the minimum record count.
GroupedStream chunk_groups(const CommitStream& in, int group_size, int train_groups,
                           int vl_gap_groups);

// Flattened records of the training window (groups [0, train_groups)).
void training_window(const GroupedStream& gs, Matrix& rows, std::vector<int>& labels);

// Machine-readable description of a grouping (sizes, windows, drop count).
nlohmann::ordered_json grouping_manifest(const GroupedStream& gs);

}  // namespace driftscan
