#include "driftscan/smote.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "driftscan/errors.hpp"

namespace driftscan {

std::pair<Matrix, std::vector<int>> smote(const Matrix& rows,
                                          const std::vector<int>& labels,
                                          const SmoteConfig& cfg) {
  if (rows.size() != labels.size())
    throw DataError("smote: rows and labels differ in length");
  if (cfg.k_neighbors < 1) throw ConfigError("smote: k_neighbors must be at least 1");
  if (!(cfg.target_ratio > 0.0) || cfg.target_ratio > 1.0)
    throw ConfigError("smote: target_ratio must lie in (0,1]");

  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) pos.push_back(i);
    else if (labels[i] == 0) neg.push_back(i);
    else throw DataError("smote: label outside {0,1} at index " + std::to_string(i));
  }
  if (pos.empty() || neg.empty())
    throw DataError("smote: training window contains a single class");

  int minority_label = pos.size() <= neg.size() ? 1 : 0;
  std::vector<size_t>& minority = minority_label == 1 ? pos : neg;
  std::vector<size_t>& majority = minority_label == 1 ? neg : pos;
  size_t mn = minority.size(), mj = majority.size();

  if (mn <= static_cast<size_t>(cfg.k_neighbors))
    throw DataError("smote: minority class has " + std::to_string(mn) +
                    " record(s), needs more than k_neighbors=" +
                    std::to_string(cfg.k_neighbors) +
                    "; use a smaller k_neighbors");

  // Oversample by the largest integer multiple not overshooting the balance
  // point, then undersample the majority to the exact ratio.
  size_t synth_rounds = 0;
  while (mn * (synth_rounds + 2) <= static_cast<size_t>(
             std::floor(cfg.target_ratio * static_cast<double>(mj) + 1e-9)))
    ++synth_rounds;
  size_t new_minority = mn * (synth_rounds + 1);
  size_t keep_majority = static_cast<size_t>(
      std::llround(static_cast<double>(new_minority) / cfg.target_ratio));
  keep_majority = std::min(keep_majority, mj);

  std::mt19937_64 rng(cfg.seed);

  // k nearest minority neighbors of each minority record (brute force).
  size_t k = static_cast<size_t>(cfg.k_neighbors);
  std::vector<std::vector<size_t>> nn(mn);
  for (size_t i = 0; i < mn; ++i) {
    std::vector<std::pair<double, size_t>> dist;
    dist.reserve(mn - 1);
    for (size_t j = 0; j < mn; ++j) {
      if (j == i) continue;
      double acc = 0.0;
      const auto& xi = rows[minority[i]];
      const auto& xj = rows[minority[j]];
      for (size_t f = 0; f < xi.size(); ++f) {
        double dd = xi[f] - xj[f];
        acc += dd * dd;
      }
      dist.emplace_back(acc, j);
    }
    std::sort(dist.begin(), dist.end());
    for (size_t t = 0; t < k; ++t) nn[i].push_back(dist[t].second);
  }

  // Majority subsample: Fisher-Yates prefix, kept records stay in stream order.
  std::vector<size_t> maj_idx(mj);
  for (size_t i = 0; i < mj; ++i) maj_idx[i] = i;
  for (size_t i = 0; i + 1 < mj; ++i) {
    std::uniform_int_distribution<size_t> pick(i, mj - 1);
    std::swap(maj_idx[i], maj_idx[pick(rng)]);
  }
  maj_idx.resize(keep_majority);
  std::sort(maj_idx.begin(), maj_idx.end());
  std::vector<bool> keep_flag(rows.size(), false);
  for (size_t i : minority) keep_flag[i] = true;
  for (size_t i : maj_idx) keep_flag[majority[i]] = true;

  Matrix out_rows;
  std::vector<int> out_labels;
  out_rows.reserve(new_minority + keep_majority);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!keep_flag[i]) continue;
    out_rows.push_back(rows[i]);
    out_labels.push_back(labels[i]);
  }

  // Synthesis: each round walks the minority records in order.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (size_t round = 0; round < synth_rounds; ++round) {
    for (size_t i = 0; i < mn; ++i) {
      std::uniform_int_distribution<size_t> pick(0, k - 1);
      const auto& x = rows[minority[i]];
      const auto& xn = rows[minority[nn[i][pick(rng)]]];
      double u = unit(rng);
      std::vector<double> synth(x.size());
      for (size_t f = 0; f < x.size(); ++f) synth[f] = x[f] + u * (xn[f] - x[f]);
      out_rows.push_back(std::move(synth));
      out_labels.push_back(minority_label);
    }
  }
  return {out_rows, out_labels};
}

}  // namespace driftscan
