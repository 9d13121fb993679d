#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "driftscan/stats.hpp"  // Matrix

namespace driftscan {

struct SmoteConfig {
  int k_neighbors = 5;
  double target_ratio = 1.0;  // minority:majority after resampling
  uint64_t seed = 0;
};

// Rebalance a binary training set: the minority class is oversampled by the
// largest integer multiple that does not overshoot the target, synthesizing
// points on segments between minority neighbors (k nearest, Euclidean);
// the majority class is then undersampled (without replacement) to meet the
// ratio. Original records keep their order; synthetic records are appended.
std::pair<Matrix, std::vector<int>> smote(const Matrix& rows,
                                          const std::vector<int>& labels,
                                          const SmoteConfig& cfg);

}  // namespace driftscan
