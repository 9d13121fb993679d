#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftscan/forest.hpp"
#include "driftscan/stream.hpp"

namespace driftscan {

enum class ExplainMethod { raw, ime, breakdown };

ExplainMethod explain_method_from_string(const std::string& s);

struct ExplainConfig {
  ExplainMethod method = ExplainMethod::ime;
  Matrix reference;                // background records, already preprocessed
  int ime_samples_per_feature = 100;
  uint64_t seed = 0;
};

// Per-instance feature contributions to the class-1 probability.
// base_value is the mean model output over the reference set; for the
// sequential method base_value + sum(contributions) equals the instance
// prediction exactly.
struct Attribution {
  std::vector<double> contributions;
  double base_value = 0.0;
  double prediction = 0.0;
};

struct AttributionMatrix {
  int group_index = 0;
  std::vector<std::string> feature_names;
  std::vector<Attribution> rows;
};

// Monte-Carlo estimate of per-feature contributions: for every feature,
// samples_per_feature random (permutation, reference record) pairs form two
// composites differing only in that feature; the mean output difference is
// the contribution.
Attribution ime_attribute(const ForestModel& model, const std::vector<double>& instance,
                          const ExplainConfig& cfg);

// Greedy sequential decomposition: repeatedly fix the feature whose
// substitution moves the running mean reference output the most (ties to the
// earlier schema position); contributions are the successive deltas.
Attribution breakdown_attribute(const ForestModel& model,
                                const std::vector<double>& instance,
                                const ExplainConfig& cfg);

// Attribute every record of a group. Per-record seeds derive from cfg.seed
// plus the record's stream position so results do not depend on how groups
// are batched.
AttributionMatrix attribute_group(const ForestModel& model, const Group& group,
                                  const ExplainConfig& cfg);

// Uniform subsample without replacement down to cap records (stable order);
// used to bound the reference set.
Matrix cap_reference(const Matrix& rows, size_t cap, uint64_t seed);

}  // namespace driftscan
