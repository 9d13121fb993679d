#include "driftscan/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "driftscan/errors.hpp"

namespace driftscan {

namespace {

double mean_prediction(const ForestModel& model, const Matrix& rows) {
  double acc = 0.0;
  for (const auto& r : rows) acc += model.predict_one(r.data());
  return acc / static_cast<double>(rows.size());
}

void check_explain_inputs(const ForestModel& model, const std::vector<double>& instance,
                          const ExplainConfig& cfg) {
  if (cfg.reference.empty())
    throw ConfigError("explain: reference set is empty");
  size_t d = model.feature_names.size();
  if (instance.size() != d)
    throw DataError("explain: instance width does not match the model");
  for (const auto& r : cfg.reference)
    if (r.size() != d)
      throw DataError("explain: reference record width does not match the model");
}

}  // namespace

ExplainMethod explain_method_from_string(const std::string& s) {
  if (s == "raw") return ExplainMethod::raw;
  if (s == "ime") return ExplainMethod::ime;
  if (s == "breakdown") return ExplainMethod::breakdown;
  throw ConfigError("explain: unknown method '" + s + "'");
}

Attribution ime_attribute(const ForestModel& model, const std::vector<double>& instance,
                          const ExplainConfig& cfg) {
  check_explain_inputs(model, instance, cfg);
  if (cfg.ime_samples_per_feature < 1)
    throw ConfigError("explain: ime_samples_per_feature must be at least 1");
  size_t d = instance.size();
  size_t n_ref = cfg.reference.size();

  Attribution att;
  att.contributions.assign(d, 0.0);
  att.base_value = mean_prediction(model, cfg.reference);
  att.prediction = model.predict_one(instance.data());

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<size_t> pick_ref(0, n_ref - 1);
  std::vector<size_t> perm(d);
  std::vector<size_t> pos(d);
  std::vector<double> with_j(d), without_j(d);

  for (size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    for (int s = 0; s < cfg.ime_samples_per_feature; ++s) {
      std::iota(perm.begin(), perm.end(), 0);
      for (size_t i = 0; i + 1 < d; ++i) {
        std::uniform_int_distribution<size_t> pick(i, d - 1);
        std::swap(perm[i], perm[pick(rng)]);
      }
      for (size_t i = 0; i < d; ++i) pos[perm[i]] = i;
      const std::vector<double>& ref = cfg.reference[pick_ref(rng)];
      // features ordered before j (in the permutation) come from the
      // instance, the rest from the reference; the pair differs only at j
      for (size_t k = 0; k < d; ++k) {
        double v = pos[k] < pos[j] ? instance[k] : ref[k];
        with_j[k] = v;
        without_j[k] = v;
      }
      with_j[j] = instance[j];
      without_j[j] = ref[j];
      acc += model.predict_one(with_j.data()) - model.predict_one(without_j.data());
    }
    att.contributions[j] = acc / static_cast<double>(cfg.ime_samples_per_feature);
  }
  return att;
}

Attribution breakdown_attribute(const ForestModel& model,
                                const std::vector<double>& instance,
                                const ExplainConfig& cfg) {
  check_explain_inputs(model, instance, cfg);
  size_t d = instance.size();

  Attribution att;
  att.contributions.assign(d, 0.0);
  att.prediction = model.predict_one(instance.data());

  Matrix work = cfg.reference;  // columns get pinned to the instance one by one
  double running = mean_prediction(model, work);
  att.base_value = running;

  std::vector<bool> fixed(d, false);
  std::vector<double> saved;
  saved.reserve(work.size());
  for (size_t step = 0; step < d; ++step) {
    double best_gap = -1.0;
    size_t best_j = 0;
    double best_mean = running;
    for (size_t j = 0; j < d; ++j) {
      if (fixed[j]) continue;
      saved.clear();
      for (auto& row : work) {
        saved.push_back(row[j]);
        row[j] = instance[j];
      }
      double m = mean_prediction(model, work);
      for (size_t i = 0; i < work.size(); ++i) work[i][j] = saved[i];
      double gap = std::fabs(m - running);
      if (gap > best_gap) {  // strict: ties keep the earlier feature
        best_gap = gap;
        best_j = j;
        best_mean = m;
      }
    }
    att.contributions[best_j] = best_mean - running;
    running = best_mean;
    fixed[best_j] = true;
    for (auto& row : work) row[best_j] = instance[best_j];
  }
  return att;
}

AttributionMatrix attribute_group(const ForestModel& model, const Group& group,
                                  const ExplainConfig& cfg) {
  if (cfg.method == ExplainMethod::raw)
    throw ConfigError("attribute_group: method 'raw' carries no attributions");
  AttributionMatrix am;
  am.group_index = group.index;
  am.feature_names = model.feature_names;
  am.rows.reserve(group.rows.size());
  for (size_t i = 0; i < group.rows.size(); ++i) {
    ExplainConfig per = cfg;
    per.seed = cfg.seed + (i < group.seqs.size() ? group.seqs[i] : i);
    if (cfg.method == ExplainMethod::ime)
      am.rows.push_back(ime_attribute(model, group.rows[i], per));
    else
      am.rows.push_back(breakdown_attribute(model, group.rows[i], per));
  }
  return am;
}

Matrix cap_reference(const Matrix& rows, size_t cap, uint64_t seed) {
  if (cap == 0) throw ConfigError("cap_reference: cap must be positive");
  if (rows.size() <= cap) return rows;
  std::vector<size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < cap; ++i) {
    std::uniform_int_distribution<size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  Matrix out;
  out.reserve(cap);
  for (size_t i : idx) out.push_back(rows[i]);
  return out;
}

}  // namespace driftscan
