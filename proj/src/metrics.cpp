#include "driftscan/metrics.hpp"

#include <cmath>

#include "driftscan/errors.hpp"
#include "driftscan/stats.hpp"

namespace driftscan {

MetricVector group_metrics(const std::vector<double>& probabilities,
                           const std::vector<int>& labels) {
  if (probabilities.size() != labels.size())
    throw DataError("group_metrics: probabilities and labels differ in length");
  if (probabilities.empty()) throw DataError("group_metrics: empty group");
  for (size_t i = 0; i < probabilities.size(); ++i) {
    if (!std::isfinite(probabilities[i]))
      throw DataError("group_metrics: non-finite probability at index " +
                      std::to_string(i));
    if (labels[i] != 0 && labels[i] != 1)
      throw DataError("group_metrics: label outside {0,1} at index " +
                      std::to_string(i));
  }

  double tp = 0, fp = 0, tn = 0, fn = 0;
  for (size_t i = 0; i < probabilities.size(); ++i) {
    int pred = probabilities[i] > 0.5 ? 1 : 0;
    if (pred == 1 && labels[i] == 1) ++tp;
    else if (pred == 1 && labels[i] == 0) ++fp;
    else if (pred == 0 && labels[i] == 0) ++tn;
    else ++fn;
  }
  double n = tp + fp + tn + fn;
  double pos = tp + fn, neg = tn + fp;

  MetricVector m;
  m.accuracy = (tp + tn) / n;
  m.er = 1.0 - m.accuracy;

  auto ratio = [&](double num, double den, const char* name) {
    if (den == 0.0) {
      m.flags.push_back(std::string(name) + ":zero_denominator");
      return 0.0;
    }
    return num / den;
  };
  m.precision = ratio(tp, tp + fp, "precision");
  m.recall = ratio(tp, tp + fn, "recall");
  m.specificity = ratio(tn, tn + fp, "specificity");
  m.gmean = std::sqrt(m.recall * m.specificity);
  m.fmeasure = ratio(2.0 * m.precision * m.recall, m.precision + m.recall, "fmeasure");

  if (pos == 0.0 || neg == 0.0) {
    // Single-class labels: ranking and chance-corrected measures are undefined.
    m.auc_defined = false;
    m.mcc_defined = false;
    m.auc = 0.0;
    m.mcc = 0.0;
  } else {
    // AUC via the rank-sum identity; midranks handle tied scores.
    std::vector<double> r = midranks(probabilities);
    double rank_sum_pos = 0.0;
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == 1) rank_sum_pos += r[i];
    double u = rank_sum_pos - pos * (pos + 1.0) / 2.0;
    m.auc = u / (pos * neg);

    double mcc_den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    if (mcc_den == 0.0) {
      m.flags.push_back("mcc:zero_denominator");
      m.mcc = 0.0;
    } else {
      m.mcc = (tp * tn - fp * fn) / mcc_den;
    }
  }

  double pe = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (n * n);
  if (1.0 - pe == 0.0) {
    m.flags.push_back("kappa:zero_denominator");
    m.kappa = 0.0;
  } else {
    m.kappa = (m.accuracy - pe) / (1.0 - pe);
  }
  return m;
}

const std::vector<std::string>& monitorable_metrics() {
  static const std::vector<std::string> names = {
      "er",        "accuracy", "auc",  "precision", "recall",
      "specificity", "gmean",  "fmeasure", "mcc",   "kappa"};
  return names;
}

double monitored_error(const std::string& metric_name, const MetricVector& m,
                       double previous, bool* defined) {
  if (defined) *defined = true;
  if (metric_name == "er") return m.er;
  if (metric_name == "accuracy") return 1.0 - m.accuracy;
  if (metric_name == "auc") {
    if (!m.auc_defined) {
      if (defined) *defined = false;
      return previous;
    }
    return 1.0 - m.auc;
  }
  if (metric_name == "precision") return 1.0 - m.precision;
  if (metric_name == "recall") return 1.0 - m.recall;
  if (metric_name == "specificity") return 1.0 - m.specificity;
  if (metric_name == "gmean") return 1.0 - m.gmean;
  if (metric_name == "fmeasure") return 1.0 - m.fmeasure;
  if (metric_name == "mcc") {
    if (!m.mcc_defined) {
      if (defined) *defined = false;
      return previous;
    }
    return 1.0 - (m.mcc + 1.0) / 2.0;
  }
  if (metric_name == "kappa") return 1.0 - (m.kappa + 1.0) / 2.0;
  throw ConfigError("monitored_error: unknown metric '" + metric_name + "'");
}

}  // namespace driftscan
