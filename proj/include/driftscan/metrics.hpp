#pragma once

#include <string>
#include <vector>

namespace driftscan {

// Classification quality measures for one group of scored records.
// Probabilities are class-1 scores; the decision threshold is 0.5 and a
// score of exactly 0.5 goes to class 0.
struct MetricVector {
  double accuracy = 0.0;
  double er = 0.0;  // 1 - accuracy
  double auc = 0.0;
  double mcc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double gmean = 0.0;  // sqrt(recall * specificity)
  double fmeasure = 0.0;
  double kappa = 0.0;
  bool auc_defined = true;  // false when the labels contain a single class
  bool mcc_defined = true;  // false when the labels contain a single class
  std::vector<std::string> flags;  // zero-denominator conventions applied
};

MetricVector group_metrics(const std::vector<double>& probabilities,
                           const std::vector<int>& labels);

// Names accepted by the monitoring transform (and the baseline detectors).
const std::vector<std::string>& monitorable_metrics();

// Transform a metric into an error-like series value in [0,1] where larger
// means worse: er passes through, gain metrics in [0,1] map to 1-x, and
// [-1,1] metrics (mcc, kappa) map to 1-(x+1)/2. When the metric is undefined
// for this group the previous value carries forward and *defined is false.
double monitored_error(const std::string& metric_name, const MetricVector& m,
                       double previous, bool* defined);

}  // namespace driftscan
