#pragma once

#include <string>
#include <vector>

namespace driftscan {

using Matrix = std::vector<std::vector<double>>;  // row-major

// Page-Hinkley change detector over a numeric series.
struct PHConfig {
  double lambda_threshold = 2.1;  // alarm when statistic - running min exceeds this
  double delta = 0.001;           // magnitude drain per sample
  double fading = 0.999;          // weight of history in the faded mean / statistic
  int min_instances = 3;          // samples required after (re)start before alarms
  bool normalize = true;          // min-max scale the series to [0,1] first
};

// 0-based indices of alarm positions. The statistic uses a fading mean that
// includes the current sample; state resets fully after each alarm.
std::vector<int> page_hinkley(const std::vector<double>& series, const PHConfig& cfg);

// Like page_hinkley but also exposes the per-index test statistic
// (m_t - min_t, after normalization) for tracing.
std::vector<int> page_hinkley_trace(const std::vector<double>& series, const PHConfig& cfg,
                                    std::vector<double>* statistic_out);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string df;           // e.g. "F(1,6)", "F(2,8)", "chi2(4)", "z"
  bool degenerate = false;  // a zero-variance convention was applied
};

// One-way fixed-effects comparison of two independent samples.
// Zero within-group variance: p = 1 when the means agree, p = 0 otherwise,
// flagged degenerate.
TestResult anova_oneway(const std::vector<double>& a, const std::vector<double>& b);

// Two-group multivariate comparison: Hotelling T-squared reported as
// Pillai's trace with its exact F transform. Columns constant across both
// groups are dropped first; a singular pooled covariance falls back to a
// spectral pseudo-inverse (with a warning). With one column this reduces to
// anova_oneway.
TestResult manova_two_group(const Matrix& a, const Matrix& b);

// Spearman rank correlation (midranks for ties). A constant input yields 0
// with a warning.
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

enum class RankDirection { lower_is_better, higher_is_better };

struct FriedmanResult {
  std::vector<double> mean_ranks;  // per column, averaged over usable rows
  double statistic = 0.0;
  double p_value = 1.0;
  int rows_used = 0;
};

// Friedman rank test over a blocks-by-treatments score matrix. Rows
// containing NaN are dropped with a warning. Ties share midranks.
FriedmanResult friedman_ranks(const Matrix& scores, RankDirection direction);

// Wilcoxon signed-rank test for paired samples, two-sided, normal
// approximation with tie and continuity corrections. Zero differences are
// removed first; at least 5 must remain. All-zero differences give p = 1
// with a warning. The statistic is min(W+, W-).
TestResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

// 1-based ranks with ties averaged (midranks).
std::vector<double> midranks(const std::vector<double>& v);

}  // namespace driftscan
