#include "driftscan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "driftscan/errors.hpp"
#include "driftscan/special.hpp"

namespace driftscan {

namespace {

void check_finite(const std::vector<double>& v, const char* who) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream os;
      os << who << ": non-finite value at index " << i;
      throw DataError(os.str());
    }
  }
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Pearson correlation written so that perfectly rank-correlated integer
// inputs stay exact: single sqrt of the variance product.
double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  size_t n = x.size();
  double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

// Jacobi eigendecomposition of a symmetric matrix; returns eigenvalues and
// fills eigenvectors by column. Sizes here are small (<= feature count).
std::vector<double> jacobi_eigen(Matrix s, Matrix& vecs) {
  size_t n = s.size();
  vecs.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) vecs[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) off += s[p][q] * s[p][q];
    if (off < 1e-28) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        if (std::fabs(s[p][q]) < 1e-300) continue;
        double theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double sn = t * c;
        for (size_t k = 0; k < n; ++k) {
          double skp = s[k][p], skq = s[k][q];
          s[k][p] = c * skp - sn * skq;
          s[k][q] = sn * skp + c * skq;
        }
        for (size_t k = 0; k < n; ++k) {
          double spk = s[p][k], sqk = s[q][k];
          s[p][k] = c * spk - sn * sqk;
          s[q][k] = sn * spk + c * sqk;
        }
        for (size_t k = 0; k < n; ++k) {
          double vkp = vecs[k][p], vkq = vecs[k][q];
          vecs[k][p] = c * vkp - sn * vkq;
          vecs[k][q] = sn * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<double> evals(n);
  for (size_t i = 0; i < n; ++i) evals[i] = s[i][i];
  return evals;
}

// Solve S y = b for symmetric positive-definite S by Gaussian elimination
// with partial pivoting; returns false when S is numerically singular.
bool solve_spd(Matrix s, std::vector<double> b, std::vector<double>& y) {
  size_t n = s.size();
  double scale = 0.0;
  for (size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(s[i][i]));
  if (scale == 0.0) return false;
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::fabs(s[r][col]) > std::fabs(s[piv][col])) piv = r;
    if (std::fabs(s[piv][col]) < 1e-12 * scale) return false;
    std::swap(s[col], s[piv]);
    std::swap(b[col], b[piv]);
    for (size_t r = col + 1; r < n; ++r) {
      double f = s[r][col] / s[col][col];
      for (size_t c = col; c < n; ++c) s[r][c] -= f * s[col][c];
      b[r] -= f * b[col];
    }
  }
  y.assign(n, 0.0);
  for (size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (size_t c = i + 1; c < n; ++c) acc -= s[i][c] * y[c];
    y[i] = acc / s[i][i];
  }
  return true;
}

}  // namespace

std::vector<double> midranks(const std::vector<double>& v) {
  size_t n = v.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    // positions i..j (0-based) share the average of 1-based ranks i+1..j+1
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::vector<int> page_hinkley_trace(const std::vector<double>& series, const PHConfig& cfg,
                                    std::vector<double>* statistic_out) {
  if (!(cfg.lambda_threshold > 0.0))
    throw ConfigError("page_hinkley: lambda_threshold must be positive");
  if (!(cfg.fading > 0.0) || cfg.fading > 1.0)
    throw ConfigError("page_hinkley: fading must lie in (0,1]");
  if (cfg.delta < 0.0) throw ConfigError("page_hinkley: delta must be non-negative");
  if (cfg.min_instances < 1)
    throw ConfigError("page_hinkley: min_instances must be at least 1");
  check_finite(series, "page_hinkley");

  std::vector<double> x(series);
  if (cfg.normalize && !x.empty()) {
    // Whole-series min-max; a constant series maps to all zeros.
    double lo = *std::min_element(x.begin(), x.end());
    double hi = *std::max_element(x.begin(), x.end());
    if (hi > lo) {
      for (double& v : x) v = (v - lo) / (hi - lo);
    } else {
      std::fill(x.begin(), x.end(), 0.0);
    }
  }

  std::vector<int> alarms;
  if (statistic_out) statistic_out->assign(x.size(), 0.0);
  double m = 0.0;
  double m_min = std::numeric_limits<double>::infinity();
  double fsum = 0.0, fcount = 0.0;
  int since_reset = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double v = x[i];
    fsum = cfg.fading * fsum + v;
    fcount = cfg.fading * fcount + 1.0;
    double mean = fsum / fcount;  // includes the current sample
    m = cfg.fading * m + (v - mean - cfg.delta);
    m_min = std::min(m_min, m);
    ++since_reset;
    double stat = m - m_min;
    if (statistic_out) (*statistic_out)[i] = stat;
    if (since_reset >= cfg.min_instances && stat > cfg.lambda_threshold) {
      alarms.push_back(static_cast<int>(i));
      m = 0.0;
      m_min = std::numeric_limits<double>::infinity();
      fsum = 0.0;
      fcount = 0.0;
      since_reset = 0;
    }
  }
  return alarms;
}

std::vector<int> page_hinkley(const std::vector<double>& series, const PHConfig& cfg) {
  return page_hinkley_trace(series, cfg, nullptr);
}

TestResult anova_oneway(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw ConfigError("anova_oneway: each group needs at least 2 values");
  check_finite(a, "anova_oneway");
  check_finite(b, "anova_oneway");
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double ma = mean_of(a), mb = mean_of(b);
  double g = (na * ma + nb * mb) / (na + nb);
  double ssb = na * (ma - g) * (ma - g) + nb * (mb - g) * (mb - g);
  double ssw = 0.0;
  for (double v : a) ssw += (v - ma) * (v - ma);
  for (double v : b) ssw += (v - mb) * (v - mb);
  double dfw = na + nb - 2.0;
  TestResult r;
  {
    std::ostringstream os;
    os << "F(1," << static_cast<long long>(dfw) << ")";
    r.df = os.str();
  }
  if (ssw == 0.0) {
    r.degenerate = true;
    if (ma == mb) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.statistic = ssb / (ssw / dfw);
  r.p_value = special::f_sf(r.statistic, 1.0, dfw);
  return r;
}

TestResult manova_two_group(const Matrix& a, const Matrix& b) {
  if (a.empty() || b.empty())
    throw ConfigError("manova_two_group: both groups must be non-empty");
  size_t d_all = a[0].size();
  if (d_all == 0) throw ConfigError("manova_two_group: zero columns");
  for (const auto& row : a)
    if (row.size() != d_all) throw DataError("manova_two_group: ragged rows in group a");
  for (const auto& row : b)
    if (row.size() != d_all) throw DataError("manova_two_group: ragged rows in group b");
  for (const auto& row : a) check_finite(row, "manova_two_group");
  for (const auto& row : b) check_finite(row, "manova_two_group");

  // Drop columns constant across the pooled data; they carry no information
  // and make the covariance singular.
  std::vector<size_t> keep;
  for (size_t j = 0; j < d_all; ++j) {
    double v0 = a[0][j];
    bool constant = true;
    for (const auto& row : a)
      if (row[j] != v0) { constant = false; break; }
    if (constant)
      for (const auto& row : b)
        if (row[j] != v0) { constant = false; break; }
    if (!constant) keep.push_back(j);
  }
  if (keep.size() < d_all)
    log_warn("manova_two_group: dropped " + std::to_string(d_all - keep.size()) +
             " constant column(s)");
  if (keep.empty()) {
    // Both groups are the same constant everywhere: no evidence of difference.
    TestResult r;
    r.degenerate = true;
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.df = "F(0,0)";
    return r;
  }

  size_t d = keep.size();
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double n = na + nb;
  if (n < static_cast<double>(d) + 2.0)
    throw ConfigError("manova_two_group: need at least d+2 rows in total");

  if (d == 1) {
    std::vector<double> ca, cb;
    ca.reserve(a.size());
    cb.reserve(b.size());
    for (const auto& row : a) ca.push_back(row[keep[0]]);
    for (const auto& row : b) cb.push_back(row[keep[0]]);
    if (ca.size() < 2 || cb.size() < 2)
      throw ConfigError("manova_two_group: each group needs at least 2 rows");
    TestResult uni = anova_oneway(ca, cb);
    // Report Pillai's trace as the statistic; p-value matches the univariate
    // test exactly because the F transform is the identity when d = 1.
    TestResult r;
    r.degenerate = uni.degenerate;
    r.p_value = uni.p_value;
    r.df = uni.df;
    if (std::isinf(uni.statistic)) {
      r.statistic = 1.0;  // Pillai saturates
    } else {
      double f = uni.statistic;
      double t2 = f;  // with d = 1, F = T^2
      r.statistic = t2 / (t2 + n - 2.0);
    }
    return r;
  }

  if (a.size() < 2 || b.size() < 2)
    throw ConfigError("manova_two_group: each group needs at least 2 rows");

  std::vector<double> mean_a(d, 0.0), mean_b(d, 0.0);
  for (const auto& row : a)
    for (size_t j = 0; j < d; ++j) mean_a[j] += row[keep[j]];
  for (const auto& row : b)
    for (size_t j = 0; j < d; ++j) mean_b[j] += row[keep[j]];
  for (size_t j = 0; j < d; ++j) {
    mean_a[j] /= na;
    mean_b[j] /= nb;
  }

  // Pooled covariance S = (A_scatter + B_scatter) / (n - 2).
  Matrix s(d, std::vector<double>(d, 0.0));
  auto accumulate_scatter = [&](const Matrix& grp, const std::vector<double>& mu) {
    for (const auto& row : grp) {
      for (size_t j = 0; j < d; ++j) {
        double dj = row[keep[j]] - mu[j];
        for (size_t k = j; k < d; ++k) s[j][k] += dj * (row[keep[k]] - mu[k]);
      }
    }
  };
  accumulate_scatter(a, mean_a);
  accumulate_scatter(b, mean_b);
  for (size_t j = 0; j < d; ++j)
    for (size_t k = j; k < d; ++k) {
      s[j][k] /= (n - 2.0);
      s[k][j] = s[j][k];
    }

  std::vector<double> delta(d);
  for (size_t j = 0; j < d; ++j) delta[j] = mean_a[j] - mean_b[j];

  std::vector<double> y;
  double quad = 0.0;
  if (solve_spd(s, delta, y)) {
    for (size_t j = 0; j < d; ++j) quad += delta[j] * y[j];
  } else {
    log_warn("manova_two_group: singular pooled covariance, using pseudo-inverse");
    Matrix vecs;
    std::vector<double> evals = jacobi_eigen(s, vecs);
    double emax = 0.0;
    for (double e : evals) emax = std::max(emax, std::fabs(e));
    // quad = delta' V diag(1/eval) V' delta over the non-null spectrum
    for (size_t c = 0; c < d; ++c) {
      if (std::fabs(evals[c]) <= 1e-12 * emax) continue;
      double proj = 0.0;
      for (size_t j = 0; j < d; ++j) proj += vecs[j][c] * delta[j];
      quad += proj * proj / evals[c];
    }
    quad = std::max(quad, 0.0);
  }

  double t2 = (na * nb / n) * quad;
  double df2 = n - static_cast<double>(d) - 1.0;
  if (df2 <= 0.0) throw ConfigError("manova_two_group: need at least d+2 rows in total");
  double f = t2 * df2 / (static_cast<double>(d) * (n - 2.0));
  TestResult r;
  r.statistic = t2 / (t2 + n - 2.0);  // Pillai's trace for two groups
  r.p_value = special::f_sf(f, static_cast<double>(d), df2);
  {
    std::ostringstream os;
    os << "F(" << d << "," << static_cast<long long>(df2) << ")";
    r.df = os.str();
  }
  return r;
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw ConfigError("spearman_rho: inputs differ in length");
  if (x.size() < 2) throw ConfigError("spearman_rho: need at least 2 pairs");
  check_finite(x, "spearman_rho");
  check_finite(y, "spearman_rho");
  std::vector<double> rx = midranks(x), ry = midranks(y);
  double rho = pearson(rx, ry);
  if (std::isnan(rho)) {
    log_warn("spearman_rho: constant input, correlation reported as 0");
    return 0.0;
  }
  return rho;
}

FriedmanResult friedman_ranks(const Matrix& scores, RankDirection direction) {
  if (scores.empty()) throw ConfigError("friedman_ranks: empty score matrix");
  size_t k = scores[0].size();
  if (k < 2) throw ConfigError("friedman_ranks: need at least 2 columns");
  for (const auto& row : scores)
    if (row.size() != k) throw DataError("friedman_ranks: ragged rows");

  FriedmanResult res;
  res.mean_ranks.assign(k, 0.0);
  int used = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    bool has_nan = false;
    for (double v : scores[i])
      if (std::isnan(v)) { has_nan = true; break; }
    if (has_nan) {
      log_warn("friedman_ranks: dropping row " + std::to_string(i) +
               " containing NaN");
      continue;
    }
    std::vector<double> oriented = scores[i];
    if (direction == RankDirection::higher_is_better)
      for (double& v : oriented) v = -v;
    std::vector<double> r = midranks(oriented);  // rank 1 = best
    for (size_t j = 0; j < k; ++j) res.mean_ranks[j] += r[j];
    ++used;
  }
  if (used < 2)
    throw ConfigError("friedman_ranks: need at least 2 usable rows");
  for (size_t j = 0; j < k; ++j) res.mean_ranks[j] /= static_cast<double>(used);
  res.rows_used = used;

  double kk = static_cast<double>(k);
  double nn = static_cast<double>(used);
  double acc = 0.0;
  for (size_t j = 0; j < k; ++j) {
    double dev = res.mean_ranks[j] - (kk + 1.0) / 2.0;
    acc += dev * dev;
  }
  res.statistic = 12.0 * nn / (kk * (kk + 1.0)) * acc;
  res.p_value = special::chi2_sf(res.statistic, kk - 1.0);
  return res;
}

TestResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw ConfigError("wilcoxon_signed_rank: inputs differ in length");
  check_finite(a, "wilcoxon_signed_rank");
  check_finite(b, "wilcoxon_signed_rank");
  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  TestResult r;
  r.df = "z";
  if (diffs.empty()) {
    if (a.empty()) throw ConfigError("wilcoxon_signed_rank: empty input");
    log_warn("wilcoxon_signed_rank: all differences are zero, p = 1");
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.degenerate = true;
    return r;
  }
  if (diffs.size() < 5)
    throw ConfigError(
        "wilcoxon_signed_rank: fewer than 5 non-zero differences (n=" +
        std::to_string(diffs.size()) + ")");

  std::vector<double> absd(diffs.size());
  for (size_t i = 0; i < diffs.size(); ++i) absd[i] = std::fabs(diffs[i]);
  std::vector<double> ranks = midranks(absd);
  double w_plus = 0.0;
  for (size_t i = 0; i < diffs.size(); ++i)
    if (diffs[i] > 0.0) w_plus += ranks[i];
  double n = static_cast<double>(diffs.size());
  double total = n * (n + 1.0) / 2.0;
  double w_minus = total - w_plus;
  r.statistic = std::min(w_plus, w_minus);

  double mu = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  // tie correction: subtract sum(t^3 - t)/48 over tied groups of |d|
  {
    std::vector<double> sorted(absd);
    std::sort(sorted.begin(), sorted.end());
    size_t i = 0;
    while (i < sorted.size()) {
      size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      double t = static_cast<double>(j - i + 1);
      if (t > 1.0) var -= (t * t * t - t) / 48.0;
      i = j + 1;
    }
  }
  if (var <= 0.0) {
    log_warn("wilcoxon_signed_rank: zero variance after tie correction, p = 1");
    r.p_value = 1.0;
    r.degenerate = true;
    return r;
  }
  double num = std::fabs(w_plus - mu) - 0.5;  // continuity correction
  if (num < 0.0) num = 0.0;
  double z = num / std::sqrt(var);
  r.p_value = std::min(1.0, 2.0 * special::normal_sf(z));
  return r;
}

}  // namespace driftscan
