#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "driftscan/errors.hpp"
#include "driftscan/stats.hpp"

using namespace driftscan;

namespace {

// A 20-group difference-count series with a mid-stream bump that should NOT
// trigger the detector at default sensitivity (frozen reference trace).
const std::vector<double> kCountSeries = {0, 0, 0, 1, 1, 1, 1, 1, 1, 6,
                                          4, 1, 1, 3, 0, 0, 0, 1, 0, 1};

std::vector<double> step_series() {
  std::vector<double> s(400, 0.0);
  for (size_t i = 200; i < 400; ++i) s[i] = 1.0;
  return s;
}

}  // namespace

TEST_CASE("page_hinkley stays silent on a count series with a mid-stream bump") {
  PHConfig cfg;  // defaults: lambda 2.1, delta 0.001, fading 0.999, min 3
  std::vector<double> stat;
  std::vector<int> alarms = page_hinkley_trace(kCountSeries, cfg, &stat);
  CHECK(alarms.empty());
  // frozen trace from the reference simulation (whole-series min-max)
  REQUIRE(stat.size() == 20);
  CHECK(stat[13] == doctest::Approx(1.815594432844).epsilon(1e-9));  // peak
  CHECK(stat[15] == doctest::Approx(1.357329444688).epsilon(1e-9));
  CHECK(stat[16] == doctest::Approx(1.148888380492).epsilon(1e-9));
  CHECK(stat[17] == doctest::Approx(1.109531101650).epsilon(1e-9));
  CHECK(stat[18] == doctest::Approx(0.914373833209).epsilon(1e-9));
  CHECK(stat[19] == doctest::Approx(0.887410168404).epsilon(1e-9));
  double peak = *std::max_element(stat.begin(), stat.end());
  CHECK(peak == doctest::Approx(1.815594432844).epsilon(1e-9));
  CHECK(std::max_element(stat.begin(), stat.end()) - stat.begin() == 13);
}

TEST_CASE("page_hinkley alarms on a drifting count tail after a quiet prefix") {
  // 30 near-zero groups then escalating difference counts
  std::vector<double> s(30, 0.0);
  for (double v : {0.0, 1.0, 7.0, 0.0, 0.0, 11.0, 15.0, 54.0, 53.0}) s.push_back(v);
  PHConfig cfg;
  std::vector<double> stat;
  std::vector<int> alarms = page_hinkley_trace(s, cfg, &stat);
  REQUIRE(alarms.size() == 1);
  CHECK(alarms[0] == 38);
  CHECK(stat[31] == doctest::Approx(0.016961335013).epsilon(1e-7));
  CHECK(stat[32] == doctest::Approx(0.141043538511).epsilon(1e-8));
  CHECK(stat[36] == doctest::Approx(0.581961504018).epsilon(1e-9));
  CHECK(stat[37] == doctest::Approx(1.536765231904).epsilon(1e-9));
  CHECK(stat[38] == doctest::Approx(2.447588602250).epsilon(1e-9));
}

TEST_CASE("page_hinkley detects a clean step change") {
  PHConfig cfg;
  cfg.lambda_threshold = 0.1;
  std::vector<int> alarms = page_hinkley(step_series(), cfg);
  REQUIRE(!alarms.empty());
  CHECK(alarms[0] == 200);  // fires on the first post-step sample
}

TEST_CASE("page_hinkley is silent on constant series") {
  std::vector<double> s(500, 3.7);
  PHConfig cfg;
  CHECK(page_hinkley(s, cfg).empty());
  cfg.normalize = false;
  CHECK(page_hinkley(s, cfg).empty());
}

TEST_CASE("page_hinkley alarm indices respect min_instances and reset") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.5, 0.1);
  std::vector<double> s;
  for (int i = 0; i < 100; ++i) s.push_back(noise(rng));
  PHConfig cfg;
  cfg.lambda_threshold = 0.05;  // deliberately jumpy
  cfg.min_instances = 7;
  std::vector<int> alarms = page_hinkley(s, cfg);
  int prev = -1;
  for (int a : alarms) {
    CHECK(a - prev >= cfg.min_instances);  // distance since last reset
    prev = a;
  }
  // a huge threshold silences the same series
  cfg.lambda_threshold = 10.0;
  cfg.min_instances = 3;
  CHECK(page_hinkley(s, cfg).empty());
}

TEST_CASE("page_hinkley validates inputs") {
  PHConfig cfg;
  cfg.lambda_threshold = 0.0;
  CHECK_THROWS_AS(page_hinkley({1, 2, 3}, cfg), ConfigError);
  cfg = PHConfig{};
  cfg.fading = 0.0;
  CHECK_THROWS_AS(page_hinkley({1, 2, 3}, cfg), ConfigError);
  cfg = PHConfig{};
  CHECK_THROWS_AS(page_hinkley({1.0, std::nan(""), 2.0}, cfg), DataError);
}

TEST_CASE("anova matches hand-computed and reference fixtures") {
  TestResult r = anova_oneway({1, 2, 3, 4}, {2, 3, 4, 5});
  CHECK(r.statistic == doctest::Approx(1.2).epsilon(1e-12));  // ssb=2, ssw=10
  CHECK(r.p_value == doctest::Approx(3.153335962012295e-01).epsilon(1e-9));
  CHECK(r.df == "F(1,6)");

  TestResult r2 = anova_oneway({3.1, 4.5, 2.2, 5.0, 3.3}, {6.1, 5.9, 7.2, 6.6});
  CHECK(r2.statistic == doctest::Approx(2.049734927424956e+01).epsilon(1e-9));
  CHECK(r2.p_value == doctest::Approx(2.708105202524450e-03).epsilon(1e-9));
}

TEST_CASE("anova basic behaviors") {
  // identical groups: no effect
  TestResult same = anova_oneway({1, 2, 3}, {1, 2, 3});
  CHECK(same.p_value == doctest::Approx(1.0).epsilon(1e-9));
  // symmetric in the group order
  TestResult ab = anova_oneway({1, 2, 3, 4}, {10, 11, 12});
  TestResult ba = anova_oneway({10, 11, 12}, {1, 2, 3, 4});
  CHECK(ab.statistic == doctest::Approx(ba.statistic).epsilon(1e-12));
  CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
  CHECK(ab.p_value < 1e-3);  // strongly separated means at small n
  // degenerate: zero within-group variance
  TestResult eq = anova_oneway({2, 2, 2}, {2, 2});
  CHECK(eq.degenerate);
  CHECK(eq.p_value == 1.0);
  TestResult ne = anova_oneway({2, 2, 2}, {3, 3});
  CHECK(ne.degenerate);
  CHECK(ne.p_value == 0.0);
  CHECK_THROWS_AS(anova_oneway({1}, {2, 3}), ConfigError);
}

TEST_CASE("manova matches the reference fixture") {
  Matrix a = {{2, 1}, {3, 2}, {4, 1.5}, {5, 3}, {3.5, 2.5}, {2.5, 1.2}};
  Matrix b = {{4, 3}, {5, 4}, {6, 3.5}, {7, 5}, {5.5, 4.2}};
  TestResult r = manova_two_group(a, b);
  // statistic is Pillai's trace; reconstruct T^2 and F from it
  double n = 11.0, d = 2.0;
  double pillai = r.statistic;
  CHECK(pillai == doctest::Approx(6.926709192958259e-01).epsilon(1e-9));
  double t2 = pillai * (n - 2.0) / (1.0 - pillai);
  CHECK(t2 == doctest::Approx(2.028457007510830e+01).epsilon(1e-8));
  double f = t2 * (n - d - 1.0) / (d * (n - 2.0));
  CHECK(f == doctest::Approx(9.015364477825910e+00).epsilon(1e-8));
  CHECK(r.p_value == doctest::Approx(8.921022351953240e-03).epsilon(1e-9));
  CHECK(r.df == "F(2,8)");
}

TEST_CASE("manova with one column equals the univariate test") {
  std::vector<double> a = {3.1, 4.5, 2.2, 5.0, 3.3}, b = {6.1, 5.9, 7.2, 6.6};
  Matrix ma, mb;
  for (double v : a) ma.push_back({v});
  for (double v : b) mb.push_back({v});
  TestResult uni = anova_oneway(a, b);
  TestResult multi = manova_two_group(ma, mb);
  CHECK(multi.p_value == doctest::Approx(uni.p_value).epsilon(1e-9));
  // Pillai <-> F consistency at d = 1
  double n = 9.0;
  double f_from_pillai = multi.statistic / (1.0 - multi.statistic) * (n - 2.0);
  CHECK(f_from_pillai == doctest::Approx(uni.statistic).epsilon(1e-9));
}

TEST_CASE("manova handles equal groups, constants, and singular covariance") {
  Matrix a = {{1, 2}, {2, 3}, {3, 4}, {4, 6}};
  TestResult same = manova_two_group(a, a);
  CHECK(same.p_value == doctest::Approx(1.0).epsilon(1e-9));

  // a pooled-constant column is dropped, the rest still tested
  Matrix ca = {{1.0, 7.0}, {2.0, 7.0}, {3.0, 7.0}};
  Matrix cb = {{5.0, 7.0}, {6.0, 7.0}, {7.0, 7.0}};
  TestResult dropped = manova_two_group(ca, cb);
  TestResult uni = anova_oneway({1, 2, 3}, {5, 6, 7});
  CHECK(dropped.p_value == doctest::Approx(uni.p_value).epsilon(1e-9));

  // duplicated column: singular pooled covariance, pseudo-inverse path
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix sa, sb;
  for (int i = 0; i < 12; ++i) {
    double v = g(rng);
    sa.push_back({v, v, g(rng)});
  }
  for (int i = 0; i < 12; ++i) {
    double v = g(rng) + 2.0;
    sb.push_back({v, v, g(rng)});
  }
  TestResult sing = manova_two_group(sa, sb);
  CHECK(sing.p_value >= 0.0);
  CHECK(sing.p_value < 0.05);  // the shift is real and must survive the fallback

  // all columns constant and equal
  Matrix ka = {{1, 1}, {1, 1}}, kb = {{1, 1}, {1, 1}};
  TestResult all_const = manova_two_group(ka, kb);
  CHECK(all_const.degenerate);
  CHECK(all_const.p_value == 1.0);

  // n < d + 2 is refused
  Matrix ta = {{1, 2, 3}, {2, 3, 4}}, tb = {{3, 4, 5}, {4, 5, 6}};
  CHECK_THROWS_AS(manova_two_group(ta, tb), ConfigError);
}

TEST_CASE("spearman correlation fixtures") {
  CHECK(spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman_rho({1, 2, 3, 4}, {40, 30, 20, 10}) == doctest::Approx(-1.0));
  double rho = spearman_rho({1, 2, 3, 4}, {1, 3, 2, 4});
  CHECK(rho == 0.8);  // rank covariance 1, variances 1.25 -> exactly 4/5
  // invariant under monotone transforms
  CHECK(spearman_rho({1, 2, 3, 4}, {std::exp(1.0), std::exp(3.0), std::exp(2.0),
                                    std::exp(4.0)}) == 0.8);
  CHECK(spearman_rho({5, 5, 5, 5}, {1, 2, 3, 4}) == 0.0);  // constant -> 0 + warning
}

TEST_CASE("friedman matches the hand-ranked fixture") {
  // lower is better; ranks per row: (1,2,3),(1,2,3),(3,1,2),(1,3,2)
  Matrix scores = {{1, 2, 3}, {1.5, 2.5, 3.5}, {9, 7, 8}, {0.1, 0.3, 0.2}};
  FriedmanResult f = friedman_ranks(scores, RankDirection::lower_is_better);
  REQUIRE(f.mean_ranks.size() == 3);
  CHECK(f.mean_ranks[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(f.mean_ranks[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.mean_ranks[2] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.statistic == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.p_value == doctest::Approx(3.678794411714424e-01).epsilon(1e-9));
  CHECK(f.rows_used == 4);
}

TEST_CASE("friedman against an independent per-row ranking oracle") {
  // fixed 18x5 matrix; the oracle ranks each row by counting comparisons
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix scores(18, std::vector<double>(5));
  for (auto& row : scores)
    for (double& v : row) v = std::round(u(rng) * 20.0) / 20.0;  // force ties

  std::vector<double> oracle(5, 0.0);
  for (const auto& row : scores) {
    for (size_t j = 0; j < 5; ++j) {
      double smaller = 0, equal = 0;
      for (size_t k = 0; k < 5; ++k) {
        if (row[k] < row[j]) smaller += 1;
        else if (row[k] == row[j]) equal += 1;
      }
      oracle[j] += smaller + (equal - 1.0) / 2.0 + 1.0;  // midrank
    }
  }
  for (double& v : oracle) v /= 18.0;

  FriedmanResult f = friedman_ranks(scores, RankDirection::lower_is_better);
  for (size_t j = 0; j < 5; ++j)
    CHECK(f.mean_ranks[j] == doctest::Approx(oracle[j]).epsilon(1e-9));
  // mean ranks of any complete ranking sum to k(k+1)/2 per row
  double total = 0.0;
  for (double v : f.mean_ranks) total += v;
  CHECK(total == doctest::Approx(15.0).epsilon(1e-9));
}

TEST_CASE("friedman direction, dominance, ties, and NaN rows") {
  // column 0 always best under higher_is_better
  Matrix scores = {{9, 1, 5}, {8, 2, 4}, {7, 3, 5.5}, {9.5, 0.5, 6}};
  FriedmanResult f = friedman_ranks(scores, RankDirection::higher_is_better);
  CHECK(f.mean_ranks[0] == doctest::Approx(1.0));
  // all-tied rows give every method the average rank
  Matrix tied = {{3, 3, 3}, {4, 4, 4}};
  FriedmanResult t = friedman_ranks(tied, RankDirection::lower_is_better);
  for (double v : t.mean_ranks) CHECK(v == doctest::Approx(2.0));
  CHECK(t.statistic == doctest::Approx(0.0));
  // NaN rows are dropped
  Matrix with_nan = {{1, 2, 3}, {std::nan(""), 2, 3}, {3, 2, 1}};
  FriedmanResult d = friedman_ranks(with_nan, RankDirection::lower_is_better);
  CHECK(d.rows_used == 2);
  for (double v : d.mean_ranks) CHECK(v == doctest::Approx(2.0));
  // too few usable rows
  Matrix thin = {{1, 2}, {std::nan(""), 2}};
  CHECK_THROWS_AS(friedman_ranks(thin, RankDirection::lower_is_better), ConfigError);
}

TEST_CASE("wilcoxon signed-rank matches the exact-enumeration fixture") {
  std::vector<double> x = {125, 115, 130, 140, 142, 115};
  std::vector<double> y = {110, 122, 125, 120, 141, 124};
  TestResult r = wilcoxon_signed_rank(x, y);
  // W+ = 14, W- = 7, statistic = min
  CHECK(r.statistic == doctest::Approx(7.0).epsilon(1e-12));
  // exact two-sided p over all 2^6 sign assignments is 0.5625; the normal
  // approximation with continuity correction lands within 0.05 of it
  CHECK(std::fabs(r.p_value - 0.5625) < 0.05);
  CHECK(r.p_value == doctest::Approx(0.5293681061847979).epsilon(1e-9));
}

TEST_CASE("wilcoxon behaviors") {
  // identical inputs: all differences zero
  TestResult same = wilcoxon_signed_rank({1, 2, 3, 4, 5}, {1, 2, 3, 4, 5});
  CHECK(same.degenerate);
  CHECK(same.p_value == 1.0);
  // a constant shift over 20 distinct values is decisive
  std::vector<double> a, b;
  for (int i = 0; i < 20; ++i) {
    a.push_back(i * 1.7 + 3.0);
    b.push_back(i * 1.7 + 13.0);
  }
  TestResult shift = wilcoxon_signed_rank(a, b);
  CHECK(shift.p_value < 0.01);
  // fewer than 5 non-zero differences is refused
  CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2, 3, 4}, {2, 3, 4, 5}), ConfigError);
  CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2, 3, 4, 5, 6}, {1, 2, 3, 4, 5, 7}),
                  ConfigError);
}

TEST_CASE("midranks average ties") {
  std::vector<double> r = midranks({10, 20, 20, 30});
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 2.5);
  CHECK(r[2] == 2.5);
  CHECK(r[3] == 4.0);
}
