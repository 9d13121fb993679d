#pragma once

// Special functions backing the p-values used elsewhere. Target accuracy 1e-10
// over the argument ranges that the statistical tests can produce.

namespace driftscan::special {

// Regularized incomplete beta I_x(a, b); x in [0,1], a > 0, b > 0.
double regularized_beta(double x, double a, double b);

// Regularized lower incomplete gamma P(a, x); a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

// Upper tail of the F distribution with (d1, d2) degrees of freedom.
double f_sf(double f, double d1, double d2);

// Upper tail of the chi-squared distribution with df degrees of freedom.
double chi2_sf(double x, double df);

// Upper tail of the standard normal distribution.
double normal_sf(double z);

// Quantile of the standard normal distribution (inverse CDF), by bisection
// on normal_sf; p in (0, 1).
double normal_quantile(double p);

}  // namespace driftscan::special
