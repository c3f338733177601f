#pragma once

// Probability distributions implemented in-repo so results are bit-stable
// across platforms: regularized incomplete gamma (series + continued
// fraction), chi-square CDF/inverse, normal CDF/quantile, Sidak correction.

namespace scfa {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile; |normal_cdf(normal_quantile(p)) - p| < 1e-10.
// Rational approximation refined with one Halley step.
double normal_quantile(double p);

// Chi-square CDF with k >= 1 degrees of freedom.
double chi_square_cdf(double x, int k);

// Functional inverse of chi_square_cdf in its first argument, 0 < p < 1.
double chi_square_inv(double p, int k);

// Per-test level 1 - (1-alpha)^(1/d) keeping overall type-I risk at alpha
// over d tests.
double sidak_level(double alpha, long d);

}  // namespace scfa
