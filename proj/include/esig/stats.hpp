#pragma once

#include <span>
#include <vector>

namespace esig {

/// Pairwise summation in a fixed order, so the result does not depend on how values were produced.
double pairwise_sum(std::span<const double> x);
double mean(std::span<const double> x);
/// Unbiased sample variance (divisor n-1).
double sample_variance(std::span<const double> x);
double sample_covariance(std::span<const double> x, std::span<const double> y);
double correlation(std::span<const double> x, std::span<const double> y);
double skewness(std::span<const double> x);
double excess_kurtosis(std::span<const double> x);

/// sup |F_n - Phi| against the standard normal.
double ks_statistic_normal(std::span<const double> x);
/// Two-sample KS statistic.
double ks_statistic(std::span<const double> a, std::span<const double> b);
/// Asymptotic Kolmogorov tail probability for statistic D with effective sample size n.
double ks_pvalue(double D, double n_effective);

struct TestResult {
  double statistic = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_two_sided = 1.0;
  double p_less = 1.0;  // alternative: first argument smaller
};

/// Paired t-test on a - b.
TestResult paired_t_test(std::span<const double> a, std::span<const double> b);
/// One-sample t-test of mean(x) == mu.
TestResult one_sample_t_test(std::span<const double> x, double mu);
/// F = var(a) / var(b).
TestResult f_test(std::span<const double> a, std::span<const double> b);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

double normal_cdf(double x);

}  // namespace esig
