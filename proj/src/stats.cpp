#include "esig/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace esig {

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t h = x.size() / 2;
  return pairwise_sum(x.subspan(0, h)) + pairwise_sum(x.subspan(h));
}

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of empty sample");
  return pairwise_sum(x) / static_cast<double>(x.size());
}

namespace {
std::vector<double> centered_power(std::span<const double> x, double mu, int power) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::pow(x[i] - mu, power);
  return out;
}
}  // namespace

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance needs at least 2 samples");
  const auto sq = centered_power(x, mean(x), 2);
  return pairwise_sum(sq) / static_cast<double>(x.size() - 1);
}

double sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("covariance needs equal sizes >= 2");
  const double mx = mean(x), my = mean(y);
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = (x[i] - mx) * (y[i] - my);
  return pairwise_sum(p) / static_cast<double>(x.size() - 1);
}

double correlation(std::span<const double> x, std::span<const double> y) {
  return sample_covariance(x, y) / std::sqrt(sample_variance(x) * sample_variance(y));
}

double skewness(std::span<const double> x) {
  const double mu = mean(x);
  const double m2 = pairwise_sum(centered_power(x, mu, 2)) / static_cast<double>(x.size());
  const double m3 = pairwise_sum(centered_power(x, mu, 3)) / static_cast<double>(x.size());
  return m3 / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> x) {
  const double mu = mean(x);
  const double m2 = pairwise_sum(centered_power(x, mu, 2)) / static_cast<double>(x.size());
  const double m4 = pairwise_sum(centered_power(x, mu, 4)) / static_cast<double>(x.size());
  return m4 / (m2 * m2) - 3.0;
}

double normal_cdf(double x) { return boost::math::cdf(boost::math::normal(), x); }

double ks_statistic_normal(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = normal_cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / x.size() - static_cast<double>(j) / y.size()));
  }
  return d;
}

double ks_pvalue(double D, double n_effective) {
  const double sn = std::sqrt(n_effective);
  const double lambda = (sn + 0.12 + 0.11 / sn) * D;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {
TestResult t_result(double t, double df) {
  boost::math::students_t dist(df);
  TestResult r;
  r.statistic = t;
  r.df1 = df;
  r.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  r.p_less = boost::math::cdf(dist, t);
  return r;
}
}  // namespace

TestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("paired t-test needs equal sizes >= 2");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return one_sample_t_test(diff, 0.0);
}

TestResult one_sample_t_test(std::span<const double> x, double mu) {
  const double n = static_cast<double>(x.size());
  const double se = std::sqrt(sample_variance(x) / n);
  const double m = mean(x) - mu;
  double t;
  if (se > 0.0) {
    t = m / se;
  } else {
    t = m == 0.0 ? 0.0 : std::copysign(INFINITY, m);
  }
  if (std::isinf(t)) {
    TestResult r;
    r.statistic = t;
    r.df1 = n - 1.0;
    r.p_two_sided = 0.0;
    r.p_less = t < 0 ? 0.0 : 1.0;
    return r;
  }
  return t_result(t, n - 1.0);
}

TestResult f_test(std::span<const double> a, std::span<const double> b) {
  const double va = sample_variance(a), vb = sample_variance(b);
  TestResult r;
  r.df1 = static_cast<double>(a.size() - 1);
  r.df2 = static_cast<double>(b.size() - 1);
  r.statistic = va / vb;
  boost::math::fisher_f dist(r.df1, r.df2);
  r.p_less = boost::math::cdf(dist, r.statistic);
  r.p_two_sided = std::min(1.0, 2.0 * std::min(r.p_less, 1.0 - r.p_less));
  return r;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs equal sizes >= 2");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - f.intercept - f.slope * x[i];
      rss += e * e;
    }
    f.slope_se = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
  }
  return f;
}

}  // namespace esig
