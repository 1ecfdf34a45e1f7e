#pragma once

// Slow, obviously-correct reference computations used as test oracles.
// Nothing here calls the tensor or shuffle kernels of the library.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "esig/path.hpp"
#include "esig/words.hpp"

namespace oracle {

inline esig::PiecewiseLinearPath random_path(std::mt19937_64& rng, int d, std::size_t M) {
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(M)));
  std::vector<double> x(d * (M + 1), 0.0);
  for (std::size_t m = 1; m <= M; ++m)
    for (int i = 0; i < d; ++i) x[m * d + i] = x[(m - 1) * d + i] + g(rng);
  return esig::PiecewiseLinearPath(esig::Partition::uniform(1.0, M), d, std::move(x));
}

inline esig::PiecewiseLinearPath path_1d(std::vector<double> xs) {
  const std::size_t M = xs.size() - 1;
  return esig::PiecewiseLinearPath(esig::Partition::uniform(static_cast<double>(M), M), 1, std::move(xs));
}

// interleavings by choosing which output slots take letters of a
inline std::map<std::vector<int>, std::int64_t> shuffle(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::vector<int>, std::int64_t> out;
  const std::size_t n = a.size() + b.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) continue;
    std::vector<int> w;
    std::size_t i = 0, j = 0;
    for (std::size_t k = 0; k < n; ++k) w.push_back((mask >> k) & 1u ? a[i++] : b[j++]);
    ++out[w];
  }
  return out;
}

inline double factorial(std::size_t k) {
  double f = 1.0;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return f;
}

// S^w of a piecewise-linear path via Chen at the word level:
// S^{w}_{[0,m+1]} = sum_j S^{w[:j]}_{[0,m]} * prod(dx[w[j:]]) / (|w|-j)!
inline double sig_word(const esig::PiecewiseLinearPath& p, const std::vector<int>& w) {
  const std::size_t k = w.size();
  std::vector<double> pre(k + 1, 0.0);  // pre[j] = S^{w[:j]} so far
  pre[0] = 1.0;
  std::vector<double> dx(p.dim());
  for (std::size_t m = 0; m < p.steps(); ++m) {
    p.increment(m, dx);
    for (std::size_t len = k; len >= 1; --len) {
      double add = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        double prod = 1.0;
        for (std::size_t t = j; t < len; ++t) prod *= dx[w[t] - 1];
        add += pre[j] * prod / factorial(len - j);
      }
      pre[len] += add;
    }
  }
  return pre[k];
}

}  // namespace oracle
