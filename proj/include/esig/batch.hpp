#pragma once

#include <cstdint>
#include <vector>

#include "esig/path.hpp"
#include "esig/processes.hpp"
#include "esig/signature.hpp"

namespace esig {

enum class Exec { serial, parallel };

/// Runs fn(i) for i in [0, n). Every index writes only its own slot, so both modes give identical results.
template <class Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) fn(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

/// Paths first_index .. first_index+n-1 of stream `master`.
std::vector<PiecewiseLinearPath> simulate_batch(const Simulator& sim, std::uint64_t master, std::size_t n,
                                                Exec exec = Exec::parallel, std::uint64_t first_index = 0);

/// Row-major per-path values: sig[n * words + w], control likewise (empty unless requested).
struct BatchValues {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> sig;
  std::vector<double> control;
  double sig_at(std::size_t n, std::size_t w) const { return sig[n * cols + w]; }
  double control_at(std::size_t n, std::size_t w) const { return control[n * cols + w]; }
};

BatchValues evaluate_batch(const std::vector<PiecewiseLinearPath>& paths, const std::vector<Word>& words,
                           bool with_control, Exec exec = Exec::parallel);

/// Full truncated signatures of every path.
std::vector<TensorSeries> signature_batch(const std::vector<PiecewiseLinearPath>& paths, int K,
                                          Exec exec = Exec::parallel);

void set_threads(int n);

}  // namespace esig
