#include "esig/batch.hpp"

#include <omp.h>

namespace esig {

std::vector<PiecewiseLinearPath> simulate_batch(const Simulator& sim, std::uint64_t master, std::size_t n, Exec exec,
                                                std::uint64_t first_index) {
  std::vector<PiecewiseLinearPath> out(n);
  for_each_index(n, exec, [&](std::size_t i) { out[i] = sim.sample(StreamSeed{master, first_index + i}); });
  return out;
}

BatchValues evaluate_batch(const std::vector<PiecewiseLinearPath>& paths, const std::vector<Word>& words,
                           bool with_control, Exec exec) {
  BatchValues v;
  v.rows = paths.size();
  v.cols = words.size();
  v.sig.assign(v.rows * v.cols, 0.0);
  if (with_control) v.control.assign(v.rows * v.cols, 0.0);
  for_each_index(paths.size(), exec, [&](std::size_t n) {
    const WordValues wv = evaluate_words(paths[n], words, with_control);
    for (std::size_t w = 0; w < v.cols; ++w) {
      v.sig[n * v.cols + w] = wv.sig[w];
      if (with_control) v.control[n * v.cols + w] = wv.control[w];
    }
  });
  return v;
}

std::vector<TensorSeries> signature_batch(const std::vector<PiecewiseLinearPath>& paths, int K, Exec exec) {
  std::vector<TensorSeries> out(paths.size());
  for_each_index(paths.size(), exec, [&](std::size_t n) { out[n] = signature(paths[n], K); });
  return out;
}

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace esig
