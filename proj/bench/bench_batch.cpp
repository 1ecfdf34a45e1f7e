// Serial vs OpenMP timings for the batch kernels, with a bitwise check that both agree.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <omp.h>

#include "esig/batch.hpp"
#include "esig/esig.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
double best_of(int runs, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < runs; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-28s serial %8.4f s  parallel %8.4f s  speedup %5.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t N = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20000;
  const int level = argc > 2 ? std::atoi(argv[2]) : 8;
  const int runs = 3;
  std::printf("N = %zu paths, dyadic level %d, %d threads\n", N, level, omp_get_max_threads());

  const esig::Simulator bm(esig::BmParams{2}, esig::Partition::dyadic(1.0, level));
  std::vector<esig::PiecewiseLinearPath> ps, pp;
  const double ts = best_of(runs, [&] { ps = esig::simulate_batch(bm, 7, N, esig::Exec::serial); });
  const double tp = best_of(runs, [&] { pp = esig::simulate_batch(bm, 7, N, esig::Exec::parallel); });
  bool same = true;
  for (std::size_t i = 0; i < N; ++i) same = same && ps[i].samples() == pp[i].samples();
  report("simulate bm d=2", ts, tp, same);

  const std::vector<esig::Word> words{esig::Word(2, {1, 2}), esig::Word(2, {2, 2}), esig::Word(2, {1, 2, 1, 2})};
  esig::BatchValues vs, vp;
  const double es = best_of(runs, [&] { vs = esig::evaluate_batch(ps, words, true, esig::Exec::serial); });
  const double ep = best_of(runs, [&] { vp = esig::evaluate_batch(ps, words, true, esig::Exec::parallel); });
  report("words + controls", es, ep, vs.sig == vp.sig && vs.control == vp.control);

  std::vector<esig::TensorSeries> ss, sp;
  const double ss_t = best_of(runs, [&] { ss = esig::signature_batch(ps, 4, esig::Exec::serial); });
  const double sp_t = best_of(runs, [&] { sp = esig::signature_batch(ps, 4, esig::Exec::parallel); });
  same = true;
  for (std::size_t i = 0; i < N; ++i) same = same && esig::max_abs_diff(ss[i], sp[i]) == 0.0;
  report("full signature K=4", ss_t, sp_t, same);

  const esig::Word I(2, {1, 2});
  double cs = 0, cp = 0;
  const double c2s = best_of(runs, [&] { cs = esig::estimate_c2(ps, I, esig::Exec::serial); });
  const double c2p = best_of(runs, [&] { cp = esig::estimate_c2(ps, I, esig::Exec::parallel); });
  report("c2 terms (qv-augmented)", c2s, c2p, cs == cp);
  return 0;
}
