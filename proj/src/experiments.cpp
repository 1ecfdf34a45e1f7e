#include "esig/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "esig/batch.hpp"
#include "esig/colreg.hpp"
#include "esig/esig.hpp"
#include "esig/sigfin.hpp"
#include "esig/signature.hpp"
#include "esig/stats.hpp"
#include "esig/svg.hpp"
#include "esig/tensor.hpp"

namespace esig {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr std::uint64_t kChopBudget = 1u << 20;  // vertices per long path for chopped reference runs

std::string plot_comment(const ExperimentConfig& c) {
  return "config_hash=" + config_hash(c.effective) + " version=" + kVersion;
}

std::vector<double> column(const std::vector<double>& rowmajor, std::size_t W, std::size_t w) {
  const std::size_t n = W ? rowmajor.size() / W : 0;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rowmajor[i * W + w];
  return out;
}

BatchValues pick(const BatchValues& v, std::size_t w) {
  BatchValues out;
  out.rows = v.rows;
  out.cols = 1;
  out.sig = column(v.sig, v.cols, w);
  if (!v.control.empty()) out.control = column(v.control, v.cols, w);
  return out;
}

bool ends_in(const Word& w, const std::vector<int>& letters) {
  return !w.is_empty() && std::find(letters.begin(), letters.end(), w.back()) != letters.end();
}

// Runs fn(r) for every replication. A single replication keeps the inner kernels parallel.
template <class Fn>
void run_reps(std::size_t R, Fn&& fn) {
  if (R == 1)
    fn(std::size_t{0});
  else
    for_each_index(R, Exec::parallel, fn);
}

// Concatenated values of `blocks` batches drawn from one source.
BatchValues draw_values(const SampleSource& src, const std::vector<Word>& words, std::size_t blocks,
                        std::uint64_t master, bool with_control) {
  std::vector<BatchValues> parts(blocks);
  run_reps(blocks, [&](std::size_t b) {
    parts[b] = evaluate_batch(src.draw(master, b), words, with_control, Exec::parallel);
  });
  BatchValues out;
  out.cols = words.size();
  for (auto& p : parts) {
    out.rows += p.rows;
    out.sig.insert(out.sig.end(), p.sig.begin(), p.sig.end());
    out.control.insert(out.control.end(), p.control.begin(), p.control.end());
  }
  return out;
}

// Batch size for reference runs: chopped long paths are capped in length.
std::size_t reference_block(const ExperimentConfig& c, std::size_t N, int level) {
  if (c.sampling != "chop") return N;
  const std::uint64_t per = std::uint64_t{1} << level;
  return std::clamp<std::size_t>(static_cast<std::size_t>(kChopBudget / per), 1, N);
}

struct Reference {
  std::vector<double> phi;
  std::vector<double> se;
  std::size_t N = 0;
  int level = 0;
};

// Self-run reference; words ending in a martingale letter use the c1 correction when `corrected`.
// With several blocks the standard error comes from block means, which stays valid when samples
// inside a chopped path are dependent.
Reference reference_run(const ExperimentConfig& c, const std::vector<Word>& words, std::size_t total, int level,
                        std::size_t block, bool corrected, std::string_view tag) {
  const SampleSource src(c, level, block);
  const std::size_t blocks = std::max<std::size_t>(1, (total + block - 1) / block);
  const BatchValues v = draw_values(src, words, blocks, derive_seed(c.seed, tag), corrected);
  const std::size_t W = words.size();
  EstimateReport est = expected_signature(v, words);
  if (corrected) {
    const auto mart = estimator_martingale_letters(c);
    const EstimateReport cor = corrected_expected_signature(v, words, {CMode::c1, 0.0});
    for (std::size_t w = 0; w < W; ++w) {
      if (!ends_in(words[w], mart)) continue;
      est.phi_hat[w] = cor.phi_hat[w];
      est.variance[w] = cor.variance[w];
      for (std::size_t n = 0; n < v.rows; ++n) est.per_sample[n * W + w] = cor.per_sample[n * W + w];
    }
  }
  Reference r;
  r.phi = est.phi_hat;
  r.N = v.rows;
  r.level = level;
  r.se.resize(W);
  for (std::size_t w = 0; w < W; ++w) {
    if (blocks < 2) {
      r.se[w] = std::sqrt(est.variance[w]);
      continue;
    }
    const auto col = column(est.per_sample, W, w);
    std::vector<double> means(blocks);
    for (std::size_t b = 0; b < blocks; ++b)
      means[b] = mean(std::span<const double>(col).subspan(b * block, block));
    r.se[w] = std::sqrt(sample_variance(means) / static_cast<double>(blocks));
  }
  return r;
}

json maybe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

PiecewiseLinearPath to_estimator(const ExperimentConfig& c, const PiecewiseLinearPath& p) {
  if (c.transform == "time-lead-lag") return time_lead_lag(p.dim() == 1 ? p : p.coordinate(0));
  return p;
}

Functional payoff_functional(const ExperimentConfig& c) {
  std::size_t K = 1;
  for (const auto& [w, v] : c.payoff.terms) K = std::max(K, Word::parse(w, 4).size());
  Functional f(4, static_cast<int>(K));
  for (const auto& [w, v] : c.payoff.terms) f.set(Word::parse(w, 4), v);
  return f;
}

json functional_json(const Functional& f) {
  json o = json::object();
  for (const auto& [w, v] : f.coeffs()) o[w.to_string()] = v;
  return o;
}

}  // namespace

SampleSource::SampleSource(const ExperimentConfig& config, int level, std::size_t N)
    : config_(&config), level_(level), N_(N) {
  if (N == 0) throw ConfigError("N", "must be >= 1");
  const Partition base = Partition::dyadic(config.T, level);
  if (config.sampling == "chop")
    sim_.emplace(config.process, tile_partition(base, N));
  else
    sim_.emplace(config.process, base);
}

std::vector<PiecewiseLinearPath> SampleSource::draw(std::uint64_t master, std::uint64_t batch,
                                                    bool transformed) const {
  std::vector<PiecewiseLinearPath> paths;
  if (config_->sampling == "chop")
    paths = chop(sim_->sample({master, batch}), config_->T, N_);
  else
    paths = simulate_batch(*sim_, master, N_, Exec::parallel, batch * N_);
  if (transformed && config_->transform != "none")
    for_each_index(paths.size(), Exec::parallel, [&](std::size_t i) { paths[i] = to_estimator(*config_, paths[i]); });
  return paths;
}

std::vector<int> estimator_martingale_letters(const ExperimentConfig& c) {
  const auto letters = martingale_letters(c.process);
  if (c.transform == "time-lead-lag") {
    if (std::find(letters.begin(), letters.end(), 1) != letters.end()) return {kPriceLead};
    return {};
  }
  return letters;
}

CltStats clt_stats(std::span<const double> phi, std::span<const double> sigma, double reference, std::size_t N) {
  CltStats s;
  const double rootN = std::sqrt(static_cast<double>(N));
  for (std::size_t r = 0; r < phi.size(); ++r) {
    if (!(sigma[r] > 0.0) || !std::isfinite(sigma[r]) || !std::isfinite(phi[r])) {
      ++s.flagged;
      continue;
    }
    s.z.push_back(rootN * (phi[r] - reference) / std::sqrt(sigma[r]));
  }
  if (s.z.size() < 8) {
    s.degenerate = true;
    s.skewness = s.excess_kurtosis = s.ks = std::numeric_limits<double>::quiet_NaN();
    s.ks_p = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.skewness = skewness(s.z);
  s.excess_kurtosis = excess_kurtosis(s.z);
  s.ks = ks_statistic_normal(s.z);
  s.ks_p = ks_pvalue(s.ks, static_cast<double>(s.z.size()));
  return s;
}

std::vector<AlgebraCheck> algebraic_suite(std::size_t cases, std::uint64_t seed) {
  enum { kChen, kShuffle, kReversal, kRefinement, kCausal, kCount };
  std::vector<double> dev(cases * kCount, 0.0);
  for_each_index(cases, Exec::parallel, [&](std::size_t n) {
    NormalStream rng({derive_seed(seed, "algebra"), n});
    auto& e = rng.engine();
    const int d = 1 + static_cast<int>(e() % 3);
    const int K = 1 + static_cast<int>(e() % 4);
    const std::size_t M = 2 + e() % 31;
    std::vector<double> t(M + 1, 0.0), x((M + 1) * static_cast<std::size_t>(d), 0.0);
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    for (std::size_t m = 1; m <= M; ++m) {
      t[m] = t[m - 1] + unif(e);
      for (int i = 0; i < d; ++i) x[m * d + i] = x[(m - 1) * d + i] + scale * rng();
    }
    const PiecewiseLinearPath p(Partition(t), d, x);
    const TensorSeries S = signature(p, K);
    double* out = &dev[n * kCount];

    const std::size_t cut = 1 + e() % (M - 1);
    out[kChen] = max_abs_diff(S, tensor_product(signature(p.slice(0, cut), K), signature(p.slice(cut, M), K)));

    std::uniform_int_distribution<int> letter(1, d);
    const int la = static_cast<int>(e() % static_cast<unsigned>(K + 1));
    const int lb = static_cast<int>(e() % static_cast<unsigned>(K - la + 1));
    std::vector<int> a(la), b(lb);
    for (auto& l : a) l = letter(e);
    for (auto& l : b) l = letter(e);
    const Word wa(d, a), wb(d, b);
    double rhs = 0.0;
    const WordPolynomial sh = shuffle(wa, wb);
    for (const auto& [w, coef] : sh.terms()) rhs += static_cast<double>(coef) * S[w];
    out[kShuffle] = std::abs(S[wa] * S[wb] - rhs);

    out[kReversal] = max_abs_diff(tensor_product(S, signature(p.reversed(), K)), TensorSeries::unit(d, K));

    std::vector<double> t2, x2;
    for (std::size_t m = 0; m <= M; ++m) {
      t2.push_back(t[m]);
      for (int i = 0; i < d; ++i) x2.push_back(x[m * d + i]);
      if (m == M) break;
      const double u = unif(e) * 0.9;  // interior point of the segment
      t2.push_back(t[m] + u * (t[m + 1] - t[m]));
      for (int i = 0; i < d; ++i) x2.push_back(x[m * d + i] + u * (x[(m + 1) * d + i] - x[m * d + i]));
    }
    out[kRefinement] = max_abs_diff(S, signature(PiecewiseLinearPath(Partition(t2), d, x2), K));

    out[kCausal] = max_abs_diff(S, signature_causal(p, K));
  });
  const char* names[] = {"chen", "shuffle", "reversal", "refinement", "causal"};
  std::vector<AlgebraCheck> checks;
  for (int k = 0; k < kCount; ++k) {
    AlgebraCheck c{names[k], cases, 0.0};
    for (std::size_t n = 0; n < cases; ++n) c.max_deviation = std::max(c.max_deviation, dev[n * kCount + k]);
    checks.push_back(c);
  }
  return checks;
}

ExperimentOutput run_infill(const ExperimentConfig& c) {
  const auto& inf = c.infill;
  if (inf.level_min < 0 || inf.level_min > inf.level_max)
    throw ConfigError("infill.level_min", "must lie in [0, level_max]");
  if (inf.reference_level < inf.level_max)
    throw ConfigError("infill.reference_level", "reference grid must refine every level (needs >= level_max)");
  if (inf.reference_level > 16) throw ConfigError("infill.reference_level", "must be <= 16");
  if (c.sampling != "ind") throw ConfigError("sampling", "infill compares grids of independent paths; use 'ind'");
  const auto words = c.parsed_words();
  const std::size_t W = words.size(), N = c.N;
  const int L = inf.level_max - inf.level_min + 1;
  const Simulator sim(c.process, Partition::dyadic(c.T, inf.reference_level));
  const std::uint64_t master = derive_seed(c.seed, "infill");

  std::vector<double> sq(N * L * W), refval(N * W);
  for_each_index(N, Exec::parallel, [&](std::size_t n) {
    const PiecewiseLinearPath raw = sim.sample({master, n});
    const auto ref = evaluate_words(to_estimator(c, raw), words, false).sig;
    for (int l = 0; l < L; ++l) {
      const std::size_t stride = std::size_t{1} << (inf.reference_level - inf.level_min - l);
      const auto coarse = evaluate_words(to_estimator(c, raw.subsample(stride)), words, false).sig;
      for (std::size_t w = 0; w < W; ++w) {
        const double e = coarse[w] - ref[w];
        sq[(n * L + l) * W + w] = e * e;
      }
    }
    for (std::size_t w = 0; w < W; ++w) refval[n * W + w] = ref[w];
  });

  ExperimentOutput out;
  out.samples.header = {"level", "word", "rms_error"};
  json jw = json::array();
  std::vector<PlotSeries> series;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::vector<double> levels;
  for (int l = 0; l < L; ++l) levels.push_back(inf.level_min + l);
  for (std::size_t w = 0; w < W; ++w) {
    std::vector<double> rms(L), lg(L);
    for (int l = 0; l < L; ++l) {
      std::vector<double> col(N);
      for (std::size_t n = 0; n < N; ++n) col[n] = sq[(n * L + l) * W + w];
      rms[l] = std::sqrt(mean(col));
      out.samples.rows.push_back({fmt(levels[l]), words[w].to_string(), fmt(rms[l])});
    }
    const auto ref_col = column(refval, W, w);
    std::vector<double> ref_sq(N);
    for (std::size_t n = 0; n < N; ++n) ref_sq[n] = ref_col[n] * ref_col[n];
    const double scale = std::max(1.0, std::sqrt(mean(ref_sq)));
    const bool degenerate = *std::max_element(rms.begin(), rms.end()) <= 1e-12 * scale;
    json e = {{"word", words[w].to_string()}, {"rms_error", rms}, {"degenerate", degenerate}};
    if (degenerate) {
      e["slope"] = nullptr;
      e["slope_se"] = nullptr;
      e["within_tolerance"] = false;
      e["note"] = "error vanishes up to rounding at every level; the coefficient is exact on any partition";
    } else {
      for (int l = 0; l < L; ++l) lg[l] = std::log2(rms[l]);
      const LineFit fit = fit_line(levels, lg);
      e["slope"] = fit.slope;
      e["slope_se"] = fit.slope_se;
      e["within_tolerance"] = std::abs(fit.slope - inf.expected_slope) <= inf.tolerance;
      series.push_back({words[w].to_string(), levels, rms, colors[w % 4], false});
    }
    jw.push_back(e);
  }
  out.summary = {{"paths", N},
                 {"levels", levels},
                 {"reference_level", inf.reference_level},
                 {"expected_slope", inf.expected_slope},
                 {"tolerance", inf.tolerance},
                 {"process", process_to_json(c.process)},
                 {"words", jw}};
  if (!series.empty())
    out.svg = svg_plot({"In-fill error", "dyadic level", "RMS error", true, plot_comment(c)}, series);
  return out;
}

ExperimentOutput run_consistency(const ExperimentConfig& c) {
  const auto& cs = c.consistency;
  if (cs.n_min == 0 || cs.n_min > cs.n_max) throw ConfigError("consistency.n_min", "must lie in [1, n_max]");
  const auto words = c.parsed_words();
  const std::size_t W = words.size(), R = c.replications;
  std::vector<std::size_t> ladder;
  for (std::size_t N = cs.n_min; N <= cs.n_max; N *= 2) ladder.push_back(N);

  const int level_ref = std::min(c.partition.level_for(ladder.back()) + c.reference.refine, 16);
  const std::size_t total = c.reference.N ? c.reference.N : c.reference.multiplier * ladder.back();
  const Reference ref =
      reference_run(c, words, total, level_ref, reference_block(c, ladder.back(), level_ref), false, "reference");

  ExperimentOutput out;
  out.samples.header = {"N", "level", "rep", "word", "phi_hat"};
  std::vector<std::vector<double>> rms(W), mean_err(W), se(W);
  json jl = json::array();
  for (std::size_t N : ladder) {
    const int level = c.partition.level_for(N);
    const SampleSource src(c, level, N);
    const std::uint64_t master = derive_seed(c.seed, "consistency-" + std::to_string(N));
    std::vector<double> phi(R * W);
    run_reps(R, [&](std::size_t r) {
      const auto est = expected_signature(src.draw(master, r), words, Exec::parallel);
      for (std::size_t w = 0; w < W; ++w) phi[r * W + w] = est.phi_hat[w];
    });
    json row = {{"N", N}, {"level", level}};
    std::vector<double> rr, mm, ss;
    for (std::size_t w = 0; w < W; ++w) {
      std::vector<double> err(R), err2(R);
      for (std::size_t r = 0; r < R; ++r) {
        err[r] = phi[r * W + w] - ref.phi[w];
        err2[r] = err[r] * err[r];
        out.samples.rows.push_back(
            {std::to_string(N), std::to_string(level), std::to_string(r), words[w].to_string(), fmt(phi[r * W + w])});
      }
      rr.push_back(std::sqrt(mean(err2)));
      mm.push_back(mean(err));
      ss.push_back(R > 1 ? std::sqrt(sample_variance(err) / static_cast<double>(R)) : 0.0);
      rms[w].push_back(rr.back());
      mean_err[w].push_back(mm.back());
      se[w].push_back(ss.back());
    }
    row["rms_error"] = rr;
    row["mean_error"] = mm;
    row["se_mean"] = ss;
    jl.push_back(row);
  }

  json jw = json::array();
  std::vector<PlotSeries> series;
  std::vector<double> lgN;
  for (std::size_t N : ladder) lgN.push_back(std::log2(static_cast<double>(N)));
  for (std::size_t w = 0; w < W; ++w) {
    json e = {{"word", words[w].to_string()}, {"reference", ref.phi[w]}, {"reference_se", ref.se[w]}};
    bool positive = std::all_of(rms[w].begin(), rms[w].end(), [](double v) { return v > 0.0; });
    if (ladder.size() >= 2 && positive) {
      std::vector<double> lg;
      for (double v : rms[w]) lg.push_back(std::log2(v));
      const LineFit fit = fit_line(lgN, lg);
      e["slope_vs_log2N"] = fit.slope;
      e["slope_se"] = fit.slope_se;
      series.push_back({words[w].to_string(), lgN, rms[w], "#1f77b4", false});
    } else {
      e["slope_vs_log2N"] = nullptr;
      e["slope_se"] = nullptr;
    }
    // RMS error after quadrupling N; sqrt(N) scaling predicts 1/2
    json q = json::array();
    bool halving = true;
    for (std::size_t i = 0; i + 2 < ladder.size(); ++i) {
      const double ratio = rms[w][i] > 0 ? rms[w][i + 2] / rms[w][i] : std::numeric_limits<double>::quiet_NaN();
      const bool ok = std::isfinite(ratio) && std::abs(ratio / 0.5 - 1.0) <= 0.3;
      halving = halving && ok;
      q.push_back({{"N", ladder[i]}, {"ratio", maybe(ratio)}, {"within_30pct", ok}});
    }
    e["quadrupling"] = q;
    e["halving_within_30pct"] = halving;
    const double final_err = std::abs(mean_err[w].back());
    const double final_se = std::hypot(se[w].back(), ref.se[w]);
    e["final_abs_error"] = final_err;
    e["final_se"] = final_se;
    e["final_within_3se"] = final_err <= 3.0 * final_se;
    jw.push_back(e);
  }
  out.summary = {{"replications", R},
                 {"sampling", c.sampling},
                 {"process", process_to_json(c.process)},
                 {"reference", {{"N", ref.N}, {"level", ref.level}}},
                 {"ladder", jl},
                 {"words", jw}};
  if (!series.empty())
    out.svg = svg_plot({"Consistency", "log2 N", "RMS error", true, plot_comment(c)}, series);
  return out;
}

ExperimentOutput run_clt(const ExperimentConfig& c) {
  const std::size_t R = c.replications, N = c.N;
  if (R < 200) throw ConfigError("replications", "clt needs at least 200 replications");
  const auto words = c.parsed_words();
  const std::size_t W = words.size();
  const int level = c.partition.level_for(N);
  const SampleSource src(c, level, N);
  const std::uint64_t master = derive_seed(c.seed, "clt");

  std::vector<double> phi(R * W), sig(R * W);
  std::vector<std::size_t> bandwidth(R);
  std::vector<char> clipped(R);
  for_each_index(R, Exec::parallel, [&](std::size_t r) {
    const auto est = expected_signature(src.draw(master, r), words, Exec::parallel);
    const HacResult hac = hac_long_run_cov(est.per_sample, W, c.hac);
    for (std::size_t w = 0; w < W; ++w) {
      phi[r * W + w] = est.phi_hat[w];
      sig[r * W + w] = hac.sigma(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(w));
    }
    bandwidth[r] = hac.bandwidth;
    clipped[r] = hac.clipped;
  });

  // independent reference run with R*N samples unless configured
  const std::size_t total = c.reference.N ? c.reference.N : R * N;
  const Reference ref = reference_run(c, words, total, level, N, false, "reference");

  ExperimentOutput out;
  out.samples.header = {"rep", "word", "phi_hat", "sigma_hat", "z"};
  json jw = json::array();
  std::optional<std::vector<double>> first_z;
  for (std::size_t w = 0; w < W; ++w) {
    const auto p = column(phi, W, w), s = column(sig, W, w);
    const CltStats st = clt_stats(p, s, ref.phi[w], N);
    std::size_t k = 0;
    const double rootN = std::sqrt(static_cast<double>(N));
    for (std::size_t r = 0; r < R; ++r) {
      const bool ok = s[r] > 0.0 && std::isfinite(s[r]) && std::isfinite(p[r]);
      const std::string z = ok ? fmt(rootN * (p[r] - ref.phi[w]) / std::sqrt(s[r])) : "flagged";
      if (ok) ++k;
      out.samples.rows.push_back({std::to_string(r), words[w].to_string(), fmt(p[r]), fmt(s[r]), z});
    }
    json e = {{"word", words[w].to_string()},
              {"reference", ref.phi[w]},
              {"reference_se", ref.se[w]},
              {"used", st.z.size()},
              {"flagged", st.flagged},
              {"degenerate", st.degenerate}};
    if (!st.degenerate) {
      e["mean_z"] = mean(st.z);
      e["sd_z"] = std::sqrt(sample_variance(st.z));
      first_z = first_z ? first_z : st.z;
    }
    e["skewness"] = maybe(st.skewness);
    e["excess_kurtosis"] = maybe(st.excess_kurtosis);
    e["ks"] = maybe(st.ks);
    e["ks_p"] = maybe(st.ks_p);
    jw.push_back(e);
  }
  out.summary = {{"replications", R},
                 {"N", N},
                 {"level", level},
                 {"sampling", c.sampling},
                 {"process", process_to_json(c.process)},
                 {"hac", {{"bandwidth", bandwidth.front()},
                          {"clipped", std::any_of(clipped.begin(), clipped.end(), [](char v) { return v != 0; })},
                          {"kernel", c.hac.kernel == HacKernel::bartlett ? "bartlett" : "truncation"},
                          {"upsilon", c.hac.upsilon}}},
                 {"reference", {{"N", ref.N}, {"level", ref.level}}},
                 {"words", jw}};
  if (first_z) {
    const Histogram h = histogram(*first_z, -4.0, 4.0, 32);
    std::vector<double> dens;
    for (double x : h.centers) dens.push_back(std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi));
    out.svg = svg_plot({"Standardised estimates", "z", "density", false, plot_comment(c)},
                       {{"estimates", h.centers, h.density, "#1f77b4", true}, {"N(0,1)", h.centers, dens, "#d62728", false}});
  }
  return out;
}

ExperimentOutput run_density(const ExperimentConfig& c) {
  const std::size_t R = c.replications, N = c.N;
  if (R < 2) throw ConfigError("replications", "density needs at least 2 replications");
  const auto words = c.parsed_words();
  const std::size_t W = words.size();
  const auto mart = estimator_martingale_letters(c);
  std::vector<bool> is_mart(W);
  for (std::size_t w = 0; w < W; ++w) is_mart[w] = ends_in(words[w], mart);
  const int level = c.partition.level_for(N);
  const SampleSource src(c, level, N);
  const std::uint64_t master = derive_seed(c.seed, "density");
  const CorrectionOptions opts = c.estimator;

  std::vector<double> naive(R * W), corr(R * W), cval(R * W, 0.0);
  for_each_index(R, Exec::parallel, [&](std::size_t r) {
    const auto paths = src.draw(master, r);
    const BatchValues v = evaluate_batch(paths, words, true, Exec::parallel);
    const EstimateReport nv = expected_signature(v, words);
    std::vector<Word> mw;
    std::vector<std::size_t> idx;
    for (std::size_t w = 0; w < W; ++w) {
      naive[r * W + w] = corr[r * W + w] = nv.phi_hat[w];
      if (is_mart[w] && opts.mode != CMode::none) {
        mw.push_back(words[w]);
        idx.push_back(w);
      }
    }
    if (mw.empty()) return;
    const EstimateReport cr = opts.mode == CMode::c2 ? corrected_expected_signature(paths, mw, opts, Exec::parallel)
                                                     : corrected_expected_signature(v, words, opts);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t src_w = opts.mode == CMode::c2 ? k : idx[k];
      corr[r * W + idx[k]] = cr.phi_hat[src_w];
      cval[r * W + idx[k]] = cr.c_used[src_w];
    }
  });

  const int level_ref = std::min(level + c.reference.refine, 16);
  const std::size_t total = c.reference.N ? c.reference.N : c.reference.multiplier * N;
  const Reference ref = reference_run(c, words, total, level_ref, reference_block(c, N, level_ref),
                                      !mart.empty(), "reference");

  ExperimentOutput out;
  out.samples.header = {"rep", "word", "naive", "corrected", "c"};
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t w = 0; w < W; ++w)
      out.samples.rows.push_back({std::to_string(r), words[w].to_string(), fmt(naive[r * W + w]),
                                  fmt(corr[r * W + w]), fmt(cval[r * W + w])});

  json jw = json::array();
  std::optional<std::size_t> plot_word;
  const double Rd = static_cast<double>(R);
  for (std::size_t w = 0; w < W; ++w) {
    const auto a = column(naive, W, w), b = column(corr, W, w);
    std::vector<double> ea(R), eb(R);
    for (std::size_t r = 0; r < R; ++r) {
      ea[r] = (a[r] - ref.phi[w]) * (a[r] - ref.phi[w]);
      eb[r] = (b[r] - ref.phi[w]) * (b[r] - ref.phi[w]);
    }
    auto side = [&](const std::vector<double>& x, const std::vector<double>& e2) {
      const double m = mean(x), var = sample_variance(x);
      const double se = std::sqrt(var / Rd + ref.se[w] * ref.se[w]);
      const double z = se > 0 ? (m - ref.phi[w]) / se : 0.0;
      return json{{"mean", m}, {"sd", std::sqrt(var)}, {"mse", mean(e2)}, {"bias_z", z}, {"centered", std::abs(z) <= 3.0}};
    };
    json e = {{"word", words[w].to_string()},
              {"martingale", static_cast<bool>(is_mart[w])},
              {"reference", ref.phi[w]},
              {"reference_se", ref.se[w]},
              {"naive", side(a, ea)},
              {"corrected", side(b, eb)}};
    if (is_mart[w] && opts.mode != CMode::none) {
      const double mse_a = mean(ea), mse_b = mean(eb);
      e["mse_ratio"] = maybe(mse_a > 0 ? mse_b / mse_a : std::numeric_limits<double>::quiet_NaN());
      const TestResult pt = paired_t_test(eb, ea);
      e["paired_t"] = {{"statistic", maybe(pt.statistic)}, {"p_less", maybe(pt.p_less)}};
      const TestResult ft = f_test(b, a);
      e["f_test"] = {{"statistic", maybe(ft.statistic)}, {"p_less", maybe(ft.p_less)}};
      if (!plot_word) plot_word = w;
    }
    jw.push_back(e);
  }
  out.summary = {{"replications", R},
                 {"N", N},
                 {"level", level},
                 {"transform", c.transform},
                 {"c_mode", c_mode_name(opts.mode)},
                 {"process", process_to_json(c.process)},
                 {"reference", {{"N", ref.N}, {"level", ref.level}}},
                 {"words", jw}};
  const std::size_t pw = plot_word.value_or(0);
  const auto a = column(naive, W, pw), b = column(corr, W, pw);
  double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const Histogram ha = histogram(a, lo, hi, 30), hb = histogram(b, lo, hi, 30);
  out.svg = svg_plot({"Estimator densities, word " + words[pw].to_string(), "estimate", "density", true, plot_comment(c)},
                     {{"naive", ha.centers, ha.density, "#d62728", true},
                      {"corrected", hb.centers, hb.density, "#1f77b4", true}});
  return out;
}

ExperimentOutput run_variance_reduction(const ExperimentConfig& c) {
  const auto words = c.parsed_words();
  const std::size_t W = words.size(), N = c.N;
  if (N < 2) throw ConfigError("N", "variance-reduction needs at least 2 samples");
  const auto mart = estimator_martingale_letters(c);
  const int level = c.partition.level_for(N);
  const SampleSource src(c, level, N);
  const auto paths = src.draw(derive_seed(c.seed, "variance-reduction"), 0);
  const BatchValues v = evaluate_batch(paths, words, true, Exec::parallel);
  const EstimateReport nv = expected_signature(v, words);

  std::vector<CMode> modes{CMode::c1, CMode::c1_centered, CMode::c2};
  if (c.estimator.mode == CMode::fixed) modes.push_back(CMode::fixed);

  ExperimentOutput out;
  out.samples.header = {"word", "mode", "c", "phi_hat", "se", "variance_ratio", "one_minus_rho2"};
  json jw = json::array();
  const double Nd = static_cast<double>(N);
  for (std::size_t w = 0; w < W; ++w) {
    const auto s = column(v.sig, W, w), sc = column(v.control, W, w);
    const double vs = sample_variance(s), vc = sample_variance(sc);
    const double rho2 = vs > 0 && vc > 0 ? std::pow(correlation(s, sc), 2) : 0.0;
    json e = {{"word", words[w].to_string()},
              {"martingale", ends_in(words[w], mart)},
              {"rho2", rho2},
              {"naive", {{"phi_hat", nv.phi_hat[w]}, {"se", std::sqrt(nv.variance[w])}, {"variance", vs}}}};
    out.samples.rows.push_back({words[w].to_string(), "none", "0", fmt(nv.phi_hat[w]), fmt(std::sqrt(nv.variance[w])),
                                "1", fmt(1.0 - rho2)});
    json jm = json::object();
    for (CMode m : modes) {
      if (m == CMode::c2 && words[w].size() < 2) continue;
      const CorrectionOptions opts{m, c.estimator.c};
      const EstimateReport cr = m == CMode::c2 ? corrected_expected_signature(paths, {words[w]}, opts, Exec::parallel)
                                               : corrected_expected_signature(pick(v, w), {words[w]}, opts);
      const double cw = cr.c_used[0];
      std::vector<double> corrected(N), diff(N);
      for (std::size_t n = 0; n < N; ++n) {
        corrected[n] = s[n] - cw * sc[n];
        diff[n] = corrected[n] - s[n];
      }
      const double ratio = vs > 0 ? sample_variance(corrected) / vs : 1.0;
      const double target = 1.0 - rho2;
      const double diff_se = std::sqrt(sample_variance(diff) / Nd);
      const double shift = mean(corrected) - nv.phi_hat[w];
      json r = {{"c", cw},
                {"c_fallback", static_cast<bool>(cr.c_fallback[0])},
                {"phi_hat", mean(corrected)},
                {"se", std::sqrt(sample_variance(corrected) / Nd)},
                {"variance_ratio", ratio},
                {"relative_gap_to_one_minus_rho2", maybe(target > 0 ? std::abs(ratio - target) / target
                                                                    : std::numeric_limits<double>::quiet_NaN())},
                {"shift", shift},
                {"shift_se", diff_se},
                {"shift_within_3se", std::abs(shift) <= 3.0 * diff_se}};
      jm[c_mode_name(m)] = r;
      out.samples.rows.push_back({words[w].to_string(), c_mode_name(m), fmt(cw), fmt(mean(corrected)),
                                  fmt(std::sqrt(sample_variance(corrected) / Nd)), fmt(ratio), fmt(target)});
    }
    e["corrected"] = jm;
    if (words[w].size() >= 2) e["mse_diff_diagnostic"] = mse_diff_diagnostic(paths, words[w], Exec::parallel);
    jw.push_back(e);
  }
  out.summary = {{"N", N},
                 {"level", level},
                 {"transform", c.transform},
                 {"selected_mode", c_mode_name(c.estimator.mode)},
                 {"process", process_to_json(c.process)},
                 {"words", jw}};
  return out;
}

ExperimentOutput run_price(const ExperimentConfig& c) {
  if (c.payoff.terms.empty()) throw ConfigError("payoff.terms", "price needs at least one payoff term");
  const int level = c.partition.level_for(c.N);
  const SampleSource src(c, level, c.N);
  const auto prices = src.draw(derive_seed(c.seed, "price"), 0, false);
  PricingSpec spec;
  spec.f = payoff_functional(c);
  spec.discount = c.payoff.discount;
  spec.N = c.N;
  spec.correction = c.estimator.mode != CMode::none;
  spec.c_mode = spec.correction ? c.estimator.mode : CMode::c1;
  const PriceResult pr = price(spec, prices, Exec::parallel);
  PricingSpec plain = spec;
  plain.correction = false;
  const PriceResult pn = price(plain, prices, Exec::parallel);

  ExperimentOutput out;
  out.samples.header = {"word", "coefficient", "phi_hat", "c"};
  json jw = json::array();
  for (std::size_t k = 0; k < pr.words.size(); ++k) {
    jw.push_back({{"word", pr.words[k].to_string()}, {"phi_hat", pr.phi_hat[k]}, {"c", pr.c_used[k]}});
    out.samples.rows.push_back(
        {pr.words[k].to_string(), fmt(spec.f.get(pr.words[k])), fmt(pr.phi_hat[k]), fmt(pr.c_used[k])});
  }
  out.summary = {{"N", c.N},
                 {"level", level},
                 {"payoff", functional_json(spec.f)},
                 {"discount", spec.discount},
                 {"c_mode", c_mode_name(c.estimator.mode)},
                 {"price", pr.price},
                 {"se", pr.se},
                 {"uncorrected_price", pn.price},
                 {"uncorrected_se", pn.se},
                 {"process", process_to_json(c.process)},
                 {"words", jw}};
  return out;
}

ExperimentOutput run_hedge(const ExperimentConfig& c) {
  if (c.payoff.terms.empty()) throw ConfigError("payoff.terms", "hedge needs at least one payoff term");
  if (c.hedge.K < 0 || c.hedge.K % 2 != 0) throw ConfigError("hedge.K", "must be an even non-negative integer");
  const Functional f = payoff_functional(c);
  const int depth = hedge_required_depth(f, c.hedge.K);
  const int level = c.partition.level_for(c.N);
  const SampleSource in_src(c, level, c.N);
  const auto in_paths = in_src.draw(derive_seed(c.seed, "hedge-in"), 0, false);
  const TensorSeries Phi = expected_lead_lag_signature(in_paths, depth, c.hedge.correction, Exec::parallel);
  const double p0 = c.hedge.p0 ? *c.hedge.p0 : pair(f, Phi.truncate(static_cast<int>(f.max_length())));
  const HedgeResult h = hedge(f, p0, Phi, c.hedge.K, c.hedge.ridge);

  const std::size_t M = c.hedge.out_of_sample;
  if (M < 2) throw ConfigError("hedge.out_of_sample", "must be >= 2");
  const SampleSource out_src(c, level, M);
  const auto oos = out_src.draw(derive_seed(c.seed, "hedge-out"), 0, false);
  const int fdeg = static_cast<int>(f.max_length());
  auto residuals = [&](const std::vector<PiecewiseLinearPath>& paths, std::vector<double>& F, std::vector<double>& pnl) {
    F.assign(paths.size(), 0.0);
    for_each_index(paths.size(), Exec::parallel, [&](std::size_t n) {
      const auto& p = paths[n];
      F[n] = pair(f, signature(time_lead_lag(p.dim() == 1 ? p : p.coordinate(0)), fdeg));
    });
    pnl = pnl_backtest(h.ell, paths, Exec::parallel);
    std::vector<double> res(paths.size());
    for (std::size_t n = 0; n < paths.size(); ++n) res[n] = F[n] - p0 - pnl[n];
    return res;
  };
  std::vector<double> F_in, pnl_in, F, pnl;
  const auto res_in = residuals(in_paths, F_in, pnl_in);
  const auto res = residuals(oos, F, pnl);
  std::vector<double> res_in_sq(res_in.size());
  for (std::size_t n = 0; n < res_in.size(); ++n) res_in_sq[n] = res_in[n] * res_in[n];

  ExperimentOutput out;
  out.samples.header = {"path", "payoff", "pnl", "residual"};
  for (std::size_t n = 0; n < M; ++n) out.samples.rows.push_back({std::to_string(n), fmt(F[n]), fmt(pnl[n]), fmt(res[n])});
  const double var_F = sample_variance(F), var_res = sample_variance(res);
  out.summary = {{"N", c.N},
                 {"level", level},
                 {"K", c.hedge.K},
                 {"phi_depth", depth},
                 {"payoff", functional_json(f)},
                 {"p0", p0},
                 {"ell", functional_json(h.ell)},
                 {"objective", h.objective},
                 {"ridge_used", h.ridge_used},
                 {"in_sample_mean_sq_residual", mean(res_in_sq)},
                 {"out_of_sample",
                  {{"paths", M},
                   {"payoff_variance", var_F},
                   {"residual_variance", var_res},
                   {"residual_mean", mean(res)},
                   {"variance_ratio", maybe(var_F > 0 ? var_res / var_F : std::numeric_limits<double>::quiet_NaN())}}},
                 {"process", process_to_json(c.process)}};
  return out;
}

ExperimentOutput run_colreg(const ExperimentConfig& c) {
  const auto& cr = c.colreg;
  ExperimentOutput out;
  out.samples.header = {"sigma", "f", "rho", "estimator", "rmse", "percent_of_ols", "p_vs_ols"};
  json rows = json::array();
  std::vector<PlotSeries> series(4);
  const char* colors[] = {"#7f7f7f", "#1f77b4", "#2ca02c", "#d62728"};
  for (int e = 0; e < 4; ++e) series[e] = {kEstimatorNames[e], {}, {}, colors[e], false};
  for (double sigma : cr.sigma)
    for (const auto& fname : cr.f)
      for (double rho : cr.rho) {
        RmseConfig rc{sigma, rho, parse_dependence(fname), cr.N, cr.reps, c.seed};
        const RmseRow row = rmse_experiment(rc);
        json j = {{"sigma", sigma}, {"f", fname}, {"rho", rho}, {"feasible", row.feasible}};
        if (!row.feasible) {
          for (int e = 0; e < 4; ++e)
            out.samples.rows.push_back({fmt(sigma), fname, fmt(rho), kEstimatorNames[e], "", "", ""});
          rows.push_back(j);
          continue;
        }
        json est = json::object();
        for (int e = 0; e < 4; ++e) {
          est[kEstimatorNames[e]] = {{"rmse", row.rmse[e]}, {"percent_of_ols", row.percent_of_ols[e]},
                                     {"p_vs_ols", row.p_vs_ols[e]}};
          out.samples.rows.push_back({fmt(sigma), fname, fmt(rho), kEstimatorNames[e], fmt(row.rmse[e]),
                                      fmt(row.percent_of_ols[e]), fmt(row.p_vs_ols[e])});
          if (sigma == cr.sigma.front() && fname == cr.f.front()) {
            series[e].x.push_back(rho);
            series[e].y.push_back(row.percent_of_ols[e]);
          }
        }
        j["estimators"] = est;
        j["p_feasible_vs_joint"] = row.p_feasible_vs_joint;
        j["theory_percent"] = 100.0 * std::sqrt(std::max(0.0, 1.0 - rho * rho));
        rows.push_back(j);
      }
  out.summary = {{"N", cr.N}, {"reps", cr.reps}, {"rows", rows}};
  if (!series.front().x.empty())
    out.svg = svg_plot({"RMSE relative to OLS", "rho", "percent of OLS", false, plot_comment(c)}, series);
  return out;
}

ExperimentOutput run_selftest(const ExperimentConfig& c) {
  ExperimentOutput out;
  out.samples.header = {"check", "cases", "max_deviation", "pass"};
  json checks = json::array();
  bool all = true;
  for (const auto& a : algebraic_suite(std::max<std::size_t>(c.N, 1), c.seed)) {
    const bool ok = a.max_deviation < 1e-10;
    all = all && ok;
    checks.push_back({{"name", a.name}, {"cases", a.cases}, {"max_deviation", a.max_deviation}, {"pass", ok}});
    out.samples.rows.push_back({a.name, std::to_string(a.cases), fmt(a.max_deviation), ok ? "1" : "0"});
  }
  // shuffle-route lag-0 covariance against the direct one
  ExperimentConfig bm = c;
  bm.process = BmParams{2};
  bm.sampling = "ind";
  bm.transform = "none";
  const SampleSource src(bm, 4, 256);
  const auto paths = src.draw(derive_seed(c.seed, "selftest-hac"), 0);
  const std::vector<Word> words{Word(2, {1}), Word(2, {1, 2}), Word(2, {2, 2})};
  const EstimateReport est = expected_signature(paths, words, Exec::parallel);
  const double hac_dev =
      (hac_sigma0(est.per_sample, words.size()) - hac_sigma0_shuffle(paths, words, Exec::parallel)).cwiseAbs().maxCoeff();
  const bool hac_ok = hac_dev < 1e-10;
  all = all && hac_ok;
  checks.push_back({{"name", "hac_sigma0_shuffle"}, {"cases", 1}, {"max_deviation", hac_dev}, {"pass", hac_ok}});
  out.samples.rows.push_back({"hac_sigma0_shuffle", "1", fmt(hac_dev), hac_ok ? "1" : "0"});
  out.summary = {{"checks", checks}, {"all_pass", all}};
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& c) {
  ExperimentOutput out;
  const std::string& k = c.experiment;
  if (k == "infill")
    out = run_infill(c);
  else if (k == "consistency")
    out = run_consistency(c);
  else if (k == "clt")
    out = run_clt(c);
  else if (k == "density")
    out = run_density(c);
  else if (k == "variance-reduction")
    out = run_variance_reduction(c);
  else if (k == "price")
    out = run_price(c);
  else if (k == "hedge")
    out = run_hedge(c);
  else if (k == "colreg")
    out = run_colreg(c);
  else if (k == "selftest")
    out = run_selftest(c);
  else
    throw ConfigError("experiment", "unknown experiment kind '" + k + "'");
  out.summary["experiment"] = k;
  out.summary["seed"] = c.seed;
  out.summary["config_hash"] = config_hash(c.effective);
  out.summary["version"] = kVersion;
  return out;
}

void write_outputs(const ExperimentOutput& out, const ExperimentConfig& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json s = out.summary;
  s["config"] = c.effective;
  {
    std::ofstream f(dir / "summary.json");
    if (!f) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
    f << s.dump(2) << "\n";
  }
  {
    std::ofstream f(dir / "samples.csv");
    if (!f) throw std::runtime_error("cannot write " + (dir / "samples.csv").string());
    f << "# " << plot_comment(c) << "\n";
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) f << (i ? "," : "") << cells[i];
      f << "\n";
    };
    line(out.samples.header);
    for (const auto& r : out.samples.rows) line(r);
  }
  if (out.svg) {
    std::ofstream f(dir / "plot.svg");
    if (!f) throw std::runtime_error("cannot write " + (dir / "plot.svg").string());
    f << *out.svg;
  }
}

}  // namespace esig
