#include "esig/esig.hpp"

#include <cmath>
#include <stdexcept>

#include "esig/signature.hpp"
#include "esig/stats.hpp"

namespace esig {

namespace {

std::vector<double> column(std::span<const double> m, std::size_t W, std::size_t w) {
  const std::size_t N = m.size() / W;
  std::vector<double> out(N);
  for (std::size_t n = 0; n < N; ++n) out[n] = m[n * W + w];
  return out;
}

double variance_of_mean(std::span<const double> x) {
  return x.size() < 2 ? 0.0 : sample_variance(x) / static_cast<double>(x.size());
}

void check_paths(const std::vector<PiecewiseLinearPath>& paths) {
  if (paths.empty()) throw std::invalid_argument("expected signature needs at least one path");
  for (const auto& p : paths)
    if (p.dim() != paths.front().dim()) throw std::invalid_argument("all paths must share one dimension");
}

// <P, S> where values[i] holds S at the i-th term of P in map order.
double pair_poly(const WordPolynomial& p, std::span<const double> values) {
  double s = 0.0;
  std::size_t i = 0;
  for (const auto& [w, c] : p.terms()) {
    (void)w;
    s += static_cast<double>(c) * values[i++];
  }
  return s;
}

std::vector<Word> poly_words(const WordPolynomial& p) {
  std::vector<Word> out;
  out.reserve(p.terms().size());
  for (const auto& [w, c] : p.terms()) {
    (void)c;
    out.push_back(w);
  }
  return out;
}

}  // namespace

double EstimateReport::variance_ratio(std::size_t w) const {
  if (naive_variance.empty() || naive_variance[w] == 0.0) return 1.0;
  return variance[w] / naive_variance[w];
}

EstimateReport expected_signature(const BatchValues& values, const std::vector<Word>& words) {
  if (values.rows == 0) throw std::invalid_argument("expected signature needs at least one path");
  if (values.cols != words.size()) throw std::invalid_argument("value columns do not match words");
  EstimateReport r;
  r.words = words;
  r.N = values.rows;
  r.per_sample = values.sig;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto col = column(r.per_sample, words.size(), w);
    r.phi_hat.push_back(mean(col));
    r.variance.push_back(variance_of_mean(col));
  }
  r.naive_variance = r.variance;
  return r;
}

EstimateReport expected_signature(const std::vector<PiecewiseLinearPath>& paths, const std::vector<Word>& words,
                                  Exec exec) {
  check_paths(paths);
  return expected_signature(evaluate_batch(paths, words, false, exec), words);
}

double estimate_c1(std::span<const double> s, std::span<const double> sc) {
  if (s.size() != sc.size()) throw std::invalid_argument("c1: sample sizes differ");
  std::vector<double> num(s.size()), den(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) {
    num[n] = s[n] * sc[n];
    den[n] = sc[n] * sc[n];
  }
  const double d = pairwise_sum(den);
  if (d == 0.0) throw std::domain_error("c1: control variate is identically zero");
  return pairwise_sum(num) / d;
}

double estimate_c1_centered(std::span<const double> s, std::span<const double> sc) {
  if (s.size() != sc.size() || s.size() < 2) throw std::invalid_argument("c1 centered: need equal sizes >= 2");
  const double v = sample_variance(sc);
  if (v == 0.0) throw std::domain_error("c1 centered: control variate has zero variance");
  return sample_covariance(s, sc) / v;
}

namespace {

EstimateReport corrected_from(const BatchValues& values, const std::vector<Word>& words, CorrectionOptions opts,
                              const std::vector<PiecewiseLinearPath>* paths, Exec exec) {
  if (values.rows == 0) throw std::invalid_argument("expected signature needs at least one path");
  for (const Word& w : words)
    if (w.is_empty()) throw std::invalid_argument("corrected estimator needs non-empty words");
  EstimateReport r;
  r.words = words;
  r.N = values.rows;
  r.control_per_sample = values.control;
  r.per_sample.resize(values.sig.size());
  const std::size_t W = words.size();
  for (std::size_t w = 0; w < W; ++w) {
    const auto s = column(values.sig, W, w);
    const auto sc = column(values.control, W, w);
    double c = 0.0;
    bool fallback = false;
    try {
      switch (opts.mode) {
        case CMode::none: c = 0.0; break;
        case CMode::fixed: c = opts.c; break;
        case CMode::c1: c = estimate_c1(s, sc); break;
        case CMode::c1_centered: c = estimate_c1_centered(s, sc); break;
        case CMode::c2:
          if (!paths) throw std::invalid_argument("c2 needs the paths");
          if (words[w].size() < 2) {
            c = estimate_c1(s, sc);  // level one: S_c = S, c2 undefined
          } else {
            c = estimate_c2(*paths, words[w], exec);
          }
          break;
      }
    } catch (const std::domain_error&) {
      c = 0.0;
      fallback = true;
    }
    std::vector<double> corrected(s.size());
    for (std::size_t n = 0; n < s.size(); ++n) {
      corrected[n] = s[n] - c * sc[n];
      r.per_sample[n * W + w] = corrected[n];
    }
    r.c_used.push_back(c);
    r.c_fallback.push_back(fallback);
    r.phi_hat.push_back(mean(corrected));
    r.variance.push_back(variance_of_mean(corrected));
    r.naive_variance.push_back(variance_of_mean(s));
  }
  return r;
}

}  // namespace

EstimateReport corrected_expected_signature(const BatchValues& values, const std::vector<Word>& words,
                                            CorrectionOptions opts) {
  if (opts.mode == CMode::c2) throw std::invalid_argument("c2 mode needs the paths");
  return corrected_from(values, words, opts, nullptr, Exec::serial);
}

EstimateReport corrected_expected_signature(const std::vector<PiecewiseLinearPath>& paths,
                                            const std::vector<Word>& words, CorrectionOptions opts, Exec exec) {
  check_paths(paths);
  return corrected_from(evaluate_batch(paths, words, true, exec), words, opts, &paths, exec);
}

int qv_letter(int d, int i, int j) { return d + (i - 1) * d + j; }

C2Words c2_words(const Word& I) {
  if (I.size() < 2) throw std::invalid_argument("c2 needs a word of length >= 2");
  const int d = I.alphabet();
  const int D = d + d * d;
  const Word Iw = I.widen(D);
  const std::size_t k = I.size();
  C2Words out{WordPolynomial(D), WordPolynomial(D), WordPolynomial(D)};
  out.square = shuffle(Iw, Iw);
  const Word pair_letter(D, {qv_letter(d, I[k - 2], I[k - 1])});
  out.cross = shuffle(Iw, concat(Iw.drop_last(2), pair_letter));
  const Word diag_letter(D, {qv_letter(d, I[k - 1], I[k - 1])});
  const Word head = Iw.drop_last();
  const WordPolynomial heads = shuffle(head, head);
  for (const auto& [w, c] : heads.terms()) out.denominator.add(concat(w, diag_letter), c);
  return out;
}

C2Terms c2_terms(const std::vector<PiecewiseLinearPath>& paths, const Word& I, Exec exec) {
  check_paths(paths);
  if (I.alphabet() != paths.front().dim()) throw std::invalid_argument("c2: word alphabet does not match paths");
  const C2Words cw = c2_words(I);
  const auto sq = poly_words(cw.square), cr = poly_words(cw.cross), de = poly_words(cw.denominator);
  std::vector<Word> all = sq;
  all.insert(all.end(), cr.begin(), cr.end());
  all.insert(all.end(), de.begin(), de.end());
  C2Terms t;
  t.numerator.resize(paths.size());
  t.denominator.resize(paths.size());
  for_each_index(paths.size(), exec, [&](std::size_t n) {
    const WordValues v = evaluate_words(qv_augment(paths[n]), all, false);
    const std::span<const double> vals(v.sig);
    t.numerator[n] = pair_poly(cw.square, vals.subspan(0, sq.size())) -
                     0.5 * pair_poly(cw.cross, vals.subspan(sq.size(), cr.size()));
    t.denominator[n] = pair_poly(cw.denominator, vals.subspan(sq.size() + cr.size()));
  });
  return t;
}

double estimate_c2(const std::vector<PiecewiseLinearPath>& paths, const Word& I, Exec exec) {
  const C2Terms t = c2_terms(paths, I, exec);
  const double den = pairwise_sum(t.denominator);
  if (den == 0.0) throw std::domain_error("c2: denominator is zero");
  return pairwise_sum(t.numerator) / den;
}

double mse_diff_diagnostic(std::span<const double> y1, std::span<const double> z1, std::span<const double> y2,
                           std::span<const double> z2) {
  const std::size_t N = y1.size();
  if (z1.size() != N || y2.size() != N || z2.size() != N) throw std::invalid_argument("diagnostic: sizes differ");
  if (N < 2) throw std::invalid_argument("diagnostic needs N >= 2");
  const double mu_y = (pairwise_sum(y1) + pairwise_sum(y2)) / (2.0 * static_cast<double>(N));
  const double mu_z = (pairwise_sum(z1) + pairwise_sum(z2)) / (2.0 * static_cast<double>(N));
  if (mu_z == 0.0) throw std::domain_error("diagnostic: pooled mean of Z is zero");
  std::vector<double> terms(N);
  for (std::size_t n = 0; n < N; ++n) {
    double t = mu_y / mu_z * (z2[n] * z2[n] - z1[n] * z1[n]);
    t -= (y1[n] * z2[n] - y1[n] * z1[n]) + (y2[n] * z2[n] - y2[n] * z1[n]);
    terms[n] = t;
  }
  return pairwise_sum(terms) / (static_cast<double>(N) * static_cast<double>(N));
}

double mse_diff_diagnostic(const std::vector<PiecewiseLinearPath>& paths, const Word& I, Exec exec) {
  if (I.size() < 2) throw std::invalid_argument("diagnostic needs a word of length >= 2");
  if (paths.size() < 2) throw std::invalid_argument("diagnostic needs N >= 2");
  const BatchValues v = evaluate_batch(paths, {I}, true, exec);
  const C2Terms t = c2_terms(paths, I, exec);
  std::vector<double> y1(paths.size()), z1(paths.size());
  for (std::size_t n = 0; n < paths.size(); ++n) {
    y1[n] = v.sig[n] * v.control[n];
    z1[n] = v.control[n] * v.control[n];
  }
  return mse_diff_diagnostic(y1, z1, t.numerator, t.denominator);
}

Eigen::MatrixXd hac_sigma0(std::span<const double> per_sample, std::size_t W) {
  const std::size_t N = per_sample.size() / W;
  Eigen::VectorXd phi(static_cast<Eigen::Index>(W));
  for (std::size_t w = 0; w < W; ++w) phi(static_cast<Eigen::Index>(w)) = mean(column(per_sample, W, w));
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(W), static_cast<Eigen::Index>(W));
  Eigen::VectorXd x(static_cast<Eigen::Index>(W));
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t w = 0; w < W; ++w) x(static_cast<Eigen::Index>(w)) = per_sample[n * W + w];
    x -= phi;
    s.noalias() += x * x.transpose();
  }
  return s / static_cast<double>(N);
}

HacResult hac_long_run_cov(std::span<const double> per_sample, std::size_t W, HacOptions opts) {
  if (W == 0 || per_sample.size() % W != 0) throw std::invalid_argument("hac: sample shape mismatch");
  const std::size_t N = per_sample.size() / W;
  if (N < 2) throw std::invalid_argument("hac needs N >= 2");
  if (!(opts.upsilon > 0.0 && opts.upsilon < 1.0)) throw std::invalid_argument("hac: upsilon must lie in (0,1)");
  HacResult r;
  std::size_t h = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(N), opts.upsilon / 2.0)));
  if (h >= N) {
    h = N - 1;
    r.clipped = true;
  }
  r.bandwidth = h;
  const auto Wi = static_cast<Eigen::Index>(W);
  Eigen::VectorXd phi(Wi);
  for (std::size_t w = 0; w < W; ++w) phi(static_cast<Eigen::Index>(w)) = mean(column(per_sample, W, w));
  auto row = [&](std::size_t n) {
    Eigen::VectorXd x(Wi);
    for (std::size_t w = 0; w < W; ++w) x(static_cast<Eigen::Index>(w)) = per_sample[n * W + w];
    return Eigen::VectorXd(x - phi);
  };
  r.sigma = hac_sigma0(per_sample, W);
  for (std::size_t lag = 1; lag <= h; ++lag) {
    const double weight =
        opts.kernel == HacKernel::bartlett ? 1.0 - static_cast<double>(lag) / static_cast<double>(h + 1) : 1.0;
    const std::size_t M = N / (lag + 1);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(Wi, Wi);
    for (std::size_t m = 1; m <= M; ++m) s.noalias() += row((lag + 1) * m - lag - 1) * row((lag + 1) * m - 1).transpose();
    s /= static_cast<double>(M);
    r.sigma += weight * (s + s.transpose());
  }
  r.sigma = 0.5 * (r.sigma + r.sigma.transpose());
  return r;
}

Eigen::MatrixXd hac_sigma0_shuffle(const std::vector<PiecewiseLinearPath>& paths, const std::vector<Word>& words,
                                   Exec exec) {
  check_paths(paths);
  const std::size_t W = words.size();
  std::vector<WordPolynomial> prods;
  std::vector<Word> all = words;
  for (std::size_t a = 0; a < W; ++a)
    for (std::size_t b = 0; b < W; ++b) {
      prods.push_back(shuffle(words[a], words[b]));
      for (const auto& [w, c] : prods.back().terms()) {
        (void)c;
        all.push_back(w);
      }
    }
  const EstimateReport est = expected_signature(paths, all, exec);
  Eigen::MatrixXd s(static_cast<Eigen::Index>(W), static_cast<Eigen::Index>(W));
  std::size_t offset = W;
  for (std::size_t a = 0; a < W; ++a)
    for (std::size_t b = 0; b < W; ++b) {
      double v = 0.0;
      for (const auto& [w, c] : prods[a * W + b].terms()) {
        (void)w;
        v += static_cast<double>(c) * est.phi_hat[offset++];
      }
      s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v - est.phi_hat[a] * est.phi_hat[b];
    }
  return s;
}

std::string c_mode_name(CMode m) {
  switch (m) {
    case CMode::none: return "none";
    case CMode::fixed: return "fixed";
    case CMode::c1: return "c1";
    case CMode::c2: return "c2";
    case CMode::c1_centered: return "c1-centered";
  }
  return "none";
}

CMode parse_c_mode(const std::string& s) {
  if (s == "none") return CMode::none;
  if (s == "fixed") return CMode::fixed;
  if (s == "c1") return CMode::c1;
  if (s == "c2") return CMode::c2;
  if (s == "c1-centered") return CMode::c1_centered;
  throw std::invalid_argument("unknown c mode '" + s + "'");
}

}  // namespace esig
