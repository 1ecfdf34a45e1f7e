#include "esig/sigfin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "esig/signature.hpp"
#include "esig/stats.hpp"

namespace esig {

PiecewiseLinearPath time_lead_lag(const PiecewiseLinearPath& price) {
  if (price.dim() != 1) throw std::invalid_argument("time_lead_lag expects a 1-d price path");
  return lead_lag(add_time(price));
}

Functional fit_payoff_functional(std::span<const double> payoffs, const std::vector<TensorSeries>& sigs,
                                 const std::vector<Word>& words, double ridge) {
  if (payoffs.size() != sigs.size() || sigs.empty()) throw std::invalid_argument("fit: payoffs and signatures differ");
  if (ridge < 0.0) throw std::invalid_argument("fit: ridge must be >= 0");
  const int d = sigs.front().dim();
  int K = 0;
  for (const Word& w : words) K = std::max(K, static_cast<int>(w.size()));
  const auto N = static_cast<Eigen::Index>(sigs.size());
  const auto P = static_cast<Eigen::Index>(words.size());
  Eigen::MatrixXd F(N, P);
  Eigen::VectorXd y(N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const auto& s = sigs[static_cast<std::size_t>(n)];
    if (s.dim() != d || s.depth() < K) throw std::invalid_argument("fit: signature shape does not cover the words");
    for (Eigen::Index p = 0; p < P; ++p) F(n, p) = s[words[static_cast<std::size_t>(p)]];
    y(n) = payoffs[static_cast<std::size_t>(n)];
  }
  Eigen::VectorXd coef;
  if (ridge == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(F);
    qr.setThreshold(1e-12);
    if (qr.rank() < P) throw std::runtime_error("fit: singular normal equations (rank-deficient features)");
    coef = qr.solve(y);
  } else {
    Eigen::MatrixXd G = F.transpose() * F;
    G.diagonal().array() += ridge;
    coef = G.ldlt().solve(F.transpose() * y);
  }
  Functional f(d, K);
  for (Eigen::Index p = 0; p < P; ++p) f.set(words[static_cast<std::size_t>(p)], coef(p));
  return f;
}

Functional fit_payoff_functional(std::span<const double> payoffs, const std::vector<TensorSeries>& sigs, int K,
                                 double ridge) {
  if (sigs.empty()) throw std::invalid_argument("fit: no signatures");
  return fit_payoff_functional(payoffs, sigs, WordLayout(sigs.front().dim(), K).words(), ridge);
}

namespace {

std::vector<PiecewiseLinearPath> lead_lag_all(const std::vector<PiecewiseLinearPath>& prices, Exec exec) {
  std::vector<PiecewiseLinearPath> out(prices.size());
  for_each_index(prices.size(), exec, [&](std::size_t n) {
    out[n] = time_lead_lag(prices[n].dim() == 1 ? prices[n] : prices[n].coordinate(0));
  });
  return out;
}

}  // namespace

PriceResult price(const PricingSpec& spec, const std::vector<PiecewiseLinearPath>& prices, Exec exec) {
  if (!(spec.discount > 0.0)) throw std::invalid_argument("price: discount factor must be > 0");
  if (spec.f.dim() != 4) throw std::invalid_argument("price: payoff functional must live on the 4-letter alphabet");
  if (prices.empty()) throw std::invalid_argument("price: no paths");
  const auto ll = lead_lag_all(prices, exec);
  std::vector<Word> corrected, plain;
  for (const auto& [w, c] : spec.f.coeffs()) {
    (void)c;
    if (w.is_empty()) continue;
    if (spec.correction && w.back() == kPriceLead)
      corrected.push_back(w);
    else
      plain.push_back(w);
  }
  const std::size_t N = prices.size();
  std::vector<double> combo(N, 0.0);
  PriceResult r;
  auto absorb = [&](const EstimateReport& est, bool with_c) {
    for (std::size_t w = 0; w < est.words.size(); ++w) {
      const double fw = spec.f.get(est.words[w]);
      for (std::size_t n = 0; n < N; ++n) combo[n] += spec.discount * fw * est.sample(n, w);
      r.words.push_back(est.words[w]);
      r.phi_hat.push_back(est.phi_hat[w]);
      r.c_used.push_back(with_c ? est.c_used[w] : 0.0);
    }
  };
  if (!corrected.empty()) absorb(corrected_expected_signature(ll, corrected, {spec.c_mode, 0.0}, exec), true);
  if (!plain.empty()) absorb(expected_signature(ll, plain, exec), false);
  const double constant = spec.discount * spec.f.get(Word::empty(4));
  r.price = constant + mean(combo);
  r.se = N > 1 ? std::sqrt(sample_variance(combo) / static_cast<double>(N)) : 0.0;
  return r;
}

PriceResult price(const PricingSpec& spec, const Simulator& sim, std::uint64_t master, Exec exec) {
  return price(spec, simulate_batch(sim, master, spec.N, exec), exec);
}

TensorSeries expected_lead_lag_signature(const std::vector<PiecewiseLinearPath>& prices, int K, bool correction,
                                         Exec exec) {
  if (prices.empty()) throw std::invalid_argument("expected signature needs at least one path");
  const auto ll = lead_lag_all(prices, exec);
  const WordLayout layout(4, K);
  const auto& words = layout.words();
  const BatchValues v = evaluate_batch(ll, words, correction, exec);
  TensorSeries out(4, K);
  auto coeffs = out.coeffs();
  const std::size_t N = ll.size(), W = words.size();
  std::vector<double> col(N), ctl(N);
  for (std::size_t w = 0; w < W; ++w) {
    for (std::size_t n = 0; n < N; ++n) col[n] = v.sig[n * W + w];
    if (correction && !words[w].is_empty() && words[w].back() == kPriceLead) {
      for (std::size_t n = 0; n < N; ++n) ctl[n] = v.control[n * W + w];
      double c = 0.0;
      try {
        c = estimate_c1(col, ctl);
      } catch (const std::domain_error&) {
        c = 0.0;
      }
      for (std::size_t n = 0; n < N; ++n) col[n] -= c * ctl[n];
    }
    coeffs[w] = mean(col);
  }
  return out;
}

Word hedge_word(const Word& w) {
  if (w.alphabet() != 2) throw std::invalid_argument("hedge word must be over the (time, price) alphabet");
  std::vector<int> letters;
  for (int l : w.letters()) letters.push_back(l == 1 ? kTimeLag : kPriceLag);
  letters.push_back(kPriceLead);
  return Word(4, std::move(letters));
}

int hedge_required_depth(const Functional& f, int K) {
  const int deg_f = static_cast<int>(f.max_length());
  const int deg_l = K / 2 + 1;
  return std::max({2 * deg_f, 2 * deg_l, deg_f + deg_l});
}

namespace {

double pair_poly(const WordPolynomial& p, const TensorSeries& S) {
  double s = 0.0;
  for (const auto& [w, c] : p.terms()) s += static_cast<double>(c) * S[w];
  return s;
}

// <(sum_a g_a a) sh (sum_b h_b b), S>
double pair_shuffle(const std::map<Word, double>& g, const std::map<Word, double>& h, const TensorSeries& S) {
  double s = 0.0;
  for (const auto& [a, ga] : g)
    for (const auto& [b, hb] : h) s += ga * hb * pair_poly(shuffle(a, b), S);
  return s;
}

}  // namespace

double pair_shuffle_square(const Functional& g, const TensorSeries& S) {
  if (static_cast<int>(2 * g.max_length()) > S.depth())
    throw std::out_of_range("shuffle square needs signature depth " + std::to_string(2 * g.max_length()));
  return pair_shuffle(g.coeffs(), g.coeffs(), S);
}

HedgeResult hedge(const Functional& f, double p0, const TensorSeries& Phi, int K, double ridge) {
  if (f.dim() != 4 || Phi.dim() != 4) throw std::invalid_argument("hedge works on the 4-letter lead-lag alphabet");
  if (K < 0) throw std::invalid_argument("hedge: K must be >= 0");
  const int need = hedge_required_depth(f, K);
  if (Phi.depth() < need)
    throw std::out_of_range("hedge: Phi truncated at " + std::to_string(Phi.depth()) + ", need level " +
                            std::to_string(need));
  std::map<Word, double> g = f.coeffs();
  g[Word::empty(4)] -= p0;
  const std::vector<Word> basis = WordLayout(2, K / 2).words();
  const auto P = static_cast<Eigen::Index>(basis.size());
  std::vector<Word> lifted;
  for (const Word& w : basis) lifted.push_back(hedge_word(w));
  Eigen::MatrixXd G(P, P);
  Eigen::VectorXd b(P);
  for (Eigen::Index a = 0; a < P; ++a) {
    const Word& wa = lifted[static_cast<std::size_t>(a)];
    for (Eigen::Index c = 0; c <= a; ++c) {
      const double v = pair_poly(shuffle(wa, lifted[static_cast<std::size_t>(c)]), Phi);
      G(a, c) = v;
      G(c, a) = v;
    }
    b(a) = pair_shuffle(g, {{wa, 1.0}}, Phi);
  }
  const double gg = pair_shuffle(g, g, Phi);
  HedgeResult r;
  r.gram = G;
  Eigen::VectorXd ell;
  bool solved = false;
  for (double lambda : {ridge, ridge * 1e2, ridge * 1e4, ridge * 1e6}) {
    Eigen::MatrixXd A = G;
    A.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      ell = llt.solve(b);
      r.ridge_used = lambda;
      solved = true;
      break;
    }
  }
  if (!solved) throw std::runtime_error("hedge: Gram matrix indefinite beyond the ridge ladder");
  r.ell = Functional(2, K / 2);
  for (Eigen::Index a = 0; a < P; ++a) r.ell.set(basis[static_cast<std::size_t>(a)], ell(a));
  r.objective = gg - 2.0 * ell.dot(b) + ell.dot(G * ell);
  return r;
}

std::vector<double> pnl_backtest(const Functional& ell, const std::vector<PiecewiseLinearPath>& prices, Exec exec) {
  if (ell.dim() != 2) throw std::invalid_argument("pnl: strategy must be over the (time, price) alphabet");
  std::vector<double> out(prices.size(), 0.0);
  const int K = static_cast<int>(ell.max_length());
  for_each_index(prices.size(), exec, [&](std::size_t n) {
    const PiecewiseLinearPath p = add_time(prices[n].dim() == 1 ? prices[n] : prices[n].coordinate(0));
    TensorSeries s = TensorSeries::unit(2, K);
    std::vector<double> scratch(s.size()), inc(2);
    double pnl = 0.0;
    for (std::size_t m = 0; m < p.steps(); ++m) {
      p.increment(m, inc);
      pnl += pair(ell, s) * inc[1];
      mul_exp_inplace(s, inc, scratch);
    }
    out[n] = pnl;
  });
  return out;
}

}  // namespace esig
