#include <doctest.h>

#include <random>

#include "esig/sigfin.hpp"
#include "esig/stats.hpp"
#include "oracles.hpp"

using esig::Exec;
using esig::Functional;
using esig::Word;

namespace {

std::vector<esig::PiecewiseLinearPath> prices(const esig::ProcessSpec& spec, int level, std::size_t N, std::uint64_t seed) {
  auto paths = esig::simulate_batch(esig::Simulator(spec, esig::Partition::dyadic(1.0, level)), seed, N);
  for (auto& p : paths)
    if (p.dim() > 1) p = p.coordinate(0);
  return paths;
}

std::vector<esig::TensorSeries> ll_sigs(const std::vector<esig::PiecewiseLinearPath>& ps, int K) {
  std::vector<esig::TensorSeries> out;
  for (const auto& p : ps) out.push_back(esig::signature(esig::time_lead_lag(p), K));
  return out;
}

Word w4(std::vector<int> l) { return Word(4, std::move(l)); }

}  // namespace

TEST_CASE("payoff regression") {
  const auto ps = prices(esig::HestonProcess{}, 5, 200, 1);
  const auto sigs = ll_sigs(ps, 2);
  const std::vector<Word> words{Word::empty(4), w4({2}), w4({2, 2}), w4({4, 2})};
  const double truth[] = {0.3, -1.0, 2.0, 0.5};
  std::vector<double> F(ps.size()), ones(ps.size(), 1.0);
  for (std::size_t n = 0; n < ps.size(); ++n)
    for (std::size_t k = 0; k < words.size(); ++k) F[n] += truth[k] * sigs[n][words[k]];
  const Functional f = esig::fit_payoff_functional(F, sigs, words, 0.0);
  for (std::size_t k = 0; k < words.size(); ++k) CHECK(f.get(words[k]) == doctest::Approx(truth[k]).epsilon(1e-8));
  double worst = 0.0;
  for (std::size_t n = 0; n < ps.size(); ++n) worst = std::max(worst, std::abs(esig::pair(f, sigs[n]) - F[n]));
  CHECK(worst < 1e-8);

  const Functional one = esig::fit_payoff_functional(ones, sigs, words, 0.0);
  CHECK(one.get(Word::empty(4)) == doctest::Approx(1.0));
  for (std::size_t k = 1; k < words.size(); ++k) CHECK(std::abs(one.get(words[k])) < 1e-10);

  // lead and lag increments coincide, so the full word set is collinear
  CHECK_THROWS_AS(esig::fit_payoff_functional(F, sigs, 1, 0.0), std::runtime_error);
}

TEST_CASE("constant payoff prices to the discount factor") {
  const auto ps = prices(esig::HestonProcess{}, 4, 300, 2);
  esig::PricingSpec spec;
  spec.f.set(Word::empty(4), 1.0);
  spec.discount = 0.95;
  const auto r = esig::price(spec, ps);
  CHECK(r.price == 0.95);
  CHECK(r.se == 0.0);
}

TEST_CASE("level-one lead-price payoff is removed exactly by the correction") {
  const auto ps = prices(esig::BmParams{1}, 5, 300, 3);
  esig::PricingSpec spec;
  spec.f.set(w4({esig::kPriceLead}), 1.0);
  const auto r = esig::price(spec, ps);
  CHECK(r.price == 0.0);
  CHECK(r.se == 0.0);
  CHECK(r.c_used[0] == 1.0);
}

TEST_CASE("single-word price equals discounted expected signature") {
  const auto ps = prices(esig::HestonProcess{}, 4, 500, 4);
  esig::PricingSpec spec;
  spec.f.set(w4({1, 2}), 1.0);
  spec.discount = 0.9;
  spec.correction = false;
  std::vector<esig::PiecewiseLinearPath> ll;
  for (const auto& p : ps) ll.push_back(esig::time_lead_lag(p));
  const auto est = esig::expected_signature(ll, {w4({1, 2})});
  CHECK(esig::price(spec, ps).price == doctest::Approx(0.9 * est.phi_hat[0]).epsilon(1e-14));
}

TEST_CASE("correction lowers the heston price standard error") {
  esig::PricingSpec spec;
  spec.f.set(w4({2, 2}), 1.0);
  spec.f.set(w4({4, 2}), 0.5);
  spec.N = 200;
  const esig::Simulator sim(esig::HestonProcess{}, esig::Partition::dyadic(1.0, 5));
  std::vector<double> corrected, naive;
  for (std::uint64_t r = 0; r < 20; ++r) {
    auto plain = spec;
    plain.correction = false;
    corrected.push_back(esig::price(spec, sim, 100 + r).se);
    naive.push_back(esig::price(plain, sim, 100 + r).se);
  }
  CHECK(esig::paired_t_test(corrected, naive).p_less < 0.05);
}

TEST_CASE("backtest basics") {
  const auto ps = prices(esig::BmParams{1}, 4, 20, 5);
  Functional zero(2, 1), one(2, 0);
  one.set(Word::empty(2), 1.0);
  const auto a = esig::pnl_backtest(zero, ps), b = esig::pnl_backtest(one, ps);
  for (std::size_t n = 0; n < ps.size(); ++n) {
    CHECK(a[n] == 0.0);
    CHECK(b[n] == doctest::Approx(ps[n].at(16, 0) - ps[n].at(0, 0)).epsilon(1e-12));
  }
}

TEST_CASE("lifted strategy words give the left-point PnL pathwise") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Functional ell(2, 1);
  const esig::WordLayout layout(2, 1);
  for (const Word& w : layout.words()) ell.set(w, u(rng));
  const auto ps = prices(esig::HestonProcess{}, 4, 10, 6);
  const auto pnl = esig::pnl_backtest(ell, ps);
  for (std::size_t n = 0; n < ps.size(); ++n) {
    const auto S = esig::signature(esig::time_lead_lag(ps[n]), 3);
    double v = 0.0;
    for (const auto& [w, c] : ell.coeffs()) v += c * S[esig::hedge_word(w)];
    CHECK(v == doctest::Approx(pnl[n]).epsilon(1e-10));
  }
}

TEST_CASE("shuffle square equals the squared pairing pathwise") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto ps = prices(esig::HestonProcess{}, 4, 5, 7);
  const esig::WordLayout layout(4, 2);
  for (const auto& p : ps) {
    Functional g(4, 2);
    for (const Word& w : layout.words()) g.set(w, u(rng));
    const auto S = esig::signature(esig::time_lead_lag(p), 4);
    const double v = esig::pair(g, S.truncate(2));
    CHECK(std::abs(esig::pair_shuffle_square(g, S) - v * v) < 1e-8);
  }
}

TEST_CASE("constant payoff needs no hedge") {
  const auto ps = prices(esig::BmParams{1}, 4, 100, 8);
  Functional f(4, 0);
  f.set(Word::empty(4), 1.3);
  const auto Phi = esig::expected_lead_lag_signature(ps, esig::hedge_required_depth(f, 2), false);
  const auto h = esig::hedge(f, 1.3, Phi, 2);
  for (const auto& [w, c] : h.ell.coeffs()) CHECK(std::abs(c) < 1e-6);
  CHECK(std::abs(h.objective) < 1e-12);
  CHECK((h.gram - h.gram.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("replicable payoff is hedged out of sample") {
  Functional f(4, 1);
  f.set(w4({esig::kPriceLead}), 1.0);
  const int K = 2;
  const auto in = prices(esig::HestonProcess{}, 6, 2000, 9);
  const auto Phi = esig::expected_lead_lag_signature(in, esig::hedge_required_depth(f, K), false);
  const auto h = esig::hedge(f, 0.0, Phi, K);
  CHECK((h.gram - h.gram.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  const auto out = prices(esig::HestonProcess{}, 6, 2000, 10);
  const auto pnl = esig::pnl_backtest(h.ell, out);
  std::vector<double> F(out.size()), res(out.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    F[n] = out[n].at(out[n].steps(), 0) - out[n].at(0, 0);
    res[n] = F[n] - pnl[n];
  }
  const double var_F = esig::sample_variance(F);
  CHECK(h.objective < 1e-3 * var_F);
  CHECK(esig::sample_variance(res) < 1e-2 * var_F);
}

TEST_CASE("hedge objective equals the in-sample mean squared residual") {
  Functional f(4, 2);
  f.set(w4({2, 2}), 1.0);
  f.set(w4({1, 2}), -0.5);
  const int K = 2;
  const auto ps = prices(esig::HestonProcess{}, 5, 1000, 11);
  const auto Phi = esig::expected_lead_lag_signature(ps, esig::hedge_required_depth(f, K), false);
  const double p0 = esig::pair(f, Phi.truncate(2));
  const auto h = esig::hedge(f, p0, Phi, K);
  const auto pnl = esig::pnl_backtest(h.ell, ps);
  std::vector<double> sq(ps.size());
  for (std::size_t n = 0; n < ps.size(); ++n) {
    const double F = esig::pair(f, esig::signature(esig::time_lead_lag(ps[n]), 2));
    sq[n] = (F - p0 - pnl[n]) * (F - p0 - pnl[n]);
  }
  CHECK(h.objective == doctest::Approx(esig::mean(sq)).epsilon(0.1));
  CHECK_THROWS(esig::hedge(f, p0, Phi.truncate(3), K));
}
