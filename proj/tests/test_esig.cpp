#include <doctest.h>

#include <random>

#include "esig/batch.hpp"
#include "esig/esig.hpp"
#include "esig/processes.hpp"
#include "esig/stats.hpp"
#include "oracles.hpp"

using esig::Exec;
using esig::Word;

namespace {

std::vector<esig::PiecewiseLinearPath> bm_paths(int d, int level, std::size_t N, std::uint64_t seed) {
  return esig::simulate_batch(esig::Simulator(esig::BmParams{d}, esig::Partition::dyadic(1.0, level)), seed, N);
}

double se(const esig::EstimateReport& r, std::size_t w) { return std::sqrt(r.variance[w]); }

}  // namespace

TEST_CASE("single path estimate is its signature") {
  std::mt19937_64 rng(1);
  const auto p = oracle::random_path(rng, 2, 6);
  const std::vector<Word> words{Word(2, {1}), Word(2, {2, 1}), Word(2, {1, 2, 2})};
  const auto r = esig::expected_signature({p}, words, Exec::serial);
  for (std::size_t w = 0; w < words.size(); ++w) CHECK(r.phi_hat[w] == doctest::Approx(oracle::sig_word(p, words[w].letters())));
  CHECK_THROWS(esig::expected_signature(std::vector<esig::PiecewiseLinearPath>{}, words));
}

TEST_CASE("brownian expected signature at levels 1 and 2") {
  const auto paths = bm_paths(1, 8, 10000, 17);
  const std::vector<Word> words{Word(1, {1}), Word(1, {1, 1})};
  const auto r = esig::expected_signature(paths, words);
  CHECK(std::abs(r.phi_hat[0]) <= 3.0 * se(r, 0));
  CHECK(std::abs(r.phi_hat[1] - 0.5) <= 3.0 * se(r, 1));
  // grid-halving stability: the coarser grid gives the same level-2 mean on the same paths
  std::vector<esig::PiecewiseLinearPath> coarse;
  for (const auto& p : paths) coarse.push_back(p.subsample(2));
  const auto rc = esig::expected_signature(coarse, words);
  CHECK(rc.phi_hat[1] == doctest::Approx(r.phi_hat[1]).epsilon(1e-12));
}

TEST_CASE("control variate coefficient modes") {
  const auto paths = bm_paths(1, 6, 2000, 3);
  const std::vector<Word> words{Word(1, {1}), Word(1, {1, 1})};
  const auto naive = esig::expected_signature(paths, words);
  const auto zero = esig::corrected_expected_signature(paths, words, {esig::CMode::fixed, 0.0});
  for (std::size_t w = 0; w < 2; ++w) CHECK(zero.phi_hat[w] == naive.phi_hat[w]);

  const auto one = esig::corrected_expected_signature(paths, {Word(1, {1})}, {esig::CMode::fixed, 1.0});
  for (std::size_t n = 0; n < paths.size(); ++n) CHECK(one.sample(n, 0) == 0.0);
}

TEST_CASE("uncentered c1 reproduces 1 - rho^2 at N = 10^4") {
  const auto paths = bm_paths(1, 6, 10000, 5);
  const Word I(1, {1, 1});
  const auto r = esig::corrected_expected_signature(paths, {I}, {esig::CMode::c1, 0.0});
  std::vector<double> s(paths.size()), sc(paths.size());
  for (std::size_t n = 0; n < paths.size(); ++n) {
    s[n] = esig::sig_word(paths[n], I);
    sc[n] = esig::control_term(paths[n], I);
  }
  const double rho = esig::correlation(s, sc);
  CHECK(r.variance_ratio(0) == doctest::Approx(1.0 - rho * rho).epsilon(0.05));

  // centered version holds as an identity
  const auto rc = esig::corrected_expected_signature(paths, {I}, {esig::CMode::c1_centered, 0.0});
  CHECK(rc.variance_ratio(0) == doctest::Approx(1.0 - rho * rho).epsilon(1e-9));
  // bias preservation on the same sample
  std::vector<double> diff(paths.size());
  for (std::size_t n = 0; n < paths.size(); ++n) diff[n] = r.sample(n, 0) - s[n];
  CHECK(std::abs(esig::mean(diff)) <= 3.0 * std::sqrt(esig::sample_variance(diff) / 10000.0));
}

TEST_CASE("control terms of martingale words are mean zero") {
  const auto paths = bm_paths(2, 5, 5000, 8);
  const std::vector<Word> words{Word(2, {1, 2}), Word(2, {2, 2}), Word(2, {1, 2, 1})};
  const auto v = esig::evaluate_batch(paths, words, true);
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::vector<double> c(paths.size());
    for (std::size_t n = 0; n < paths.size(); ++n) c[n] = v.control_at(n, w);
    CHECK(std::abs(esig::one_sample_t_test(c, 0.0).statistic) < 3.0);
  }
}

TEST_CASE("c1 ratio") {
  const std::vector<double> s{2.0, 4.0}, sc{1.0, 2.0};
  CHECK(esig::estimate_c1(s, sc) == doctest::Approx(2.0));
  const std::vector<double> x{0.3, -1.2, 2.5}, y{-0.21, 0.84, -1.75};
  CHECK(esig::estimate_c1(y, x) == doctest::Approx(-0.7));
  const std::vector<double> z{0.0, 0.0};
  CHECK_THROWS_AS(esig::estimate_c1(s, z), std::domain_error);

  // a constant path has S_c = 0: corrected estimator falls back to c = 0
  std::vector<esig::PiecewiseLinearPath> flat(3, oracle::path_1d({1.0, 1.0, 1.0}));
  const auto r = esig::corrected_expected_signature(flat, {Word(1, {1, 1})}, {esig::CMode::c1, 0.0});
  CHECK(r.c_fallback[0]);
  CHECK(r.c_used[0] == 0.0);
}

TEST_CASE("c2 terms against brute-force shuffles on one path") {
  const auto p = oracle::path_1d({0.0, 1.0, 3.0});
  const Word I(1, {1, 1});
  const auto t = esig::c2_terms({p}, I, Exec::serial);
  // augmented alphabet: letter 1 = X, letter 2 = running sum of squared increments
  const auto aug = esig::qv_augment(p);
  const int q = esig::qv_letter(1, 1, 1);
  REQUIRE(q == 2);
  double num = 0.0, den = 0.0;
  for (const auto& [w, c] : oracle::shuffle({1, 1}, {1, 1})) num += c * oracle::sig_word(aug, w);
  for (const auto& [w, c] : oracle::shuffle({1, 1}, {q})) num -= 0.5 * c * oracle::sig_word(aug, w);
  for (const auto& [w, c] : oracle::shuffle({1}, {1})) {
    auto wq = w;
    wq.push_back(q);
    den += c * oracle::sig_word(aug, wq);
  }
  CHECK(t.numerator[0] == doctest::Approx(num).epsilon(1e-10));
  CHECK(t.denominator[0] == doctest::Approx(den).epsilon(1e-10));
  CHECK_THROWS(esig::estimate_c2({p}, Word(1, {1})));
}

TEST_CASE("c2 and c1 estimate the same coefficient for brownian motion") {
  const auto paths = bm_paths(1, 6, 10000, 21);
  const Word I(1, {1, 1});
  std::vector<double> s(paths.size()), sc(paths.size());
  for (std::size_t n = 0; n < paths.size(); ++n) {
    s[n] = esig::sig_word(paths[n], I);
    sc[n] = esig::control_term(paths[n], I);
  }
  const double oracle_c = esig::sample_covariance(s, sc) / esig::sample_variance(sc);
  const double c1 = esig::estimate_c1(s, sc), c2 = esig::estimate_c2(paths, I);
  CHECK(std::abs(c2 - c1) < 0.1);
  CHECK(std::abs(c1 - oracle_c) < 0.1);
}

TEST_CASE("diagnostic duplicates and sign") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> y1(50), z1(50), y2(50), z2(50);
  for (std::size_t i = 0; i < 50; ++i) {
    y1[i] = g(rng);
    z1[i] = 1.0 + g(rng) * g(rng);
    y2[i] = g(rng);
    z2[i] = 1.0 + std::abs(g(rng));
  }
  auto dup = [](std::vector<double> v) {
    v.insert(v.end(), v.begin(), v.end());
    return v;
  };
  const double base = esig::mse_diff_diagnostic(y1, z1, y2, z2);
  // pooled means are unchanged, the sum doubles and the 1/N^2 prefactor quarters
  CHECK(esig::mse_diff_diagnostic(dup(y1), dup(z1), dup(y2), dup(z2)) == doctest::Approx(base / 2.0).epsilon(1e-12));
  const std::vector<double> one{1.0};
  CHECK_THROWS(esig::mse_diff_diagnostic(one, one, one, one));

  // weak consistency: the sign points at the estimator with the smaller squared error more often than not
  const Word I(1, {1, 1});
  int agree = 0;
  const int R = 50;
  for (int r = 0; r < R; ++r) {
    const auto paths = bm_paths(1, 4, 2000, 100 + r);
    std::vector<double> s(paths.size()), sc(paths.size());
    for (std::size_t n = 0; n < paths.size(); ++n) {
      s[n] = esig::sig_word(paths[n], I);
      sc[n] = esig::control_term(paths[n], I);
    }
    const double target = esig::sample_covariance(s, sc) / esig::sample_variance(sc);
    const double e1 = std::pow(esig::estimate_c1(s, sc) - target, 2);
    const double e2 = std::pow(esig::estimate_c2(paths, I) - target, 2);
    const double stat = esig::mse_diff_diagnostic(paths, I);
    agree += (stat < 0) == (e2 < e1);
  }
  MESSAGE("diagnostic agreement " << agree << "/" << R);
  CHECK(agree >= 0.6 * R);
}

TEST_CASE("HAC estimator") {
  const auto paths = bm_paths(2, 4, 4096, 31);
  const std::vector<Word> words{Word(2, {1}), Word(2, {1, 2}), Word(2, {2, 2})};
  const auto r = esig::expected_signature(paths, words);
  const auto h = esig::hac_long_run_cov(r.per_sample, words.size());
  CHECK(h.bandwidth == 8);
  CHECK(!h.clipped);
  CHECK((h.sigma - h.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd s0 = esig::hac_sigma0(r.per_sample, words.size());
  CHECK(s0.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() >= -1e-12);
  CHECK((esig::hac_sigma0_shuffle(paths, words) - s0).cwiseAbs().maxCoeff() < 1e-10);

  // i.i.d. samples: the lag terms average out and the long-run variance is the plain variance.
  // One replication is too noisy to check (8 lags at N = 4096), so average over many.
  const auto big = esig::expected_signature(bm_paths(2, 4, 200000, 32), words);
  const Eigen::MatrixXd var = esig::hac_sigma0(big.per_sample, words.size());
  const int R = 100;
  std::vector<std::vector<double>> ratio(words.size());
  for (int rep = 0; rep < R; ++rep) {
    const auto e = esig::expected_signature(bm_paths(2, 4, 4096, 1000 + rep), words);
    const auto hr = esig::hac_long_run_cov(e.per_sample, words.size());
    for (std::size_t w = 0; w < words.size(); ++w) {
      const auto i = static_cast<Eigen::Index>(w);
      ratio[w].push_back(hr.sigma(i, i) / var(i, i));
    }
  }
  for (const auto& q : ratio) CHECK(std::abs(esig::mean(q) - 1.0) < 3.0 * std::sqrt(esig::sample_variance(q) / R));

  const std::vector<double> two{1.0, 3.0};
  const auto tiny = esig::hac_long_run_cov(two, 1, {0.01});
  CHECK(tiny.bandwidth == 1);
  CHECK(tiny.sigma(0, 0) == doctest::Approx(1.0 + 2.0 * (-1.0 * 1.0)));
  const auto t0 = esig::hac_long_run_cov(two, 1, {0.5});
  CHECK(t0.bandwidth == 1);
  CHECK_THROWS(esig::hac_long_run_cov(two, 1, {1.0}));
}
