#include <doctest.h>

#include <random>
#include <stdexcept>

#include "esig/tensor.hpp"

using esig::TensorSeries;
using esig::Word;

namespace {

TensorSeries random_series(std::mt19937_64& rng, int d, int K) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorSeries s(d, K);
  for (double& c : s.coeffs()) c = u(rng);
  return s;
}

// word-level definition: (a b)^w = sum over splits w = uv of a^u b^v
TensorSeries product_by_words(const TensorSeries& a, const TensorSeries& b) {
  const esig::WordLayout l(a.dim(), a.depth());
  TensorSeries out(a.dim(), a.depth());
  for (const Word& w : l.words())
    for (std::size_t j = 0; j <= w.size(); ++j) {
      const std::vector<int> u(w.letters().begin(), w.letters().begin() + j);
      const std::vector<int> v(w.letters().begin() + j, w.letters().end());
      out[w] += a[Word(a.dim(), u)] * b[Word(a.dim(), v)];
    }
  return out;
}

}  // namespace

TEST_CASE("unit is neutral") {
  std::mt19937_64 rng(3);
  const auto b = random_series(rng, 2, 3);
  CHECK(esig::max_abs_diff(esig::tensor_product(TensorSeries::unit(2, 3), b), b) == 0.0);
  CHECK(esig::max_abs_diff(esig::tensor_product(b, TensorSeries::unit(2, 3)), b) == 0.0);
}

TEST_CASE("1-d exponentials multiply like scalars") {
  const double one[] = {1.0}, two[] = {2.0};
  const auto p = esig::tensor_product(esig::tensor_exp(one, 2), esig::tensor_exp(two, 2));
  CHECK(p.coeffs()[0] == doctest::Approx(1.0));
  CHECK(p.coeffs()[1] == doctest::Approx(3.0));
  CHECK(p.coeffs()[2] == doctest::Approx(4.5));
}

TEST_CASE("L-shaped product of two exponentials") {
  const double e1[] = {1.0, 0.0}, e2[] = {0.0, 1.0};
  const auto p = esig::tensor_product(esig::tensor_exp(e1, 2), esig::tensor_exp(e2, 2));
  CHECK(p[Word(2, {1, 2})] == doctest::Approx(1.0));
  CHECK(p[Word(2, {2, 1})] == 0.0);
}

TEST_CASE("tensor_exp levels") {
  const double two[] = {2.0};
  const auto e = esig::tensor_exp(two, 3);
  CHECK(e.coeffs()[0] == 1.0);
  CHECK(e.coeffs()[1] == doctest::Approx(2.0));
  CHECK(e.coeffs()[2] == doctest::Approx(2.0));
  CHECK(e.coeffs()[3] == doctest::Approx(4.0 / 3.0));

  const double zero[] = {0.0, 0.0, 0.0};
  CHECK(esig::max_abs_diff(esig::tensor_exp(zero, 4), TensorSeries::unit(3, 4)) == 0.0);

  const double ones[] = {1.0, 1.0};
  const auto f = esig::tensor_exp(ones, 2);
  for (double c : f.level(2)) CHECK(c == doctest::Approx(0.5));
}

TEST_CASE("product agrees with the word-level definition and is associative") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + static_cast<int>(rng() % 3), K = static_cast<int>(rng() % 5);
    const auto a = random_series(rng, d, K), b = random_series(rng, d, K), c = random_series(rng, d, K);
    const auto ab = esig::tensor_product(a, b);
    CHECK(esig::max_abs_diff(ab, product_by_words(a, b)) < 1e-12);
    CHECK(esig::max_abs_diff(esig::tensor_product(ab, c), esig::tensor_product(a, esig::tensor_product(b, c))) < 1e-12);
  }
}

TEST_CASE("exp(x) exp(-x) is the unit and exp matches the power series") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const int d = 1 + static_cast<int>(rng() % 3), K = 1 + static_cast<int>(rng() % 4);
    std::vector<double> x(d), mx(d);
    for (int i = 0; i < d; ++i) mx[i] = -(x[i] = u(rng));
    CHECK(esig::max_abs_diff(esig::tensor_product(esig::tensor_exp(x, K), esig::tensor_exp(mx, K)),
                             TensorSeries::unit(d, K)) < 1e-12);

    TensorSeries xs(d, K), series = TensorSeries::unit(d, K), power = TensorSeries::unit(d, K);
    for (int i = 0; i < d; ++i) xs[Word(d, {i + 1})] = x[i];
    double fact = 1.0;
    for (int k = 1; k <= K; ++k) {
      power = esig::tensor_product(power, xs);
      fact *= k;
      for (std::size_t i = 0; i < series.size(); ++i) series.coeffs()[i] += power.coeffs()[i] / fact;
    }
    CHECK(esig::max_abs_diff(series, esig::tensor_exp(x, K)) < 1e-12);
  }
}

TEST_CASE("in-place exp multiplication equals the product") {
  std::mt19937_64 rng(8);
  const auto a = random_series(rng, 3, 4);
  const std::vector<double> x{0.3, -0.2, 0.5};
  TensorSeries s = a;
  std::vector<double> scratch(esig::word_count(3, 4));
  esig::mul_exp_inplace(s, x, scratch);
  CHECK(esig::max_abs_diff(s, esig::tensor_product(a, esig::tensor_exp(x, 4))) < 1e-14);
}

TEST_CASE("pairing") {
  const double two[] = {2.0};
  const auto S = esig::tensor_exp(two, 2);
  esig::Functional unit(1, 2), f(1, 2), g(1, 2);
  unit.set(Word::empty(1), 1.0);
  CHECK(esig::pair(unit, S) == 1.0);
  f.set(Word(1, {1}), 3.0);
  CHECK(esig::pair(f, S) == doctest::Approx(6.0));
  g.set(Word(1, {1, 1}), 1.0);
  g.set(Word(1, {1}), -1.0);
  CHECK(esig::pair(g, S) == doctest::Approx(0.0));

  esig::Functional deep(1, 3);
  deep.set(Word(1, {1, 1, 1}), 1.0);
  CHECK_THROWS_AS(esig::pair(deep, S), std::out_of_range);
  CHECK_THROWS(esig::tensor_product(TensorSeries(2, 2), TensorSeries(2, 3)));
}
