#include <doctest.h>

#include <random>

#include "esig/words.hpp"
#include "oracles.hpp"

using esig::Word;
using esig::WordPolynomial;

namespace {

Word w2(std::vector<int> l) { return Word(2, std::move(l)); }

std::int64_t binomial(int n, int k) {
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("single letters shuffle into both orders") {
  const auto p = esig::shuffle(w2({1}), w2({2}));
  CHECK(p.terms().size() == 2);
  CHECK(p.coefficient(w2({1, 2})) == 1);
  CHECK(p.coefficient(w2({2, 1})) == 1);
}

TEST_CASE("shuffle with a repeated letter counts multiplicity") {
  const auto p = esig::shuffle(w2({1, 2}), w2({2}));
  CHECK(p.terms().size() == 2);
  CHECK(p.coefficient(w2({1, 2, 2})) == 2);
  CHECK(p.coefficient(w2({2, 1, 2})) == 1);
}

TEST_CASE("empty word is the shuffle unit") {
  const auto p = esig::shuffle(Word::empty(2), w2({1, 2}));
  CHECK(p.terms().size() == 1);
  CHECK(p.coefficient(w2({1, 2})) == 1);
}

TEST_CASE("mismatched alphabets are rejected") {
  CHECK_THROWS_AS(esig::shuffle(Word(2, {1}), Word(3, {1})), std::invalid_argument);
  CHECK_THROWS_AS(esig::concat(Word(2, {1}), Word(3, {1})), std::invalid_argument);
  CHECK_THROWS(Word(2, {3}));
}

TEST_CASE("shuffle matches brute-force enumeration, is commutative and associative") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 3);
    auto rand_word = [&](std::size_t n) {
      std::vector<int> l(n);
      for (auto& x : l) x = 1 + static_cast<int>(rng() % d);
      return Word(d, l);
    };
    const std::size_t la = rng() % 4, lb = rng() % (7 - la), lc = rng() % 3;
    const Word a = rand_word(la), b = rand_word(lb), c = rand_word(lc);
    const auto ab = esig::shuffle(a, b);
    const auto brute = oracle::shuffle(a.letters(), b.letters());
    REQUIRE(ab.terms().size() == brute.size());
    for (const auto& [w, k] : brute) CHECK(ab.coefficient(Word(d, w)) == k);
    CHECK(ab == esig::shuffle(b, a));
    CHECK(ab.total_mass() == binomial(static_cast<int>(la + lb), static_cast<int>(la)));
    if (la + lb + lc <= 6) {
      WordPolynomial pa(d), pc(d);
      pa.add(a, 1);
      pc.add(c, 1);
      const auto left = esig::shuffle(ab, pc);
      const auto right = esig::shuffle(pa, esig::shuffle(b, c));
      CHECK(left == right);
    }
  }
}

TEST_CASE("layout order and index") {
  const esig::WordLayout l1(2, 1);
  REQUIRE(l1.size() == 3);
  CHECK(l1.word(0).is_empty());
  CHECK(l1.word(1) == w2({1}));
  CHECK(l1.word(2) == w2({2}));
  CHECK(l1.index(w2({2})) == 2);

  const esig::WordLayout l2(2, 2);
  CHECK(l2.size() == 7);
  CHECK(l2.index(w2({2, 1})) == 5);
  CHECK(esig::WordLayout(1, 3).size() == 4);
  CHECK(esig::word_count(3, 4) == (81 * 3 - 1) / 2);
  CHECK_THROWS_AS(l2.index(w2({1, 1, 1})), std::out_of_range);
  CHECK_THROWS_AS(esig::WordLayout(1000, 8), std::overflow_error);
}

TEST_CASE("layout round trip and standalone index agree") {
  for (int d = 1; d <= 3; ++d)
    for (int K = 0; K <= 4; ++K) {
      const esig::WordLayout l(d, K);
      for (std::size_t i = 0; i < l.size(); ++i) {
        CHECK(l.index(l.word(i)) == i);
        CHECK(esig::word_index(l.word(i)) == i);
        if (i > 0) CHECK(l.word(i - 1) < l.word(i));
      }
    }
}

TEST_CASE("concatenation") {
  CHECK(esig::concat(w2({1}), w2({2})) == w2({1, 2}));
  CHECK(esig::concat(Word::empty(2), w2({1})) == w2({1}));
  CHECK(esig::concat(w2({1, 2}), w2({2, 2})) == w2({1, 2, 2, 2}));
}

TEST_CASE("parse and print") {
  CHECK(Word::parse("1.2.2", 2) == w2({1, 2, 2}));
  CHECK(Word::parse("", 3).is_empty());
  CHECK(w2({1, 2}).to_string() == "1.2");
  CHECK_THROWS(Word::parse("1..2", 2));
  CHECK_THROWS(Word::parse("1.x", 2));
  CHECK(w2({1, 2, 2}).drop_last(2) == w2({1}));
}
