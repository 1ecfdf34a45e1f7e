#include <doctest.h>

#include <filesystem>

#include "esig/path.hpp"
#include "oracles.hpp"

using esig::Partition;
using esig::PiecewiseLinearPath;

TEST_CASE("dyadic partitions") {
  CHECK(Partition::dyadic(1.0, 0).times() == std::vector<double>{0.0, 1.0});
  CHECK(Partition::dyadic(1.0, 2).times() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(Partition::dyadic(2.0, 1).times() == std::vector<double>{0.0, 1.0, 2.0});
  CHECK_THROWS(Partition(std::vector<double>{0.0, 0.0}));
}

TEST_CASE("add_time") {
  const auto p = esig::add_time(oracle::path_1d({0.0, 1.0}));
  CHECK(p.dim() == 2);
  CHECK(p.samples() == std::vector<double>{0.0, 0.0, 1.0, 1.0});

  const auto c = esig::add_time(PiecewiseLinearPath(Partition::uniform(2.0, 2), 1, {5.0, 5.0, 5.0}));
  CHECK(c.at(0, 0) == 0.0);
  CHECK(c.at(1, 0) == 1.0);
  CHECK(c.at(2, 0) == 2.0);
  CHECK(c.at(2, 1) == 5.0);
}

TEST_CASE("lead_lag interleaving") {
  const auto ll = esig::lead_lag(oracle::path_1d({0.0, 1.0, 3.0}));
  REQUIRE(ll.vertices() == 5);
  CHECK(ll.samples() == std::vector<double>{0, 0, 1, 0, 1, 1, 3, 1, 3, 3});
  CHECK(esig::lead_lag(oracle::path_1d({0.0, 2.0})).vertices() == 3);

  std::mt19937_64 rng(1);
  const auto p = oracle::random_path(rng, 2, 7);
  const auto q = esig::lead_lag(p);
  CHECK(q.dim() == 4);
  for (std::size_t m = 0; m < q.steps(); ++m) {
    // lag moves only on odd -> even steps, lead only on even -> odd
    const bool lag_step = m % 2 == 1;
    for (int i = 0; i < 2; ++i) {
      CHECK((q.at(m + 1, i) - q.at(m, i) == 0.0) == lag_step);
      CHECK((q.at(m + 1, 2 + i) - q.at(m, 2 + i) == 0.0) == !lag_step);
    }
  }
  CHECK(q.partition().times()[1] == doctest::Approx(0.5 / 7.0));
}

TEST_CASE("qv_augment") {
  const auto q = esig::qv_augment(oracle::path_1d({0.0, 1.0, 3.0}));
  REQUIRE(q.dim() == 2);
  CHECK(q.at(0, 1) == 0.0);
  CHECK(q.at(1, 1) == 1.0);
  CHECK(q.at(2, 1) == 5.0);

  const auto z = esig::qv_augment(PiecewiseLinearPath(Partition::uniform(1.0, 3), 2, std::vector<double>(8, 0.0)));
  for (double v : z.samples()) CHECK(v == 0.0);

  std::mt19937_64 rng(2);
  const auto p = oracle::random_path(rng, 2, 20);
  const auto a = esig::qv_augment(p);
  REQUIRE(a.dim() == 6);
  double s12 = 0.0, s22 = 0.0;
  for (std::size_t m = 0; m < p.steps(); ++m) {
    const double d1 = p.at(m + 1, 0) - p.at(m, 0), d2 = p.at(m + 1, 1) - p.at(m, 1);
    s12 += d1 * d2;
    s22 += d2 * d2;
  }
  // pair (i,j) sits at 1-based coordinate d + (i-1)d + j
  CHECK(a.at(20, 2 + 0 * 2 + 2 - 1) == doctest::Approx(s12));
  CHECK(a.at(20, 2 + 1 * 2 + 1 - 1) == doctest::Approx(s12));
  CHECK(a.at(20, 2 + 1 * 2 + 2 - 1) == doctest::Approx(s22));
}

TEST_CASE("chop") {
  std::mt19937_64 rng(4);
  const auto p = oracle::random_path(rng, 1, 8);
  const auto one = esig::chop(p, 1.0, 1);
  REQUIRE(one.size() == 1);
  for (std::size_t m = 0; m <= 8; ++m) CHECK(one[0].at(m, 0) == doctest::Approx(p.at(m, 0) - p.at(0, 0)));

  const PiecewiseLinearPath line(Partition::uniform(2.0, 4), 1, {0.0, 0.5, 1.0, 1.5, 2.0});
  const auto two = esig::chop(line, 1.0, 2);
  REQUIRE(two.size() == 2);
  for (const auto& s : two) {
    CHECK(s.partition().start() == 0.0);
    CHECK(s.at(0, 0) == 0.0);
    CHECK(s.at(s.steps(), 0) == doctest::Approx(1.0));
  }
  CHECK(two[0].samples() == two[1].samples());
  CHECK_THROWS(esig::chop(line, 0.7, 2));
  CHECK_THROWS(esig::chop(line, 1.0, 3));
}

TEST_CASE("csv round trip") {
  std::mt19937_64 rng(9);
  const auto p = oracle::random_path(rng, 3, 5);
  const auto file = std::filesystem::temp_directory_path() / "esig_path_roundtrip.csv";
  esig::write_path_csv(file, p);
  const auto q = esig::read_path_csv(file);
  std::filesystem::remove(file);
  CHECK(q.samples() == p.samples());
  CHECK(q.partition().times() == p.partition().times());
}
