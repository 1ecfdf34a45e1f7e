#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "esig/colreg.hpp"
#include "esig/stats.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using esig::RegressionData;

namespace {

MatrixXd gaussian(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g;
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

RegressionData make_data(std::mt19937_64& rng, int N = 60, int p = 3, int k = 2) {
  RegressionData d;
  d.X = gaussian(rng, N, p);
  d.X.col(0).setOnes();
  d.Z = gaussian(rng, N, k);
  d.y = gaussian(rng, N, 1).col(0) + d.X * VectorXd::LinSpaced(p, 1.0, 2.0);
  return d;
}

double max_diff(const VectorXd& a, const VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("ordinary least squares") {
  std::mt19937_64 rng(1);
  RegressionData d;
  d.X = MatrixXd::Ones(5, 1);
  d.y = VectorXd{{1.0, 2.0, 4.0, 8.0, 0.5}};
  CHECK(esig::ols(d)(0) == doctest::Approx(3.1));

  d.X = gaussian(rng, 20, 3);
  const VectorXd beta{{0.5, -2.0, 3.0}};
  d.y = d.X * beta;
  CHECK(max_diff(esig::ols(d), beta) < 1e-10);

  // orthogonal columns: per-column projections
  d.X = MatrixXd::Zero(4, 2);
  d.X.col(0) = VectorXd{{1, 1, 1, 1}};
  d.X.col(1) = VectorXd{{1, -1, 1, -1}};
  d.y = VectorXd{{3, 0, 2, 1}};
  const VectorXd b = esig::ols(d);
  CHECK(b(0) == doctest::Approx(d.X.col(0).dot(d.y) / 4.0));
  CHECK(b(1) == doctest::Approx(d.X.col(1).dot(d.y) / 4.0));

  d.X.col(1) = d.X.col(0);
  CHECK_THROWS_AS(esig::ols(d), std::runtime_error);
}

TEST_CASE("feasible controlled estimator") {
  std::mt19937_64 rng(2);
  RegressionData d = make_data(rng);
  // control orthogonal to y changes nothing
  RegressionData o = d;
  o.Z = gaussian(rng, 60, 1);
  o.Z.col(0) -= o.Z.col(0).dot(d.y) / d.y.squaredNorm() * d.y;
  CHECK(max_diff(esig::controlled_ols_sample(o), esig::ols(d)) < 1e-10);

  RegressionData self = d;
  self.Z = d.y;
  CHECK(esig::controlled_ols_sample(self).cwiseAbs().maxCoeff() < 1e-10);

  // two steps: regress y on Z, then the residual on X
  const VectorXd r = d.y - d.Z * d.Z.colPivHouseholderQr().solve(d.y);
  CHECK(max_diff(esig::controlled_ols_sample(d), d.X.colPivHouseholderQr().solve(r)) < 1e-10);

  RegressionData dup = d;
  dup.Z = MatrixXd(60, 2);
  dup.Z << d.Z.col(0), d.Z.col(0);
  bool pinv = false;
  RegressionData single = d;
  single.Z = d.Z.col(0);
  CHECK(max_diff(esig::controlled_ols_sample(dup, &pinv), esig::controlled_ols_sample(single)) < 1e-8);
  CHECK(pinv);
}

TEST_CASE("joint OLS") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    RegressionData d = make_data(rng);
    CHECK(max_diff(esig::joint_ols(d), esig::joint_ols_block(d)) < 1e-8);
  }
  RegressionData d = make_data(rng);
  const VectorXd beta{{1.0, -1.0, 0.25}}, alpha{{2.0, -3.0}};
  d.y = d.X * beta + d.Z * alpha;
  CHECK(max_diff(esig::joint_ols(d), beta) < 1e-8);
  RegressionData none = d;
  none.Z = MatrixXd(60, 0);
  CHECK(max_diff(esig::joint_ols(none), esig::ols(none)) < 1e-12);
}

TEST_CASE("oracle controlled estimator") {
  std::mt19937_64 rng(4);
  RegressionData d = make_data(rng);
  MatrixXd S = MatrixXd::Identity(3, 3);
  d.Sigma = S;
  CHECK(max_diff(esig::controlled_ols_oracle(d), esig::ols(d)) < 1e-12);

  // sample second moments in Sigma turn it into the feasible estimator
  const double n = 60.0;
  S(0, 0) = d.y.squaredNorm() / n;
  S.block(1, 0, 2, 1) = d.Z.transpose() * d.y / n;
  S.block(0, 1, 1, 2) = (d.Z.transpose() * d.y / n).transpose();
  S.block(1, 1, 2, 2) = d.Z.transpose() * d.Z / n;
  d.Sigma = S;
  CHECK(max_diff(esig::controlled_ols_oracle(d), esig::controlled_ols_sample(d)) < 1e-8);

  // written out independently
  S = MatrixXd{{4.0, 0.6, -0.3}, {0.6, 1.0, 0.2}, {-0.3, 0.2, 2.0}};
  d.Sigma = S;
  const MatrixXd XtX = d.X.transpose() * d.X;
  const VectorXd bx = XtX.inverse() * d.X.transpose() * d.y;
  const VectorXd manual = bx - XtX.inverse() * d.X.transpose() * d.Z * S.block(1, 1, 2, 2).inverse() * S.block(1, 0, 2, 1);
  CHECK(max_diff(esig::controlled_ols_oracle(d), manual) < 1e-10);

  d.Sigma = MatrixXd::Zero(3, 3);
  CHECK_THROWS(esig::controlled_ols_oracle(d));
}

TEST_CASE("every estimator is translation equivariant") {
  std::mt19937_64 rng(5);
  RegressionData d = make_data(rng);
  d.Sigma = MatrixXd{{4.0, 0.6, -0.3}, {0.6, 1.0, 0.2}, {-0.3, 0.2, 2.0}};
  RegressionData s = d;
  const VectorXd delta{{0.7, -1.1, 2.0}};
  s.y += d.X * delta;
  // the feasible formula picks up X delta through the projection on Z unless Z is orthogonal to X
  const MatrixXd Px = d.X * (d.X.transpose() * d.X).inverse() * d.X.transpose();
  d.Z -= Px * d.Z;
  s.Z = d.Z;
  CHECK(max_diff(esig::ols(s), esig::ols(d) + delta) < 1e-10);
  CHECK(max_diff(esig::controlled_ols_sample(s), esig::controlled_ols_sample(d) + delta) < 1e-10);
  CHECK(max_diff(esig::joint_ols(s), esig::joint_ols(d) + delta) < 1e-10);
  CHECK(max_diff(esig::controlled_ols_oracle(s), esig::controlled_ols_oracle(d) + delta) < 1e-10);
}

TEST_CASE("dependence functions") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  const std::size_t n = 10000000;
  for (auto f : {esig::Dependence::linear, esig::Dependence::sq, esig::Dependence::cube, esig::Dependence::exp}) {
    CHECK(esig::dependence_cov(f) == doctest::Approx(esig::dependence_cov_closed_form(f)).epsilon(1e-9));
    std::vector<double> v(n), v2(n), zv(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = g(rng), y = esig::dependence_fn(f, z);
      v[i] = y;
      v2[i] = y * y;
      zv[i] = z * y;
    }
    auto ok = [n](const std::vector<double>& x, double mu) {
      return std::abs(esig::mean(x) - mu) <= 3.0 * std::sqrt(esig::sample_variance(x) / static_cast<double>(n));
    };
    CHECK(ok(v, 0.0));
    CHECK(ok(v2, 1.0));
    CHECK(ok(zv, esig::dependence_cov(f)));
    CHECK(esig::parse_dependence(esig::dependence_name(f)) == f);
  }
  CHECK_THROWS(esig::parse_dependence("quartic"));
}

TEST_CASE("rmse experiment rows") {
  esig::RmseConfig c;
  c.reps = 2000;
  c.rho = 0.0;
  c.seed = 7;
  const auto zero = esig::rmse_experiment(c);
  for (int e = 1; e < 4; ++e) CHECK(zero.percent_of_ols[e] == doctest::Approx(100.0).epsilon(0.01));

  c.rho = 0.5;
  const auto half = esig::rmse_experiment(c);
  CHECK(std::abs(half.percent_of_ols[esig::kFeasible] - 85.86) < 2.0);
  CHECK(half.p_vs_ols[esig::kFeasible] < 0.01);

  c.rho = 0.75;
  const auto hi = esig::rmse_experiment(c);
  CHECK(std::abs(hi.percent_of_ols[esig::kJoint] - 65.52) < 2.0);

  c.f = esig::Dependence::sq;
  c.rho = 0.9;
  CHECK(!esig::rmse_experiment(c).feasible);
  CHECK(esig::rmse_experiment(c).percent_of_ols[0] == 100.0);
}
