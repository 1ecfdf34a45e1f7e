#include "esig/colreg.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/sinh_sinh.hpp>

#include "esig/batch.hpp"
#include "esig/linalg.hpp"
#include "esig/rng.hpp"
#include "esig/stats.hpp"

namespace esig {

void RegressionData::validate() const {
  if (X.rows() == 0 || X.cols() == 0) throw std::invalid_argument("regression: empty design");
  if (y.size() != X.rows()) throw std::invalid_argument("regression: y length differs from X rows");
  if (Z.cols() > 0 && Z.rows() != X.rows()) throw std::invalid_argument("regression: Z rows differ from X rows");
  if (Sigma && (Sigma->rows() != Z.cols() + 1 || Sigma->cols() != Z.cols() + 1))
    throw std::invalid_argument("regression: Sigma must be (k+1) x (k+1)");
}

namespace {

Eigen::LDLT<Eigen::MatrixXd> checked_gram(const Eigen::MatrixXd& A, const char* what) {
  const Eigen::MatrixXd G = A.transpose() * A;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw std::runtime_error(std::string(what) + " is singular");
  return G.ldlt();
}

}  // namespace

Eigen::VectorXd ols(const RegressionData& data) {
  data.validate();
  return checked_gram(data.X, "X^T X").solve(data.X.transpose() * data.y);
}

Eigen::VectorXd controlled_ols_sample(const RegressionData& data, bool* pinv_used) {
  data.validate();
  Eigen::VectorXd r = data.y;
  bool used = false;
  if (data.Z.cols() > 0) {
    const Eigen::MatrixXd ZtZ = data.Z.transpose() * data.Z;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ZtZ);
    lu.setThreshold(1e-10);
    Eigen::VectorXd alpha;
    if (lu.isInvertible()) {
      alpha = ZtZ.ldlt().solve(data.Z.transpose() * data.y);
    } else {
      alpha = pseudo_inverse(ZtZ, 1e-10) * (data.Z.transpose() * data.y);
      used = true;
    }
    r -= data.Z * alpha;
  }
  if (pinv_used) *pinv_used = used;
  return checked_gram(data.X, "X^T X").solve(data.X.transpose() * r);
}

Eigen::VectorXd joint_ols(const RegressionData& data) {
  data.validate();
  if (data.Z.cols() == 0) return ols(data);
  Eigen::MatrixXd D(data.X.rows(), data.X.cols() + data.Z.cols());
  D << data.X, data.Z;
  return checked_gram(D, "joint Gram").solve(D.transpose() * data.y).head(data.X.cols());
}

Eigen::VectorXd joint_ols_block(const RegressionData& data) {
  data.validate();
  const Eigen::VectorXd beta = ols(data);
  if (data.Z.cols() == 0) return beta;
  const auto xtx = checked_gram(data.X, "X^T X");
  const Eigen::MatrixXd XtZ = data.X.transpose() * data.Z;
  const Eigen::MatrixXd S = data.Z.transpose() * data.Z - XtZ.transpose() * xtx.solve(XtZ);
  const Eigen::VectorXd s = data.Z.transpose() * data.y - XtZ.transpose() * xtx.solve(data.X.transpose() * data.y);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  if (!lu.isInvertible()) throw std::runtime_error("projected Z^T Z is singular");
  return beta - xtx.solve(XtZ * lu.solve(s));
}

Eigen::VectorXd controlled_ols_oracle(const RegressionData& data) {
  data.validate();
  if (!data.Sigma) throw std::invalid_argument("oracle estimator needs Sigma");
  const auto k = data.Z.cols();
  if (k == 0) return ols(data);
  const Eigen::MatrixXd Sz = data.Sigma->bottomRightCorner(k, k);
  const Eigen::VectorXd Szy = data.Sigma->bottomLeftCorner(k, 1);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Sz);
  if (!lu.isInvertible()) throw std::runtime_error("Sigma_z is singular");
  const auto xtx = checked_gram(data.X, "X^T X");
  return ols(data) - xtx.solve(data.X.transpose() * data.Z * lu.solve(Szy));
}

Dependence parse_dependence(const std::string& s) {
  if (s == "linear") return Dependence::linear;
  if (s == "sq") return Dependence::sq;
  if (s == "cube") return Dependence::cube;
  if (s == "exp") return Dependence::exp;
  throw std::invalid_argument("unknown dependence '" + s + "'");
}

std::string dependence_name(Dependence f) {
  switch (f) {
    case Dependence::linear: return "linear";
    case Dependence::sq: return "sq";
    case Dependence::cube: return "cube";
    case Dependence::exp: return "exp";
  }
  return "linear";
}

double dependence_fn(Dependence f, double z) {
  const double e = std::exp(1.0);
  switch (f) {
    case Dependence::linear: return z;
    case Dependence::sq: return (z * z + z - 1.0) / std::sqrt(3.0);
    case Dependence::cube: return z * z * z / std::sqrt(15.0);
    case Dependence::exp: return (std::exp(z) - std::sqrt(e)) / std::sqrt(e * e - e);
  }
  return z;
}

double dependence_cov(Dependence f) {
  boost::math::quadrature::sinh_sinh<double> integrator;
  const double c = 1.0 / std::sqrt(2.0 * M_PI);
  return integrator.integrate([f, c](double z) {
    if (std::abs(z) > 38.0) return 0.0;  // density underflows; avoids inf * 0
    return z * dependence_fn(f, z) * c * std::exp(-0.5 * z * z);
  });
}

double dependence_cov_closed_form(Dependence f) {
  switch (f) {
    case Dependence::linear: return 1.0;
    case Dependence::sq: return 1.0 / std::sqrt(3.0);
    case Dependence::cube: return 3.0 / std::sqrt(15.0);
    case Dependence::exp: return 1.0 / std::sqrt(std::exp(1.0) - 1.0);
  }
  return 1.0;
}

RmseRow rmse_experiment(const RmseConfig& cfg) {
  if (cfg.N < 4 || cfg.reps < 2) throw std::invalid_argument("colreg: need N >= 4 and reps >= 2");
  if (!(cfg.sigma >= 0.0) || !(cfg.rho >= -1.0 && cfg.rho <= 1.0)) throw std::invalid_argument("colreg: bad sigma/rho");
  RmseRow row;
  row.config = cfg;
  const double cov = dependence_cov(cfg.f);
  const double kappa = cfg.rho / cov;
  if (std::abs(kappa) > 1.0 + 1e-12) {
    row.feasible = false;
    return row;
  }
  const auto N = static_cast<Eigen::Index>(cfg.N);
  Eigen::MatrixXd X(N, 3);
  {
    NormalStream rng(StreamSeed{derive_seed(cfg.seed, "colreg-design"), 0});
    for (Eigen::Index i = 0; i < N; ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = rng();
      X(i, 2) = 1.0 + rng();
    }
  }
  const Eigen::Vector3d beta(-1.0, 6.0, 8.0);
  const Eigen::Vector3d x_star(1.0, 0.0, 1.0);
  const double target = x_star.dot(beta);
  const Eigen::VectorXd signal = X * beta;
  Eigen::MatrixXd Sigma(2, 2);
  Sigma << cfg.sigma * cfg.sigma, cfg.sigma * cfg.rho, cfg.sigma * cfg.rho, 1.0;
  const double noise_scale = std::sqrt(std::max(0.0, 1.0 - kappa * kappa));
  const std::uint64_t master = derive_seed(cfg.seed, "colreg-noise");
  std::vector<double> sq[4];
  for (auto& v : sq) v.assign(cfg.reps, 0.0);
  for_each_index(cfg.reps, Exec::parallel, [&](std::size_t r) {
    NormalStream rng(StreamSeed{master, r});
    RegressionData data;
    data.X = X;
    data.Z.resize(N, 1);
    data.y.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double z = rng();
      const double eta = rng();
      data.Z(i, 0) = z;
      data.y(i) = signal(i) + cfg.sigma * (kappa * dependence_fn(cfg.f, z) + noise_scale * eta);
    }
    data.Sigma = Sigma;
    const Eigen::VectorXd est[4] = {ols(data), controlled_ols_sample(data), joint_ols(data),
                                    controlled_ols_oracle(data)};
    for (int e = 0; e < 4; ++e) {
      const double err = x_star.dot(est[e]) - target;
      sq[e][r] = err * err;
    }
  });
  for (int e = 0; e < 4; ++e) {
    row.rmse[e] = std::sqrt(mean(sq[e]));
    row.percent_of_ols[e] = 100.0 * row.rmse[e] / row.rmse[kOls];
    if (e != kOls) row.p_vs_ols[e] = paired_t_test(sq[e], sq[kOls]).p_less;
  }
  row.p_feasible_vs_joint = paired_t_test(sq[kFeasible], sq[kJoint]).p_two_sided;
  return row;
}

}  // namespace esig
