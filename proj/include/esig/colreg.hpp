#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace esig {

struct RegressionData {
  Eigen::MatrixXd X;                    // N x p design
  Eigen::VectorXd y;                    // N targets
  Eigen::MatrixXd Z;                    // N x k controls, may have 0 columns
  std::optional<Eigen::MatrixXd> Sigma; // (k+1) x (k+1) joint covariance of (eps, z)
  void validate() const;
};

/// (X^T X)^{-1} X^T y. Throws std::runtime_error when X^T X is singular.
Eigen::VectorXd ols(const RegressionData& data);
/// (X^T X)^{-1} X^T (I - Z (Z^T Z)^{-1} Z^T) y; a pseudo-inverse replaces (Z^T Z)^{-1} when it is singular.
Eigen::VectorXd controlled_ols_sample(const RegressionData& data, bool* pinv_used = nullptr);
/// First p entries of the OLS solve on the design (X Z).
Eigen::VectorXd joint_ols(const RegressionData& data);
/// The same estimator through the block formula with projected covariances.
Eigen::VectorXd joint_ols_block(const RegressionData& data);
/// beta_X - (X^T X)^{-1} X^T Z Sigma_z^{-1} Sigma_{z,y} with the supplied Sigma.
Eigen::VectorXd controlled_ols_oracle(const RegressionData& data);

enum class Dependence { linear, sq, cube, exp };
Dependence parse_dependence(const std::string& s);
std::string dependence_name(Dependence f);
/// Normalised f(z) with E f = 0 and E f^2 = 1.
double dependence_fn(Dependence f, double z);
/// Cov(z, f(z)) for z ~ N(0,1), by quadrature.
double dependence_cov(Dependence f);
/// Closed forms, used to check the quadrature.
double dependence_cov_closed_form(Dependence f);

struct RmseConfig {
  double sigma = 10.0;
  double rho = 0.5;
  Dependence f = Dependence::linear;
  std::size_t N = 1000;
  std::size_t reps = 10000;
  std::uint64_t seed = 0;
};

enum Estimator : int { kOls = 0, kFeasible = 1, kJoint = 2, kInfeasible = 3 };
inline constexpr const char* kEstimatorNames[] = {"ols", "controlled_sample", "joint_ols", "controlled_oracle"};

struct RmseRow {
  RmseConfig config;
  double rmse[4] = {0, 0, 0, 0};
  double percent_of_ols[4] = {100, 0, 0, 0};
  double p_vs_ols[4] = {1, 1, 1, 1};  // paired t-test of squared errors, alternative: lower than OLS
  double p_feasible_vs_joint = 1.0;   // two-sided
  bool feasible = true;               // false when |rho| exceeds Cov(z, f(z))
};

/// Fixed design (intercept, x1 ~ N(0,1), x2 ~ N(1,1)), beta = (-1, 6, 8), test point (1, 0, 1);
/// resamples (z, eta) per replication.
RmseRow rmse_experiment(const RmseConfig& config);

}  // namespace esig
