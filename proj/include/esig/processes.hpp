#pragma once

#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "esig/path.hpp"
#include "esig/rng.hpp"

namespace esig {

struct BmParams {
  int d = 1;
};

/// Fractional Brownian motion, independent coordinates.
struct FbmParams {
  double H = 0.5;
  int d = 1;
  void validate() const;
};

/// Stationary mean-zero OU process with covariance C(s,t) = exp(-A|t-s|) Sigma.
struct OUParams {
  Eigen::MatrixXd A;
  Eigen::MatrixXd Sigma;  // stationary covariance
  void validate() const;
};

/// Bivariate CAR(2): first two coordinates of a 4-d OU state with drift
/// [[0, -I], [A2, A1]] and diffusion diag(0, 0, 1, 1).
struct CAR2Params {
  Eigen::Matrix2d A1;
  Eigen::Matrix2d A2;
  Eigen::Matrix4d drift() const;
  Eigen::Matrix4d diffusion() const;
  /// The equivalent stationary OU parameters of the 4-d state.
  OUParams state() const;
};

struct HestonParams {
  double s0 = 1.0, v0 = 0.1, kappa = 0.6, theta = 0.1, xi = 0.2, rho = -0.15;
  bool feller() const { return 2.0 * kappa * theta > xi * xi; }
  void validate() const;
};

struct HestonProcess {
  HestonParams params;
  int substeps = 16;
};

using ProcessSpec = std::variant<BmParams, FbmParams, OUParams, CAR2Params, HestonProcess>;

int process_dim(const ProcessSpec& spec);
std::string process_name(const ProcessSpec& spec);
/// Components that are martingales (1-based letters), used to pick words for the control variate.
std::vector<int> martingale_letters(const ProcessSpec& spec);

using CovarianceFn = std::function<double(double, double)>;
using MeanFn = std::function<double(double)>;

double fbm_covariance(double H, double s, double t);

/// Exact joint Gaussian sampling on a fixed grid; the Cholesky factor is computed once.
/// Grid points with zero variance are set to the mean.
class GaussianSampler {
 public:
  GaussianSampler(CovarianceFn cov, MeanFn mean, Partition partition, int d = 1);
  PiecewiseLinearPath sample(StreamSeed seed) const;
  double jitter() const { return jitter_; }

 private:
  Partition partition_;
  int d_;
  std::vector<double> mean_;
  std::vector<std::size_t> random_idx_;
  Eigen::MatrixXd chol_;
  double jitter_ = 0.0;
};

/// Exact-transition OU sampler started in the stationary law.
class OuSampler {
 public:
  OuSampler(OUParams params, Partition partition);
  PiecewiseLinearPath sample(StreamSeed seed) const;

 private:
  struct Step {
    Eigen::MatrixXd transition;
    Eigen::MatrixXd noise_chol;
  };
  Partition partition_;
  OUParams params_;
  Eigen::MatrixXd start_chol_;
  std::vector<std::size_t> step_kind_;
  std::vector<Step> kinds_;
};

PiecewiseLinearPath simulate_bm(int d, const Partition& partition, StreamSeed seed);
PiecewiseLinearPath simulate_gaussian(CovarianceFn cov, MeanFn mean, const Partition& partition, StreamSeed seed,
                                      int d = 1);
PiecewiseLinearPath simulate_fbm(const FbmParams& params, const Partition& partition, StreamSeed seed);
PiecewiseLinearPath simulate_ou(const OUParams& params, const Partition& partition, StreamSeed seed);
/// Simulates on the partition tiled `multiple` times back to back, i.e. over [0, multiple * T].
PiecewiseLinearPath simulate_ou(const OUParams& params, const Partition& partition, StreamSeed seed,
                                std::size_t multiple);
PiecewiseLinearPath simulate_car2(const CAR2Params& params, const Partition& partition, StreamSeed seed);
/// (S, V) on the partition; full-truncation Euler for V on a grid `substeps` times finer,
/// log-Euler for S given V.
PiecewiseLinearPath simulate_heston(const HestonParams& params, const Partition& partition, StreamSeed seed,
                                    int substeps = 16);

/// Partition repeated `multiple` times back to back.
Partition tile_partition(const Partition& partition, std::size_t multiple);

/// Precomputes whatever a process needs on a fixed partition and draws paths from seeds.
class Simulator {
 public:
  Simulator(ProcessSpec spec, Partition partition);
  PiecewiseLinearPath sample(StreamSeed seed) const;
  int dim() const { return process_dim(spec_); }
  const Partition& partition() const { return partition_; }
  const ProcessSpec& spec() const { return spec_; }

 private:
  ProcessSpec spec_;
  Partition partition_;
  std::variant<std::monostate, GaussianSampler, OuSampler> engine_;
};

}  // namespace esig
