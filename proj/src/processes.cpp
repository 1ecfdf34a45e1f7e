#include "esig/processes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "esig/linalg.hpp"

namespace esig {

void FbmParams::validate() const {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("fbm: H must lie in (0,1)");
  if (d < 1) throw std::invalid_argument("fbm: d must be >= 1");
}

void OUParams::validate() const {
  if (A.rows() != A.cols() || A.rows() == 0) throw std::invalid_argument("ou: A must be square and non-empty");
  if (Sigma.rows() != A.rows() || Sigma.cols() != A.rows()) throw std::invalid_argument("ou: Sigma shape must match A");
  if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + Sigma.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("ou: Sigma must be symmetric");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.eigenvalues().real().minCoeff() <= 0.0)
    throw std::invalid_argument("ou: eigenvalues of A must have positive real part");
}

Eigen::Matrix4d CAR2Params::drift() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.block<2, 2>(0, 2) = -Eigen::Matrix2d::Identity();
  m.block<2, 2>(2, 0) = A2;
  m.block<2, 2>(2, 2) = A1;
  return m;
}

Eigen::Matrix4d CAR2Params::diffusion() const {
  Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
  q(2, 2) = 1.0;
  q(3, 3) = 1.0;
  return q;
}

OUParams CAR2Params::state() const {
  // dX = -A X dt + dW restricted to the last block; stationary covariance P solves A P + P A^T = Q
  OUParams ou;
  ou.A = drift();
  ou.Sigma = solve_lyapunov(ou.A, diffusion());
  return ou;
}

void HestonParams::validate() const {
  if (!(s0 > 0.0)) throw std::invalid_argument("heston: s0 must be > 0");
  if (!(v0 > 0.0)) throw std::invalid_argument("heston: v0 must be > 0");
  if (!(kappa > 0.0 && theta > 0.0 && xi > 0.0)) throw std::invalid_argument("heston: kappa, theta, xi must be > 0");
  if (!(rho > -1.0 && rho < 1.0)) throw std::invalid_argument("heston: rho must lie in (-1,1)");
}

int process_dim(const ProcessSpec& spec) {
  struct V {
    int operator()(const BmParams& p) const { return p.d; }
    int operator()(const FbmParams& p) const { return p.d; }
    int operator()(const OUParams& p) const { return static_cast<int>(p.A.rows()); }
    int operator()(const CAR2Params&) const { return 2; }
    int operator()(const HestonProcess&) const { return 2; }
  };
  return std::visit(V{}, spec);
}

std::string process_name(const ProcessSpec& spec) {
  static const char* names[] = {"bm", "fbm", "ou", "car2", "heston"};
  return names[spec.index()];
}

std::vector<int> martingale_letters(const ProcessSpec& spec) {
  if (std::holds_alternative<BmParams>(spec)) {
    std::vector<int> out;
    for (int i = 1; i <= std::get<BmParams>(spec).d; ++i) out.push_back(i);
    return out;
  }
  if (std::holds_alternative<HestonProcess>(spec)) return {1};
  if (std::holds_alternative<FbmParams>(spec) && std::get<FbmParams>(spec).H == 0.5) {
    std::vector<int> out;
    for (int i = 1; i <= std::get<FbmParams>(spec).d; ++i) out.push_back(i);
    return out;
  }
  return {};
}

double fbm_covariance(double H, double s, double t) {
  const double h2 = 2.0 * H;
  return 0.5 * (std::pow(std::abs(t), h2) + std::pow(std::abs(s), h2) - std::pow(std::abs(t - s), h2));
}

Partition tile_partition(const Partition& partition, std::size_t multiple) {
  if (multiple == 0) throw std::invalid_argument("tile_partition: multiple must be >= 1");
  const auto& t = partition.times();
  const double h = partition.horizon();
  std::vector<double> out;
  out.reserve(partition.steps() * multiple + 1);
  out.push_back(t.front());
  for (std::size_t k = 0; k < multiple; ++k)
    for (std::size_t m = 1; m < t.size(); ++m) out.push_back(t[m] + static_cast<double>(k) * h);
  return Partition(std::move(out));
}

GaussianSampler::GaussianSampler(CovarianceFn cov, MeanFn mean, Partition partition, int d)
    : partition_(std::move(partition)), d_(d) {
  if (d < 1) throw std::invalid_argument("gaussian sampler: d must be >= 1");
  const auto& t = partition_.times();
  mean_.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    mean_[i] = mean ? mean(t[i]) : 0.0;
    const double v = cov(t[i], t[i]);
    if (!(v >= 0.0)) throw std::invalid_argument("gaussian sampler: negative or NaN variance at t=" + std::to_string(t[i]));
    if (v > 0.0) random_idx_.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(random_idx_.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double c = cov(t[random_idx_[static_cast<std::size_t>(a)]], t[random_idx_[static_cast<std::size_t>(b)]]);
      gram(a, b) = c;
      gram(b, a) = c;
    }
  chol_ = cholesky_with_jitter(gram, &jitter_);
}

PiecewiseLinearPath GaussianSampler::sample(StreamSeed seed) const {
  NormalStream rng(seed);
  const std::size_t m = mean_.size();
  const auto n = chol_.rows();
  std::vector<double> samples(m * static_cast<std::size_t>(d_));
  for (std::size_t i = 0; i < m; ++i)
    for (int c = 0; c < d_; ++c) samples[i * static_cast<std::size_t>(d_) + static_cast<std::size_t>(c)] = mean_[i];
  Eigen::VectorXd z(n);
  for (int c = 0; c < d_; ++c) {
    for (Eigen::Index k = 0; k < n; ++k) z(k) = rng();
    const Eigen::VectorXd x = chol_.triangularView<Eigen::Lower>() * z;
    for (Eigen::Index k = 0; k < n; ++k)
      samples[random_idx_[static_cast<std::size_t>(k)] * static_cast<std::size_t>(d_) + static_cast<std::size_t>(c)] += x(k);
  }
  return PiecewiseLinearPath(partition_, d_, std::move(samples));
}

OuSampler::OuSampler(OUParams params, Partition partition) : partition_(std::move(partition)), params_(std::move(params)) {
  params_.validate();
  start_chol_ = cholesky_with_jitter(params_.Sigma);
  const auto& t = partition_.times();
  std::vector<double> widths;
  step_kind_.resize(partition_.steps());
  for (std::size_t m = 0; m + 1 < t.size(); ++m) {
    const double h = t[m + 1] - t[m];
    std::size_t k = 0;
    while (k < widths.size() && std::abs(widths[k] - h) > 1e-12 * std::max(1.0, h)) ++k;
    if (k == widths.size()) {
      widths.push_back(h);
      Step s;
      s.transition = expm(-params_.A * h);
      Eigen::MatrixXd noise = params_.Sigma - s.transition * params_.Sigma * s.transition.transpose();
      noise = 0.5 * (noise + noise.transpose());
      s.noise_chol = cholesky_with_jitter(noise);
      kinds_.push_back(std::move(s));
    }
    step_kind_[m] = k;
  }
}

PiecewiseLinearPath OuSampler::sample(StreamSeed seed) const {
  NormalStream rng(seed);
  const auto d = params_.A.rows();
  const std::size_t ud = static_cast<std::size_t>(d);
  std::vector<double> samples(partition_.times().size() * ud);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = rng();
  Eigen::VectorXd x = start_chol_ * z;
  for (std::size_t i = 0; i < ud; ++i) samples[i] = x(static_cast<Eigen::Index>(i));
  for (std::size_t m = 0; m < step_kind_.size(); ++m) {
    const Step& s = kinds_[step_kind_[m]];
    for (Eigen::Index i = 0; i < d; ++i) z(i) = rng();
    x = s.transition * x + s.noise_chol * z;
    for (std::size_t i = 0; i < ud; ++i) samples[(m + 1) * ud + i] = x(static_cast<Eigen::Index>(i));
  }
  return PiecewiseLinearPath(partition_, static_cast<int>(d), std::move(samples));
}

PiecewiseLinearPath simulate_bm(int d, const Partition& partition, StreamSeed seed) {
  if (d < 1) throw std::invalid_argument("bm: d must be >= 1");
  NormalStream rng(seed);
  const std::size_t ud = static_cast<std::size_t>(d);
  const auto& t = partition.times();
  std::vector<double> samples(t.size() * ud, 0.0);
  for (std::size_t m = 0; m + 1 < t.size(); ++m) {
    const double sd = std::sqrt(t[m + 1] - t[m]);
    for (std::size_t i = 0; i < ud; ++i) samples[(m + 1) * ud + i] = samples[m * ud + i] + sd * rng();
  }
  return PiecewiseLinearPath(partition, d, std::move(samples));
}

PiecewiseLinearPath simulate_gaussian(CovarianceFn cov, MeanFn mean, const Partition& partition, StreamSeed seed,
                                      int d) {
  return GaussianSampler(std::move(cov), std::move(mean), partition, d).sample(seed);
}

namespace {
GaussianSampler fbm_sampler(const FbmParams& params, const Partition& partition) {
  params.validate();
  const double H = params.H;
  const double t0 = partition.start();
  return GaussianSampler([H, t0](double s, double t) { return fbm_covariance(H, s - t0, t - t0); }, nullptr, partition,
                         params.d);
}
}  // namespace

PiecewiseLinearPath simulate_fbm(const FbmParams& params, const Partition& partition, StreamSeed seed) {
  return fbm_sampler(params, partition).sample(seed);
}

PiecewiseLinearPath simulate_ou(const OUParams& params, const Partition& partition, StreamSeed seed) {
  return OuSampler(params, partition).sample(seed);
}

PiecewiseLinearPath simulate_ou(const OUParams& params, const Partition& partition, StreamSeed seed,
                                std::size_t multiple) {
  return OuSampler(params, tile_partition(partition, multiple)).sample(seed);
}

PiecewiseLinearPath simulate_car2(const CAR2Params& params, const Partition& partition, StreamSeed seed) {
  return simulate_ou(params.state(), partition, seed).leading(2);
}

PiecewiseLinearPath simulate_heston(const HestonParams& params, const Partition& partition, StreamSeed seed,
                                    int substeps) {
  params.validate();
  if (substeps < 1) throw std::invalid_argument("heston: substeps must be >= 1");
  NormalStream rng(seed);
  const auto& t = partition.times();
  std::vector<double> samples(t.size() * 2);
  const double rho_bar = std::sqrt(1.0 - params.rho * params.rho);
  double log_s = std::log(params.s0);
  double v = params.v0;
  samples[0] = params.s0;
  samples[1] = params.v0;
  for (std::size_t m = 0; m + 1 < t.size(); ++m) {
    const double h = (t[m + 1] - t[m]) / substeps;
    const double sqrt_h = std::sqrt(h);
    for (int k = 0; k < substeps; ++k) {
      const double zv = rng();
      const double zs = params.rho * zv + rho_bar * rng();
      const double vp = std::max(v, 0.0);
      const double root = std::sqrt(vp) * sqrt_h;
      log_s += -0.5 * vp * h + root * zs;
      v += params.kappa * (params.theta - vp) * h + params.xi * root * zv;
    }
    const double s = std::exp(log_s);
    if (!std::isfinite(s) || !std::isfinite(v))
      throw std::runtime_error("heston: non-finite state at step " + std::to_string(m + 1));
    samples[(m + 1) * 2] = s;
    samples[(m + 1) * 2 + 1] = v;
  }
  return PiecewiseLinearPath(partition, 2, std::move(samples));
}

Simulator::Simulator(ProcessSpec spec, Partition partition) : spec_(std::move(spec)), partition_(std::move(partition)) {
  if (auto* f = std::get_if<FbmParams>(&spec_)) {
    engine_ = fbm_sampler(*f, partition_);
  } else if (auto* o = std::get_if<OUParams>(&spec_)) {
    engine_ = OuSampler(*o, partition_);
  } else if (auto* c = std::get_if<CAR2Params>(&spec_)) {
    engine_ = OuSampler(c->state(), partition_);
  } else if (auto* h = std::get_if<HestonProcess>(&spec_)) {
    h->params.validate();
    if (h->substeps < 1) throw std::invalid_argument("heston: substeps must be >= 1");
  } else if (std::get<BmParams>(spec_).d < 1) {
    throw std::invalid_argument("bm: d must be >= 1");
  }
}

PiecewiseLinearPath Simulator::sample(StreamSeed seed) const {
  if (auto* b = std::get_if<BmParams>(&spec_)) return simulate_bm(b->d, partition_, seed);
  if (auto* h = std::get_if<HestonProcess>(&spec_)) return simulate_heston(h->params, partition_, seed, h->substeps);
  if (auto* g = std::get_if<GaussianSampler>(&engine_)) return g->sample(seed);
  auto p = std::get<OuSampler>(engine_).sample(seed);
  if (std::holds_alternative<CAR2Params>(spec_)) return p.leading(2);
  return p;
}

}  // namespace esig
