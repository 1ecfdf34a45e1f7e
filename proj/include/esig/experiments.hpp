#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "esig/config.hpp"
#include "esig/path.hpp"
#include "esig/processes.hpp"

namespace esig {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentOutput {
  nlohmann::json summary;
  CsvTable samples;
  std::optional<std::string> svg;
};

/// Batches of N sample paths on a dyadic level. Batch k is paths kN..kN+N-1 of stream `master`
/// for ind sampling, or the chopped long path with stream index k for chop sampling.
class SampleSource {
 public:
  SampleSource(const ExperimentConfig& config, int level, std::size_t N);
  /// With `transformed`, paths come out in the estimator's alphabet (e.g. time-lead-lag).
  std::vector<PiecewiseLinearPath> draw(std::uint64_t master, std::uint64_t batch, bool transformed = true) const;
  std::size_t batch_size() const { return N_; }
  int level() const { return level_; }

 private:
  const ExperimentConfig* config_;
  int level_;
  std::size_t N_;
  std::optional<Simulator> sim_;
};

/// Letters whose coordinate is a martingale in the estimator's alphabet.
std::vector<int> estimator_martingale_letters(const ExperimentConfig& c);

/// Standardised replications sqrt(N)(phi - ref)/sqrt(sigma); replications with sigma <= 0 are dropped.
struct CltStats {
  std::vector<double> z;
  std::size_t flagged = 0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks = 0.0;
  double ks_p = 1.0;
  bool degenerate = false;  // fewer than 8 usable replications
};
CltStats clt_stats(std::span<const double> phi, std::span<const double> sigma, double reference, std::size_t N);

struct AlgebraCheck {
  std::string name;
  std::size_t cases = 0;
  double max_deviation = 0.0;
};
/// Randomised identities (Chen, shuffle, reversal, refinement, causal form) on paths with
/// d <= 3, K <= 4 and at most 32 steps.
std::vector<AlgebraCheck> algebraic_suite(std::size_t cases, std::uint64_t seed);

ExperimentOutput run_infill(const ExperimentConfig& c);
ExperimentOutput run_consistency(const ExperimentConfig& c);
ExperimentOutput run_clt(const ExperimentConfig& c);
ExperimentOutput run_density(const ExperimentConfig& c);
ExperimentOutput run_variance_reduction(const ExperimentConfig& c);
ExperimentOutput run_price(const ExperimentConfig& c);
ExperimentOutput run_hedge(const ExperimentConfig& c);
ExperimentOutput run_colreg(const ExperimentConfig& c);
ExperimentOutput run_selftest(const ExperimentConfig& c);

ExperimentOutput run_experiment(const ExperimentConfig& c);

/// summary.json, samples.csv and plot.svg (when present), each stamped with the config hash and version.
void write_outputs(const ExperimentOutput& out, const ExperimentConfig& c, const std::filesystem::path& dir);

/// Shortest round-trip decimal form, independent of locale.
std::string fmt(double v);

}  // namespace esig
