#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "esig/colreg.hpp"
#include "esig/esig.hpp"
#include "esig/processes.hpp"

namespace esig {

inline constexpr const char* kVersion = "0.1.0";

/// Validation failure; what() is "<field path>: <message>".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct PartitionSpec {
  std::string scheme = "dyadic";  // dyadic | mesh-rule
  int level = 8;                  // dyadic level for scheme "dyadic"
  int max_level = 12;             // cap for mesh-rule
  /// Dyadic level used with N samples per estimate.
  int level_for(std::size_t N) const;
};

struct InfillSpec {
  int level_min = 3;
  int level_max = 8;
  int reference_level = 12;
  double expected_slope = -0.5;
  double tolerance = 0.15;
};

struct ReferenceSpec {
  std::size_t multiplier = 10;  // reference N = multiplier * N unless N is set
  std::size_t N = 0;
  int refine = 2;               // extra dyadic levels (4x finer)
};

struct ConsistencySpec {
  std::size_t n_min = 64;
  std::size_t n_max = 4096;
};

struct PayoffSpec {
  std::map<std::string, double> terms;  // word string on the 4-letter alphabet -> coefficient
  double discount = 1.0;
};

struct HedgeSpec {
  int K = 2;
  std::optional<double> p0;
  std::size_t out_of_sample = 2000;
  bool correction = false;
  double ridge = 1e-8;
};

struct ColregSpec {
  std::vector<double> sigma{10.0};
  std::vector<double> rho{0.0, 0.25, 0.5, 0.75};
  std::vector<std::string> f{"linear"};
  std::size_t N = 1000;
  std::size_t reps = 10000;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  double T = 1.0;
  ProcessSpec process = BmParams{1};
  std::vector<std::string> words{"1"};
  int K = 4;
  PartitionSpec partition;
  std::string sampling = "ind";  // ind | chop
  std::string transform = "none";  // none | time-lead-lag
  std::size_t N = 1000;
  std::size_t replications = 1;
  CorrectionOptions estimator;
  HacOptions hac;
  InfillSpec infill;
  ReferenceSpec reference;
  ConsistencySpec consistency;
  PayoffSpec payoff;
  HedgeSpec hedge;
  ColregSpec colreg;

  nlohmann::json effective;  // normalised config with defaults filled in
  /// Word objects over the dimension the estimator sees (after the transform).
  std::vector<Word> parsed_words() const;
  int estimator_dim() const;
};

inline const std::vector<std::string> kExperimentKinds = {"infill", "consistency",  "clt",   "density",  "variance-reduction",
                                                          "price",  "hedge",        "colreg", "selftest"};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& file);

nlohmann::json process_to_json(const ProcessSpec& spec);

/// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& effective);

}  // namespace esig
