#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esig/batch.hpp"
#include "esig/path.hpp"
#include "esig/words.hpp"

namespace esig {

enum class CMode { none, fixed, c1, c2, c1_centered };
enum class HacKernel { truncation, bartlett };

struct CorrectionOptions {
  CMode mode = CMode::c1;
  double c = 0.0;  // used when mode == fixed
};

struct HacOptions {
  double upsilon = 0.5;
  HacKernel kernel = HacKernel::truncation;
};

struct HacResult {
  Eigen::MatrixXd sigma;
  std::size_t bandwidth = 0;
  bool clipped = false;  // requested bandwidth was >= N
};

struct EstimateReport {
  std::vector<Word> words;
  std::size_t N = 0;
  std::vector<double> phi_hat;
  std::vector<double> per_sample;          // N x words, row-major
  std::vector<double> control_per_sample;  // same shape, empty without correction
  std::vector<double> c_used;              // empty without correction
  std::vector<bool> c_fallback;            // true where c fell back to 0
  std::vector<double> variance;            // sample variance of the summands / N
  std::vector<double> naive_variance;      // same for the uncorrected summands
  std::optional<HacResult> hac;

  double sample(std::size_t n, std::size_t w) const { return per_sample[n * words.size() + w]; }
  double control(std::size_t n, std::size_t w) const { return control_per_sample[n * words.size() + w]; }
  /// var(corrected) / var(naive) for word w; 1 without correction.
  double variance_ratio(std::size_t w) const;
};

EstimateReport expected_signature(const std::vector<PiecewiseLinearPath>& paths, const std::vector<Word>& words,
                                  Exec exec = Exec::parallel);
EstimateReport expected_signature(const BatchValues& values, const std::vector<Word>& words);

/// phi_hat = mean(S - c S_c) per word, with c chosen by opts.mode.
EstimateReport corrected_expected_signature(const std::vector<PiecewiseLinearPath>& paths,
                                            const std::vector<Word>& words, CorrectionOptions opts,
                                            Exec exec = Exec::parallel);
/// Same from precomputed values; c2 mode is unavailable here since it needs the paths.
EstimateReport corrected_expected_signature(const BatchValues& values, const std::vector<Word>& words,
                                            CorrectionOptions opts);

/// sum S S_c / sum S_c^2. Throws std::domain_error when the denominator is 0.
double estimate_c1(std::span<const double> s, std::span<const double> sc);
/// Cov(S, S_c) / Var(S_c), the sample-optimal coefficient.
double estimate_c1_centered(std::span<const double> s, std::span<const double> sc);

/// Per-path numerator and denominator of the QV-augmented estimator of c.
struct C2Terms {
  std::vector<double> numerator;
  std::vector<double> denominator;
};
/// The three word polynomials on the augmented alphabet d + d^2.
struct C2Words {
  WordPolynomial square;  // I sh I
  WordPolynomial cross;   // I sh (I_{-2} * qv(i_{k-1}, i_k)), enters with weight -1/2
  WordPolynomial denominator;  // (I_{-1} sh I_{-1}) * qv(i_k, i_k)
};
C2Words c2_words(const Word& I);
/// Letter of the QV coordinate for components (i, j), 1-based, on alphabet d + d^2.
int qv_letter(int d, int i, int j);
C2Terms c2_terms(const std::vector<PiecewiseLinearPath>& paths, const Word& I, Exec exec = Exec::parallel);
double estimate_c2(const std::vector<PiecewiseLinearPath>& paths, const Word& I, Exec exec = Exec::parallel);

/// Sample statistic proportional to MSE(c2) - MSE(c1); negative favours c2.
double mse_diff_diagnostic(std::span<const double> y1, std::span<const double> z1, std::span<const double> y2,
                           std::span<const double> z2);
double mse_diff_diagnostic(const std::vector<PiecewiseLinearPath>& paths, const Word& I, Exec exec = Exec::parallel);

/// Long-run covariance from samples in sample order (N x W row-major).
HacResult hac_long_run_cov(std::span<const double> per_sample, std::size_t W, HacOptions opts = {});
/// Lag-0 term (divisor N) from the sample directly.
Eigen::MatrixXd hac_sigma0(std::span<const double> per_sample, std::size_t W);
/// Lag-0 term through the shuffle identity: sum_{K in I sh J} phi_K - phi_I phi_J.
Eigen::MatrixXd hac_sigma0_shuffle(const std::vector<PiecewiseLinearPath>& paths, const std::vector<Word>& words,
                                   Exec exec = Exec::parallel);

std::string c_mode_name(CMode m);
CMode parse_c_mode(const std::string& s);

}  // namespace esig
