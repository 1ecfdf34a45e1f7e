#pragma once

#include <cstdint>
#include <vector>

#include "esig/batch.hpp"
#include "esig/esig.hpp"
#include "esig/processes.hpp"
#include "esig/tensor.hpp"

namespace esig {

// Letters of the lead-lag transform of the add-time path of a 1-d price.
inline constexpr int kTimeLead = 1;
inline constexpr int kPriceLead = 2;
inline constexpr int kTimeLag = 3;
inline constexpr int kPriceLag = 4;

/// lead_lag(add_time(p)) for a 1-d price path.
PiecewiseLinearPath time_lead_lag(const PiecewiseLinearPath& price);

/// Ridge regression of payoffs on the signature coefficients of `words`.
/// With ridge == 0 a rank-deficient design throws std::runtime_error.
Functional fit_payoff_functional(std::span<const double> payoffs, const std::vector<TensorSeries>& sigs,
                                 const std::vector<Word>& words, double ridge = 1e-8);
/// All words up to level K as features.
Functional fit_payoff_functional(std::span<const double> payoffs, const std::vector<TensorSeries>& sigs, int K,
                                 double ridge = 1e-8);

struct PricingSpec {
  Functional f{4, 2};
  double discount = 1.0;  // Z_T
  std::size_t N = 1000;
  bool correction = true;
  CMode c_mode = CMode::c1;
};

struct PriceResult {
  double price = 0.0;
  double se = 0.0;
  std::vector<Word> words;
  std::vector<double> phi_hat;
  std::vector<double> c_used;
};

/// Price from given 1-d price paths.
PriceResult price(const PricingSpec& spec, const std::vector<PiecewiseLinearPath>& prices,
                  Exec exec = Exec::parallel);
/// Simulates spec.N paths and prices on the first coordinate.
PriceResult price(const PricingSpec& spec, const Simulator& sim, std::uint64_t master, Exec exec = Exec::parallel);

/// Mean signature over the lead-lag alphabet up to level K; with correction, words ending in the
/// price-lead letter use the control variate with c1.
TensorSeries expected_lead_lag_signature(const std::vector<PiecewiseLinearPath>& prices, int K, bool correction,
                                         Exec exec = Exec::parallel);

struct HedgeResult {
  Functional ell{2, 0};
  double objective = 0.0;
  Eigen::MatrixXd gram;
  double ridge_used = 0.0;
};

/// Signature level Phi must carry for hedge(f, ., ., K).
int hedge_required_depth(const Functional& f, int K);

/// Minimises <(f - p0 - l'2)^{sh 2}, Phi> over l on the (time, price) alphabet truncated at K/2,
/// where l' maps time/price to the lag letters 3/4; <l'2, S> is then the left-point PnL of holding l.
HedgeResult hedge(const Functional& f, double p0, const TensorSeries& Phi, int K, double ridge = 1e-8);

/// Per path: sum over steps of <ell, S(add_time(p))_{[0,t_m]}> (X_{m+1} - X_m).
std::vector<double> pnl_backtest(const Functional& ell, const std::vector<PiecewiseLinearPath>& prices,
                                 Exec exec = Exec::parallel);

/// <g^{sh 2}, S> for a functional g.
double pair_shuffle_square(const Functional& g, const TensorSeries& S);

/// Lift of an add-time word (letters 1=time, 2=price) to the lag letters followed by the price-lead letter.
Word hedge_word(const Word& w);

}  // namespace esig
