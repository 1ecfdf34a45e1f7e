#pragma once

#include <vector>

#include "esig/path.hpp"
#include "esig/tensor.hpp"
#include "esig/words.hpp"

namespace esig {

/// Truncated signature of a piecewise-linear path: the Chen product of the step exponentials.
TensorSeries signature(const PiecewiseLinearPath& p, int K);

/// Entry m is the signature of the first m steps; entry 0 is the unit.
std::vector<TensorSeries> prefix_signatures(const PiecewiseLinearPath& p, int K);

double sig_word(const PiecewiseLinearPath& p, const Word& w);

/// Left-point (Ito-style) control sum_{[u,v]} S^{I_{-1}}_{[0,u]} X^{(i_k)}_{u,v}.
double control_term(const PiecewiseLinearPath& p, const Word& w);

/// Signature coefficients and control terms for several words from one sweep over the path.
struct WordValues {
  std::vector<double> sig;
  std::vector<double> control;  // empty unless requested; 0 for the empty word
};
WordValues evaluate_words(const PiecewiseLinearPath& p, const std::vector<Word>& words, bool with_control);

/// Reference computation through the level-by-level causal sum
/// S^k_{[0,v]} = S^k_{[0,u]} + sum_{i=1..k} S^{k-i}_{[0,u]} (x) X_{u,v}^{(x)i} / i!.
/// Does not use the tensor product kernels; kept as an oracle for signature().
TensorSeries signature_causal(const PiecewiseLinearPath& p, int K);

}  // namespace esig
