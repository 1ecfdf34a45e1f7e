#pragma once

#include <map>
#include <span>
#include <vector>

#include "esig/words.hpp"

namespace esig {

/// Element of the truncated tensor algebra T^K(R^d), stored densely in WordLayout order.
class TensorSeries {
 public:
  TensorSeries() = default;
  TensorSeries(int d, int K);  // zero series
  TensorSeries(int d, int K, std::vector<double> coeffs);

  static TensorSeries unit(int d, int K);

  int dim() const { return d_; }
  int depth() const { return K_; }
  std::size_t size() const { return coeffs_.size(); }

  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }
  std::span<const double> level(int k) const;
  std::span<double> level(int k);

  double operator[](const Word& w) const;
  double& operator[](const Word& w);

  /// Same coefficients restricted to levels <= K.
  TensorSeries truncate(int K) const;

 private:
  int d_ = 1;
  int K_ = 0;
  std::vector<double> coeffs_;
};

/// Truncated product: level k of the result is sum_{i+j=k} A_i (x) B_j.
TensorSeries tensor_product(const TensorSeries& a, const TensorSeries& b);

/// exp of a level-one element: level k is x^{(x)k} / k!.
TensorSeries tensor_exp(std::span<const double> x, int K);

/// Right-multiplies s by exp(x) in place. `scratch` must hold word_count(d, K) doubles;
/// nothing is allocated.
void mul_exp_inplace(TensorSeries& s, std::span<const double> x, std::span<double> scratch);

double max_abs_diff(const TensorSeries& a, const TensorSeries& b);

/// Sparse linear functional on T^K(R^d).
class Functional {
 public:
  Functional(int d, int K) : d_(d), K_(K) {}

  int dim() const { return d_; }
  int depth() const { return K_; }
  const std::map<Word, double>& coeffs() const { return coeffs_; }

  void set(const Word& w, double value);
  double get(const Word& w) const;
  std::size_t max_length() const;

 private:
  int d_;
  int K_;
  std::map<Word, double> coeffs_;
};

double pair(const Functional& f, const TensorSeries& s);

}  // namespace esig
