#include "esig/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace esig {

TensorSeries::TensorSeries(int d, int K) : d_(d), K_(K), coeffs_(word_count(d, K), 0.0) {}

TensorSeries::TensorSeries(int d, int K, std::vector<double> coeffs) : d_(d), K_(K), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != word_count(d, K))
    throw std::invalid_argument("tensor series has " + std::to_string(coeffs_.size()) + " coefficients, expected " +
                                std::to_string(word_count(d, K)));
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw std::invalid_argument("tensor series coefficients must be finite");
}

TensorSeries TensorSeries::unit(int d, int K) {
  TensorSeries s(d, K);
  s.coeffs_[0] = 1.0;
  return s;
}

std::span<const double> TensorSeries::level(int k) const {
  return std::span<const double>(coeffs_).subspan(level_offset(d_, k), level_size(d_, k));
}

std::span<double> TensorSeries::level(int k) {
  return std::span<double>(coeffs_).subspan(level_offset(d_, k), level_size(d_, k));
}

double TensorSeries::operator[](const Word& w) const {
  if (w.alphabet() != d_ || static_cast<int>(w.size()) > K_)
    throw std::out_of_range("word " + w.to_string() + " outside tensor truncation");
  return coeffs_[word_index(w)];
}

double& TensorSeries::operator[](const Word& w) {
  if (w.alphabet() != d_ || static_cast<int>(w.size()) > K_)
    throw std::out_of_range("word " + w.to_string() + " outside tensor truncation");
  return coeffs_[word_index(w)];
}

TensorSeries TensorSeries::truncate(int K) const {
  if (K > K_) throw std::invalid_argument("cannot truncate to a higher level");
  return TensorSeries(d_, K, std::vector<double>(coeffs_.begin(), coeffs_.begin() + word_count(d_, K)));
}

TensorSeries tensor_product(const TensorSeries& a, const TensorSeries& b) {
  if (a.dim() != b.dim() || a.depth() != b.depth()) throw std::invalid_argument("tensor_product shape mismatch");
  const int d = a.dim(), K = a.depth();
  TensorSeries out(d, K);
  for (int k = 0; k <= K; ++k) {
    auto dst = out.level(k);
    for (int i = 0; i <= k; ++i) {
      auto ai = a.level(i);
      auto bj = b.level(k - i);
      const std::size_t nb = bj.size();
      for (std::size_t p = 0; p < ai.size(); ++p) {
        const double x = ai[p];
        if (x == 0.0) continue;
        double* row = dst.data() + p * nb;
        for (std::size_t q = 0; q < nb; ++q) row[q] += x * bj[q];
      }
    }
  }
  return out;
}

namespace {

// Writes exp(x) into `out` laid out like a (d, K) series.
void fill_exp(std::span<const double> x, int K, std::span<double> out) {
  const int d = static_cast<int>(x.size());
  out[0] = 1.0;
  if (K == 0) return;
  std::copy(x.begin(), x.end(), out.begin() + 1);
  for (int k = 2; k <= K; ++k) {
    const double inv = 1.0 / k;
    const std::size_t prev_off = level_offset(d, k - 1), prev_n = level_size(d, k - 1);
    double* dst = out.data() + level_offset(d, k);
    for (std::size_t p = 0; p < prev_n; ++p) {
      const double v = out[prev_off + p] * inv;
      for (int q = 0; q < d; ++q) *dst++ = v * x[static_cast<std::size_t>(q)];
    }
  }
}

}  // namespace

TensorSeries tensor_exp(std::span<const double> x, int K) {
  if (x.empty()) throw std::invalid_argument("tensor_exp needs a non-empty vector");
  TensorSeries s(static_cast<int>(x.size()), K);
  fill_exp(x, K, s.coeffs());
  return s;
}

void mul_exp_inplace(TensorSeries& s, std::span<const double> x, std::span<double> scratch) {
  const int d = s.dim(), K = s.depth();
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("increment dimension mismatch");
  fill_exp(x, K, scratch);
  // top level first so lower levels are still the old values when read
  for (int k = K; k >= 1; --k) {
    auto dst = s.level(k);
    for (int i = 0; i < k; ++i) {
      const int j = k - i;
      auto si = s.level(i);
      const double* e = scratch.data() + level_offset(d, j);
      const std::size_t ne = level_size(d, j);
      for (std::size_t p = 0; p < si.size(); ++p) {
        const double v = si[p];
        if (v == 0.0) continue;
        double* row = dst.data() + p * ne;
        for (std::size_t q = 0; q < ne; ++q) row[q] += v * e[q];
      }
    }
  }
}

double max_abs_diff(const TensorSeries& a, const TensorSeries& b) {
  if (a.dim() != b.dim() || a.depth() != b.depth()) throw std::invalid_argument("max_abs_diff shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return m;
}

void Functional::set(const Word& w, double value) {
  if (w.alphabet() != d_) throw std::invalid_argument("functional word alphabet mismatch");
  if (static_cast<int>(w.size()) > K_)
    throw std::out_of_range("word " + w.to_string() + " exceeds functional truncation");
  if (value == 0.0)
    coeffs_.erase(w);
  else
    coeffs_[w] = value;
}

double Functional::get(const Word& w) const {
  auto it = coeffs_.find(w);
  return it == coeffs_.end() ? 0.0 : it->second;
}

std::size_t Functional::max_length() const {
  std::size_t m = 0;
  for (const auto& [w, c] : coeffs_) m = std::max(m, w.size());
  return m;
}

double pair(const Functional& f, const TensorSeries& s) {
  if (f.dim() != s.dim()) throw std::invalid_argument("pair: dimension mismatch");
  double acc = 0.0;
  for (const auto& [w, c] : f.coeffs()) {
    if (static_cast<int>(w.size()) > s.depth())
      throw std::out_of_range("pair: word " + w.to_string() + " outside truncation");
    acc += c * s.coeffs()[word_index(w)];
  }
  return acc;
}

}  // namespace esig
