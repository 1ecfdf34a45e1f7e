#include "esig/signature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace esig {

namespace {

void require_finite(const PiecewiseLinearPath& p) {
  for (double v : p.samples())
    if (!std::isfinite(v)) throw std::invalid_argument("path contains non-finite samples");
}

void require_depth(int K) {
  if (K < 0) throw std::invalid_argument("truncation level must be >= 0");
}

}  // namespace

TensorSeries signature(const PiecewiseLinearPath& p, int K) {
  require_depth(K);
  require_finite(p);
  TensorSeries s = TensorSeries::unit(p.dim(), K);
  std::vector<double> scratch(s.size()), inc(static_cast<std::size_t>(p.dim()));
  for (std::size_t m = 0; m < p.steps(); ++m) {
    p.increment(m, inc);
    mul_exp_inplace(s, inc, scratch);
  }
  return s;
}

std::vector<TensorSeries> prefix_signatures(const PiecewiseLinearPath& p, int K) {
  require_depth(K);
  require_finite(p);
  std::vector<TensorSeries> out;
  out.reserve(p.vertices());
  TensorSeries s = TensorSeries::unit(p.dim(), K);
  std::vector<double> scratch(s.size()), inc(static_cast<std::size_t>(p.dim()));
  out.push_back(s);
  for (std::size_t m = 0; m < p.steps(); ++m) {
    p.increment(m, inc);
    mul_exp_inplace(s, inc, scratch);
    out.push_back(s);
  }
  return out;
}

double sig_word(const PiecewiseLinearPath& p, const Word& w) {
  if (w.alphabet() != p.dim()) throw std::invalid_argument("word alphabet does not match path dimension");
  return evaluate_words(p, {w}, false).sig[0];
}

double control_term(const PiecewiseLinearPath& p, const Word& w) {
  if (w.is_empty()) throw std::invalid_argument("control term needs a non-empty word");
  if (w.alphabet() != p.dim()) throw std::invalid_argument("word alphabet does not match path dimension");
  return evaluate_words(p, {w}, true).control[0];
}

namespace {

// Prefix-closed set of words; only these coefficients are carried along the path.
struct PrefixTrie {
  std::vector<int> letter;                   // last letter (0-based) of each node, -1 for the root
  std::vector<std::vector<std::size_t>> up;  // ancestors from the root down to the node itself
  std::vector<std::size_t> order;            // longest first, so in-place updates read old ancestors

  std::size_t insert(const Word& w, std::map<std::vector<int>, std::size_t>& seen) {
    std::vector<int> key;
    std::vector<std::size_t> chain{0};
    for (int l : w.letters()) {
      key.push_back(l - 1);
      auto [it, fresh] = seen.try_emplace(key, letter.size());
      if (fresh) {
        letter.push_back(l - 1);
        up.push_back(chain);
        up.back().push_back(it->second);
      }
      chain.push_back(it->second);
    }
    return chain.back();
  }
};

}  // namespace

WordValues evaluate_words(const PiecewiseLinearPath& p, const std::vector<Word>& words, bool with_control) {
  require_finite(p);
  for (const Word& w : words)
    if (w.alphabet() != p.dim()) throw std::invalid_argument("word alphabet does not match path dimension");

  PrefixTrie trie;
  trie.letter.push_back(-1);
  trie.up.push_back({0});
  std::map<std::vector<int>, std::size_t> seen;
  std::vector<std::size_t> node(words.size()), parent(words.size(), 0);
  std::size_t K = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    node[i] = trie.insert(words[i], seen);
    if (!words[i].is_empty()) parent[i] = trie.up[node[i]][words[i].size() - 1];
    K = std::max(K, words[i].size());
  }
  trie.order.resize(trie.letter.size());
  for (std::size_t i = 0; i < trie.order.size(); ++i) trie.order[i] = i;
  std::stable_sort(trie.order.begin(), trie.order.end(),
                   [&](std::size_t a, std::size_t b) { return trie.up[a].size() > trie.up[b].size(); });
  std::vector<double> inv_fact(K + 1, 1.0);
  for (std::size_t i = 1; i <= K; ++i) inv_fact[i] = inv_fact[i - 1] / static_cast<double>(i);

  std::vector<double> s(trie.letter.size(), 0.0), inc(static_cast<std::size_t>(p.dim()));
  s[0] = 1.0;
  WordValues out;
  if (with_control) out.control.assign(words.size(), 0.0);
  for (std::size_t m = 0; m < p.steps(); ++m) {
    p.increment(m, inc);
    if (with_control)
      for (std::size_t i = 0; i < words.size(); ++i)
        if (!words[i].is_empty()) out.control[i] += s[parent[i]] * inc[static_cast<std::size_t>(words[i].back() - 1)];
    // S^w <- sum_j S^{w[:j]} x_{w[j]} ... x_{w[k-1]} / (k-j)!
    for (std::size_t v : trie.order) {
      const auto& chain = trie.up[v];
      const std::size_t k = chain.size() - 1;
      if (k == 0) continue;
      double acc = s[v], prod = 1.0;
      for (std::size_t j = k; j-- > 0;) {
        prod *= inc[static_cast<std::size_t>(trie.letter[chain[j + 1]])];
        acc += s[chain[j]] * prod * inv_fact[k - j];
      }
      s[v] = acc;
    }
  }
  out.sig.resize(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) out.sig[i] = s[node[i]];
  return out;
}

TensorSeries signature_causal(const PiecewiseLinearPath& p, int K) {
  require_depth(K);
  require_finite(p);
  const int d = p.dim();
  const std::size_t n = p.vertices();
  std::vector<std::vector<double>> incs(p.steps(), std::vector<double>(static_cast<std::size_t>(d)));
  for (std::size_t m = 0; m < p.steps(); ++m) p.increment(m, incs[m]);

  std::vector<double> inv_fact(static_cast<std::size_t>(K) + 1, 1.0);
  for (int i = 1; i <= K; ++i) inv_fact[static_cast<std::size_t>(i)] = inv_fact[static_cast<std::size_t>(i) - 1] / i;

  // prefix[k][m][word index within level k]
  std::vector<std::vector<std::vector<double>>> prefix(static_cast<std::size_t>(K) + 1);
  prefix[0].assign(n, std::vector<double>{1.0});
  for (int k = 1; k <= K; ++k) {
    const std::size_t nk = level_size(d, k);
    auto& cur = prefix[static_cast<std::size_t>(k)];
    cur.assign(n, std::vector<double>(nk, 0.0));
    std::vector<int> letters(static_cast<std::size_t>(k));
    for (std::size_t m = 0; m + 1 < n; ++m) {
      const auto& x = incs[m];
      for (std::size_t w = 0; w < nk; ++w) {
        // decode letters of word w (0-based, most significant first)
        std::size_t rem = w;
        for (int pos = k - 1; pos >= 0; --pos) {
          letters[static_cast<std::size_t>(pos)] = static_cast<int>(rem % static_cast<std::size_t>(d));
          rem /= static_cast<std::size_t>(d);
        }
        double acc = cur[m][w];
        // split w = (head of length k-i)(tail of length i)
        for (int i = 1; i <= k; ++i) {
          const int head_len = k - i;
          std::size_t head = 0;
          for (int pos = 0; pos < head_len; ++pos)
            head = head * static_cast<std::size_t>(d) + static_cast<std::size_t>(letters[static_cast<std::size_t>(pos)]);
          double tail = inv_fact[static_cast<std::size_t>(i)];
          for (int pos = head_len; pos < k; ++pos) tail *= x[static_cast<std::size_t>(letters[static_cast<std::size_t>(pos)])];
          acc += prefix[static_cast<std::size_t>(head_len)][m][head] * tail;
        }
        cur[m + 1][w] = acc;
      }
    }
  }
  TensorSeries out(d, K);
  for (int k = 0; k <= K; ++k) {
    auto dst = out.level(k);
    const auto& src = prefix[static_cast<std::size_t>(k)][n - 1];
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

}  // namespace esig
