#include "esig/words.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

namespace esig {

namespace {

constexpr std::size_t kMaxLayout = std::size_t{1} << 31;

void require_same_alphabet(const Word& a, const Word& b) {
  if (a.alphabet() != b.alphabet())
    throw std::invalid_argument("word alphabet mismatch: " + std::to_string(a.alphabet()) +
                                " vs " + std::to_string(b.alphabet()));
}

}  // namespace

Word::Word(int alphabet, std::vector<int> letters) : alphabet_(alphabet), letters_(std::move(letters)) {
  if (alphabet_ < 1) throw std::invalid_argument("alphabet size must be >= 1");
  for (int l : letters_)
    if (l < 1 || l > alphabet_)
      throw std::invalid_argument("letter " + std::to_string(l) + " outside alphabet [1, " +
                                  std::to_string(alphabet_) + "]");
}

Word Word::drop_last(std::size_t n) const {
  if (n > letters_.size()) throw std::invalid_argument("cannot drop more letters than the word has");
  return Word(alphabet_, std::vector<int>(letters_.begin(), letters_.end() - static_cast<std::ptrdiff_t>(n)));
}

Word Word::widen(int alphabet) const {
  if (alphabet < alphabet_) throw std::invalid_argument("cannot narrow a word's alphabet");
  return Word(alphabet, letters_);
}

std::string Word::to_string() const {
  if (letters_.empty()) return "∅";
  std::string out;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(letters_[i]);
  }
  return out;
}

Word Word::parse(std::string_view text, int alphabet) {
  if (text.empty() || text == "∅" || text == "()" || text == "e") return Word(alphabet, {});
  std::vector<int> letters;
  std::string token;
  std::istringstream in{std::string(text)};
  while (std::getline(in, token, '.')) {
    if (token.empty()) throw std::invalid_argument("malformed word '" + std::string(text) + "'");
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed word '" + std::string(text) + "'");
    }
    if (used != token.size()) throw std::invalid_argument("malformed word '" + std::string(text) + "'");
    letters.push_back(v);
  }
  return Word(alphabet, std::move(letters));
}

std::strong_ordering operator<=>(const Word& a, const Word& b) {
  if (auto c = a.alphabet_ <=> b.alphabet_; c != 0) return c;
  if (auto c = a.letters_.size() <=> b.letters_.size(); c != 0) return c;
  return a.letters_ <=> b.letters_;
}

Word concat(const Word& a, const Word& b) {
  require_same_alphabet(a, b);
  std::vector<int> letters = a.letters();
  letters.insert(letters.end(), b.letters().begin(), b.letters().end());
  return Word(a.alphabet(), std::move(letters));
}

std::int64_t WordPolynomial::coefficient(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? 0 : it->second;
}

std::int64_t WordPolynomial::total_mass() const {
  std::int64_t s = 0;
  for (const auto& [w, c] : terms_) s += c;
  return s;
}

std::size_t WordPolynomial::max_length() const {
  std::size_t m = 0;
  for (const auto& [w, c] : terms_) m = std::max(m, w.size());
  return m;
}

void WordPolynomial::add(const Word& w, std::int64_t c) {
  if (w.alphabet() != alphabet_) throw std::invalid_argument("word alphabet mismatch in polynomial");
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(w, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

WordPolynomial& WordPolynomial::operator+=(const WordPolynomial& other) {
  for (const auto& [w, c] : other.terms_) add(w, c);
  return *this;
}

WordPolynomial shuffle(const Word& a, const Word& b) {
  require_same_alphabet(a, b);
  const std::size_t n = a.size(), m = b.size();
  // table[i][j] holds the shuffle of the suffixes a[i:] and b[j:], filled from the back.
  using Terms = std::map<std::vector<int>, std::int64_t>;
  std::vector<std::vector<Terms>> table(n + 1, std::vector<Terms>(m + 1));
  table[n][m][{}] = 1;
  for (std::size_t i = n + 1; i-- > 0;) {
    for (std::size_t j = m + 1; j-- > 0;) {
      if (i == n && j == m) continue;
      Terms& cell = table[i][j];
      auto prepend = [&cell](int letter, const Terms& rest) {
        for (const auto& [tail, c] : rest) {
          std::vector<int> w;
          w.reserve(tail.size() + 1);
          w.push_back(letter);
          w.insert(w.end(), tail.begin(), tail.end());
          cell[std::move(w)] += c;
        }
      };
      if (i < n) prepend(a[i], table[i + 1][j]);
      if (j < m) prepend(b[j], table[i][j + 1]);
    }
  }
  WordPolynomial out(a.alphabet());
  for (auto& [letters, c] : table[0][0]) out.add(Word(a.alphabet(), letters), c);
  return out;
}

WordPolynomial shuffle(const WordPolynomial& p, const WordPolynomial& q) {
  if (p.alphabet() != q.alphabet()) throw std::invalid_argument("polynomial alphabet mismatch");
  WordPolynomial out(p.alphabet());
  for (const auto& [u, cu] : p.terms())
    for (const auto& [v, cv] : q.terms()) {
      const WordPolynomial uv = shuffle(u, v);
      for (const auto& [w, c] : uv.terms()) out.add(w, cu * cv * c);
    }
  return out;
}

std::size_t level_size(int d, int k) {
  std::size_t s = 1;
  for (int i = 0; i < k; ++i) {
    if (s > kMaxLayout / static_cast<std::size_t>(d)) throw std::overflow_error("word layout too large");
    s *= static_cast<std::size_t>(d);
  }
  return s;
}

std::size_t level_offset(int d, int k) {
  std::size_t off = 0;
  for (int i = 0; i < k; ++i) {
    off += level_size(d, i);
    if (off > kMaxLayout) throw std::overflow_error("word layout too large");
  }
  return off;
}

std::size_t word_count(int d, int K) {
  if (d < 1 || K < 0) throw std::invalid_argument("word_count requires d >= 1 and K >= 0");
  return level_offset(d, K + 1);
}

WordLayout::WordLayout(int d, int K) : d_(d), K_(K) {
  words_.reserve(word_count(d, K));
  for (int k = 0; k <= K; ++k) {
    std::vector<int> letters(static_cast<std::size_t>(k), 1);
    const std::size_t n = level_size(d, k);
    for (std::size_t i = 0; i < n; ++i) {
      words_.emplace_back(d, letters);
      // odometer increment, last letter fastest
      for (int pos = k - 1; pos >= 0; --pos) {
        if (++letters[static_cast<std::size_t>(pos)] <= d) break;
        letters[static_cast<std::size_t>(pos)] = 1;
      }
    }
  }
}

std::size_t WordLayout::index(const Word& w) const {
  if (w.alphabet() != d_) throw std::invalid_argument("word alphabet does not match layout");
  if (static_cast<int>(w.size()) > K_)
    throw std::out_of_range("word " + w.to_string() + " exceeds truncation level " + std::to_string(K_));
  return word_index(w);
}

std::size_t word_index(const Word& w) {
  const int d = w.alphabet();
  std::size_t idx = 0;
  for (int l : w.letters()) idx = idx * static_cast<std::size_t>(d) + static_cast<std::size_t>(l - 1);
  return level_offset(d, static_cast<int>(w.size())) + idx;
}

}  // namespace esig
