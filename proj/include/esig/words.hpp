#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace esig {

/// Multi-index over the alphabet {1, ..., d}. Addresses one signature coefficient.
///
/// Words are ordered by length first and lexicographically within a length, which
/// is the same order used by the flat tensor layout.
class Word {
 public:
  Word() = default;
  Word(int alphabet, std::vector<int> letters);

  static Word empty(int alphabet) { return Word(alphabet, {}); }

  int alphabet() const { return alphabet_; }
  std::size_t size() const { return letters_.size(); }
  bool is_empty() const { return letters_.empty(); }
  const std::vector<int>& letters() const { return letters_; }
  int operator[](std::size_t i) const { return letters_[i]; }
  int back() const { return letters_.back(); }

  /// The word with the last `n` letters removed (I_{-1}, I_{-2}, ...).
  Word drop_last(std::size_t n = 1) const;

  /// Same letters over a larger alphabet.
  Word widen(int alphabet) const;

  /// "1.2.2"; the empty word is "∅".
  std::string to_string() const;
  static Word parse(std::string_view text, int alphabet);

  friend bool operator==(const Word& a, const Word& b) = default;
  friend std::strong_ordering operator<=>(const Word& a, const Word& b);

 private:
  int alphabet_ = 1;
  std::vector<int> letters_;
};

Word concat(const Word& a, const Word& b);

/// Integer linear combination of words over one alphabet; zero terms are never stored.
class WordPolynomial {
 public:
  explicit WordPolynomial(int alphabet) : alphabet_(alphabet) {}

  int alphabet() const { return alphabet_; }
  const std::map<Word, std::int64_t>& terms() const { return terms_; }
  std::int64_t coefficient(const Word& w) const;
  std::int64_t total_mass() const;
  std::size_t max_length() const;

  void add(const Word& w, std::int64_t c);
  WordPolynomial& operator+=(const WordPolynomial& other);

  friend bool operator==(const WordPolynomial&, const WordPolynomial&) = default;

 private:
  int alphabet_;
  std::map<Word, std::int64_t> terms_;
};

/// All interleavings of a and b counted with multiplicity.
WordPolynomial shuffle(const Word& a, const Word& b);
WordPolynomial shuffle(const WordPolynomial& p, const WordPolynomial& q);

/// Number of words of length exactly k over d letters.
std::size_t level_size(int d, int k);
/// Flat index of the first word of length k.
std::size_t level_offset(int d, int k);
/// Number of words of length <= K.
std::size_t word_count(int d, int K);

/// Deterministic enumeration of all words of length <= K: by length, then lexicographic.
class WordLayout {
 public:
  WordLayout(int d, int K);

  int alphabet() const { return d_; }
  int depth() const { return K_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<Word>& words() const { return words_; }
  const Word& word(std::size_t index) const { return words_.at(index); }
  std::size_t index(const Word& w) const;

 private:
  int d_;
  int K_;
  std::vector<Word> words_;
};

/// Flat index of w inside a (d, K) layout, without materialising the layout.
std::size_t word_index(const Word& w);

}  // namespace esig
