#pragma once

// Subshifts of finite type: adjacency, admissible words, periodic words and
// eventually periodic symbolic points.
//
// Symbols are 0-based internally. Text and JSON forms are 1-based.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "subtherm/error.hpp"

namespace subtherm {

using Symbol = int;
using Word = std::vector<Symbol>;

class Subshift {
 public:
  Subshift() = default;

  /// Row-major q*q 0/1 adjacency. Throws on stranded symbols.
  Subshift(int q, std::vector<std::uint8_t> adjacency) : q_(q), adj_(std::move(adjacency)) {
    if (q_ < 1) fail(ErrorKind::InvalidArgument, "alphabet size must be positive");
    if (adj_.size() != static_cast<std::size_t>(q_) * q_)
      fail(ErrorKind::DimensionMismatch, "adjacency must be q x q");
    for (auto v : adj_)
      if (v > 1) fail(ErrorKind::InvalidArgument, "adjacency entries must be 0 or 1");
    for (int i = 0; i < q_; ++i) {
      bool row = false, col = false;
      for (int j = 0; j < q_; ++j) {
        row = row || allows(i, j);
        col = col || allows(j, i);
      }
      if (!row || !col)
        fail(ErrorKind::InvalidArgument, "symbol " + std::to_string(i + 1) + " has an empty row or column");
    }
  }

  static Subshift full(int q) { return Subshift(q, std::vector<std::uint8_t>(static_cast<std::size_t>(q) * q, 1)); }
  static Subshift golden_mean() { return Subshift(2, {1, 1, 1, 0}); }

  int q() const noexcept { return q_; }
  bool allows(Symbol a, Symbol b) const noexcept { return adj_[static_cast<std::size_t>(a) * q_ + b] != 0; }
  const std::vector<std::uint8_t>& adjacency() const noexcept { return adj_; }

  bool is_symbol(Symbol a) const noexcept { return a >= 0 && a < q_; }

  bool is_admissible(const Word& w) const noexcept {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!is_symbol(w[i])) return false;
      if (i > 0 && !allows(w[i - 1], w[i])) return false;
    }
    return true;
  }

  /// ww admissible: w closes up into a periodic orbit.
  bool is_periodic_admissible(const Word& w) const noexcept {
    return !w.empty() && is_admissible(w) && allows(w.back(), w.front());
  }

  void require_admissible(const Word& w, const char* what = "word") const {
    if (!is_admissible(w)) fail(ErrorKind::InadmissibleWord, std::string(what) + " is not admissible");
  }

  bool operator==(const Subshift&) const = default;

 private:
  int q_ = 0;
  std::vector<std::uint8_t> adj_;
};

/// Concatenation ab admissible at the junction (either side may be empty).
inline bool junction_ok(const Subshift& sub, const Word& a, const Word& b) {
  return a.empty() || b.empty() || sub.allows(a.back(), b.front());
}

inline Word concat(const Word& a, const Word& b) {
  Word out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline Word repeat(const Word& w, int times) {
  Word out;
  for (int i = 0; i < times; ++i) out.insert(out.end(), w.begin(), w.end());
  return out;
}

inline std::string word_to_string(const Word& w, int q = 9) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (q > 9 && i > 0) out += '-';
    out += std::to_string(w[i] + 1);
  }
  return out;
}

/// Inverse of word_to_string. Accepts "121" for q <= 9 and "1-2-10" otherwise.
inline Word word_from_string(const std::string& text) {
  Word out;
  if (text.find('-') != std::string::npos) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto next = text.find('-', pos);
      if (next == std::string::npos) next = text.size();
      const auto token = text.substr(pos, next - pos);
      if (token.empty()) fail(ErrorKind::SchemaError, "empty symbol in word '" + text + "'");
      out.push_back(std::stoi(token) - 1);
      pos = next + 1;
    }
  } else {
    for (char c : text) {
      if (c < '1' || c > '9') fail(ErrorKind::SchemaError, "bad symbol in word '" + text + "'");
      out.push_back(c - '1');
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Primitivity and counting

struct PrimitivityVerdict {
  bool primitive = false;
  int exponent = 0;  ///< smallest N with T^N > 0, valid when primitive
};

inline PrimitivityVerdict is_primitive(const Subshift& sub) {
  const int q = sub.q();
  std::vector<std::uint8_t> power = sub.adjacency();
  for (int n = 1; n <= q * q; ++n) {
    if (std::all_of(power.begin(), power.end(), [](auto v) { return v != 0; })) return {true, n};
    std::vector<std::uint8_t> next(power.size(), 0);
    for (int i = 0; i < q; ++i)
      for (int k = 0; k < q; ++k)
        if (power[static_cast<std::size_t>(i) * q + k])
          for (int j = 0; j < q; ++j)
            if (sub.allows(k, j)) next[static_cast<std::size_t>(i) * q + j] = 1;
    power = std::move(next);
  }
  return {false, 0};
}

inline void require_primitive(const Subshift& sub) {
  if (!is_primitive(sub).primitive) fail(ErrorKind::NotPrimitive, "adjacency matrix is not primitive");
}

/// |L(n)| = sum of the entries of T^{n-1}. Exact while below 2^53.
inline double count_words(const Subshift& sub, int n) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "word length must be positive");
  const int q = sub.q();
  std::vector<double> ending(q, 1.0);
  for (int step = 1; step < n; ++step) {
    std::vector<double> next(q, 0.0);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        if (sub.allows(i, j)) next[j] += ending[i];
    ending = std::move(next);
  }
  return std::accumulate(ending.begin(), ending.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Enumeration

/// Streaming depth-first enumeration of L(n) (optionally below a fixed prefix)
/// in lexicographic order.
class WordEnumerator {
 public:
  WordEnumerator(const Subshift& sub, int n, Word prefix = {}) : sub_(&sub), n_(n), fixed_(prefix.size()) {
    if (n < 1) fail(ErrorKind::InvalidArgument, "word length must be positive");
    if (prefix.size() > static_cast<std::size_t>(n)) fail(ErrorKind::InvalidArgument, "prefix longer than n");
    if (!sub.is_admissible(prefix)) fail(ErrorKind::InadmissibleWord, "prefix is not admissible");
    word_ = std::move(prefix);
    fresh_ = true;
  }

  /// Advances to the next word; returns false once exhausted.
  bool next() {
    if (done_) return false;
    if (fresh_) {
      fresh_ = false;
      if (fill_from(word_.size())) return true;
      backtrack();
      return !done_;
    }
    backtrack();
    return !done_;
  }

  const Word& word() const noexcept { return word_; }

  class iterator {
   public:
    using value_type = Word;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    explicit iterator(WordEnumerator* e) : e_(e) { advance(); }
    const Word& operator*() const { return e_->word(); }
    iterator& operator++() {
      advance();
      return *this;
    }
    void operator++(int) { advance(); }
    bool operator==(std::default_sentinel_t) const { return e_ == nullptr; }

   private:
    void advance() {
      if (e_ != nullptr && !e_->next()) e_ = nullptr;
    }
    WordEnumerator* e_ = nullptr;
  };

  iterator begin() { return iterator(this); }
  std::default_sentinel_t end() { return {}; }

 private:
  // Extends word_ (of length `from`) to length n with smallest choices.
  bool fill_from(std::size_t from) {
    word_.resize(from);
    while (word_.size() < static_cast<std::size_t>(n_)) {
      Symbol s = first_after(-1);
      if (s < 0) return false;
      word_.push_back(s);
    }
    return true;
  }

  Symbol first_after(Symbol current) const {
    for (Symbol s = current + 1; s < sub_->q(); ++s)
      if (word_.empty() || sub_->allows(word_.back(), s)) return s;
    return -1;
  }

  void backtrack() {
    while (word_.size() > fixed_) {
      const Symbol last = word_.back();
      word_.pop_back();
      const Symbol s = first_after(last);
      if (s >= 0) {
        word_.push_back(s);
        if (fill_from(word_.size())) return;
        // Dead end (cannot happen without stranded symbols); keep backtracking.
      }
    }
    done_ = true;
  }

  const Subshift* sub_;
  int n_;
  std::size_t fixed_;
  Word word_;
  bool fresh_ = false;
  bool done_ = false;
};

inline WordEnumerator enumerate_words(const Subshift& sub, int n) { return WordEnumerator(sub, n); }

inline std::vector<Word> collect_words(const Subshift& sub, int n) {
  std::vector<Word> out;
  for (const auto& w : WordEnumerator(sub, n)) out.push_back(w);
  return out;
}

/// Depth-first walk over all admissible extensions of `prefix` to length n,
/// threading an incremental state along the path. `extend(prev, symbol, out)`
/// writes the state of prev·symbol into `out`; `leaf(word, state)` sees each
/// complete word once, in lexicographic order.
template <class State, class Extend, class Leaf>
void walk_words(const Subshift& sub, int n, const Word& prefix, const State& prefix_state, Extend&& extend,
                Leaf&& leaf) {
  const std::size_t base = prefix.size();
  if (base > static_cast<std::size_t>(n)) fail(ErrorKind::InvalidArgument, "prefix longer than n");
  if (base == static_cast<std::size_t>(n)) {
    leaf(prefix, prefix_state);
    return;
  }
  std::vector<State> states(static_cast<std::size_t>(n) + 1 - base, prefix_state);
  Word word = prefix;
  word.resize(static_cast<std::size_t>(n));
  std::vector<Symbol> next_symbol(static_cast<std::size_t>(n), 0);
  std::size_t depth = base;  // number of fixed symbols
  next_symbol[depth] = 0;
  while (true) {
    if (depth == static_cast<std::size_t>(n)) {
      leaf(word, states[depth - base]);
      --depth;
      continue;
    }
    Symbol s = next_symbol[depth];
    while (s < sub.q() && depth > 0 && !sub.allows(word[depth - 1], s)) ++s;
    if (s >= sub.q()) {
      if (depth == base) return;
      --depth;
      continue;
    }
    next_symbol[depth] = s + 1;
    word[depth] = s;
    extend(states[depth - base], s, states[depth + 1 - base]);
    ++depth;
    if (depth < static_cast<std::size_t>(n)) next_symbol[depth] = 0;
  }
}

/// Admissible prefixes of a fixed length, used to split work over disjoint
/// word ranges. The split depends only on (sub, n, min_parts).
inline std::vector<Word> partition_prefixes(const Subshift& sub, int n, std::size_t min_parts) {
  int len = 1;
  while (len < n && count_words(sub, len) < static_cast<double>(min_parts)) ++len;
  return collect_words(sub, std::min(len, n));
}

// ---------------------------------------------------------------------------
// Periodic words

/// Lyndon-style representatives: w with ww admissible, w not a proper power,
/// w the lexicographically smallest rotation. Sorted by length then lex.
inline std::vector<Word> periodic_words(const Subshift& sub, int up_to) {
  if (up_to < 1) fail(ErrorKind::InvalidArgument, "up_to must be positive");
  std::vector<Word> out;
  for (int n = 1; n <= up_to; ++n) {
    for (const auto& w : WordEnumerator(sub, n)) {
      if (!sub.allows(w.back(), w.front())) continue;
      bool minimal = true, primitive_word = true;
      for (int r = 1; r < n && minimal; ++r) {
        Word rot(w.begin() + r, w.end());
        rot.insert(rot.end(), w.begin(), w.begin() + r);
        if (rot < w) minimal = false;
        if (rot == w) primitive_word = false;
      }
      if (minimal && primitive_word) out.push_back(w);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symbolic points

/// Eventually periodic two-sided sequence ...past past core future future...
/// `phase` is the coordinate of core[0] (or of the first future symbol when
/// the core is empty).
struct SymbolicPoint {
  Word past;
  Word core;
  Word future;
  long phase = 0;

  static SymbolicPoint periodic(const Word& w) { return SymbolicPoint{w, {}, w, 0}; }

  Symbol at(long i) const {
    const long j = i - phase;
    const long c = static_cast<long>(core.size());
    if (j >= 0 && j < c) return core[static_cast<std::size_t>(j)];
    if (j >= c) return future[static_cast<std::size_t>((j - c) % static_cast<long>(future.size()))];
    const long p = static_cast<long>(past.size());
    return past[static_cast<std::size_t>(p - 1 - ((-j - 1) % p))];
  }

  /// Coordinates >= future_start() lie in the periodic future.
  long future_start() const { return phase + static_cast<long>(core.size()); }
  /// Coordinates < past_end() lie in the periodic past.
  long past_end() const { return phase; }

  /// sigma^n applied to the point.
  SymbolicPoint shifted(long n) const {
    SymbolicPoint out = *this;
    out.phase -= n;
    return out;
  }

  /// Symbols at coordinates [from, from + len).
  Word window(long from, long len) const {
    Word out;
    out.reserve(static_cast<std::size_t>(std::max(0L, len)));
    for (long i = 0; i < len; ++i) out.push_back(at(from + i));
    return out;
  }

  bool is_valid(const Subshift& sub) const {
    if (past.empty() || future.empty()) return false;
    if (!sub.is_periodic_admissible(past) || !sub.is_periodic_admissible(future)) return false;
    const Word link = concat(concat(Word{past.back()}, core), Word{future.front()});
    return sub.is_admissible(link);
  }

  bool operator==(const SymbolicPoint&) const = default;
};

/// z = p^inf . insertion . p^inf with coordinate 0 at the start of the insertion.
inline SymbolicPoint homoclinic_point(const Subshift& sub, const Word& p_word, const Word& insertion) {
  if (!sub.is_periodic_admissible(p_word))
    fail(ErrorKind::NotPeriodic, "periodic word " + word_to_string(p_word) + " does not close up");
  if (insertion.empty() || insertion.size() % p_word.size() != 0)
    fail(ErrorKind::InvalidArgument, "insertion length must be a positive multiple of the period");
  if (!sub.is_admissible(concat(concat(p_word, insertion), p_word)))
    fail(ErrorKind::InadmissibleJunction, "p.insertion.p is not admissible");
  if (insertion == repeat(p_word, static_cast<int>(insertion.size() / p_word.size())))
    fail(ErrorKind::TrivialHomoclinic, "insertion is a power of the periodic word");
  return SymbolicPoint{p_word, insertion, p_word, 0};
}

}  // namespace subtherm
