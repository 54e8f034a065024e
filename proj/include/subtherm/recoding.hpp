#pragma once

// Block recodings of a subshift: the n-step system (blocks of L(n) glued by
// concatenation, the dynamics of sigma^n) and the higher block presentation
// (blocks glued by (n-1)-overlap, which turns n-step generators into one-step
// ones). Also lifts symbolic points into the n-step system.

#include <map>

#include "subtherm/cocycle.hpp"
#include "subtherm/sft.hpp"

namespace subtherm {

enum class BlockAdjacency {
  Concatenate,  ///< I -> J iff IJ admissible (sigma^n acting on blocks)
  Overlap,      ///< I -> J iff I[1..n) = J[0..n-1) (higher block shift)
};

struct BlockSystem {
  Subshift sub;
  std::vector<Word> blocks;  ///< lexicographic; block symbol i is blocks[i]
  int n = 1;
  BlockAdjacency kind = BlockAdjacency::Concatenate;

  Symbol index(const Word& block) const {
    const auto it = std::lower_bound(blocks.begin(), blocks.end(), block);
    if (it == blocks.end() || *it != block)
      fail(ErrorKind::InadmissibleWord, "block " + word_to_string(block) + " is not in the block alphabet");
    return static_cast<Symbol>(it - blocks.begin());
  }

  /// Original word spelled by a word over the block alphabet.
  Word expand(const Word& block_word) const {
    Word out;
    for (Symbol b : block_word) {
      const Word& blk = blocks.at(static_cast<std::size_t>(b));
      if (kind == BlockAdjacency::Concatenate || out.empty())
        out.insert(out.end(), blk.begin(), blk.end());
      else
        out.push_back(blk.back());
    }
    return out;
  }
};

inline BlockSystem block_system(const Subshift& sub, int n, BlockAdjacency kind) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "block length must be positive");
  BlockSystem out;
  out.n = n;
  out.kind = kind;
  out.blocks = collect_words(sub, n);
  const auto q = out.blocks.size();
  std::vector<std::uint8_t> adj(q * q, 0);
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = 0; j < q; ++j) {
      const Word& a = out.blocks[i];
      const Word& b = out.blocks[j];
      bool ok = false;
      if (kind == BlockAdjacency::Concatenate)
        ok = sub.allows(a.back(), b.front());
      else
        ok = std::equal(a.begin() + 1, a.end(), b.begin());
      adj[i * q + j] = ok ? 1 : 0;
    }
  out.sub = Subshift(static_cast<int>(q), std::move(adj));
  return out;
}

/// Generators A(I) per block for the n-step system: the cocycle A^n over sigma^n.
inline Cocycle power_cocycle(const BlockSystem& sys, const Cocycle& cocycle) {
  if (sys.kind != BlockAdjacency::Concatenate) fail(ErrorKind::InvalidArgument, "power cocycle needs the n-step system");
  std::vector<Matrix> gens;
  for (const auto& b : sys.blocks) gens.push_back(word_product(cocycle, b));
  return Cocycle(std::move(gens), cocycle.s());
}

/// A cocycle reading x_0 x_1 becomes one-step on the 2-block presentation:
/// block (a, b) carries A(ab).
inline std::pair<BlockSystem, Cocycle> recode_two_step(const Subshift& sub, const std::map<Word, Matrix>& by_pair,
                                                       double s) {
  auto sys = block_system(sub, 2, BlockAdjacency::Overlap);
  std::vector<Matrix> gens;
  for (const auto& b : sys.blocks) {
    const auto it = by_pair.find(b);
    if (it == by_pair.end())
      fail(ErrorKind::InvalidArgument, "two-step generator missing for pair " + word_to_string(b));
    gens.push_back(it->second);
  }
  return {std::move(sys), Cocycle(std::move(gens), s)};
}

namespace detail {

inline long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
inline long ceil_div(long a, long b) { return -floor_div(-a, b); }

}  // namespace detail

/// The point x seen in the n-step system: block i is x[n i, n i + n).
inline SymbolicPoint lift_point(const BlockSystem& sys, const SymbolicPoint& x) {
  if (sys.kind != BlockAdjacency::Concatenate) fail(ErrorKind::InvalidArgument, "lifting needs the n-step system");
  const long n = sys.n;
  const long i0 = detail::floor_div(x.past_end(), n);
  const long i1 = detail::ceil_div(x.future_start(), n);
  const long pp = static_cast<long>(x.past.size());
  const long pf = static_cast<long>(x.future.size());
  auto block_at = [&](long i) { return sys.index(x.window(n * i, n)); };
  SymbolicPoint out;
  for (long i = i0 - pp; i < i0; ++i) out.past.push_back(block_at(i));
  for (long i = i0; i < i1; ++i) out.core.push_back(block_at(i));
  for (long i = i1; i < i1 + pf; ++i) out.future.push_back(block_at(i));
  out.phase = i0;
  return out;
}

}  // namespace subtherm
