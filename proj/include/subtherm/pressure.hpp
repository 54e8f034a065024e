#pragma once

// Certified two-sided bounds on the subadditive pressure P(Phi).
//
// Upper bounds come from Fekete: Z_{m+n} <= Z_m Z_n, so every (1/n) log Z_n
// bounds P from above. Lower bounds come from periodic orbits (eigenvalue
// growth, entropy ignored) and from chaining words through a
// quasi-multiplicativity certificate.

#include <algorithm>
#include <atomic>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "subtherm/potential.hpp"
#include "subtherm/sft.hpp"

namespace subtherm {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

namespace detail {

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
/// processed exactly once and results are written by index, so the caller's
/// reduction order does not depend on the thread count.
template <class Fn>
void parallel_for_index(std::size_t count, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

template <WordPotential P>
void require_matching_alphabet(const Subshift& sub, const P& pot) {
  if (pot.alphabet_size() != sub.q())
    fail(ErrorKind::DimensionMismatch, "potential alphabet does not match the subshift");
}

/// log Z_n = log sum over L(n) of Phi~(I), accumulated in log space. The word
/// space is split by fixed-length prefixes and reduced in prefix order.
template <WordPotential P>
double log_partition_sum(const Subshift& sub, const P& pot, int n, int threads = 1) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "word length must be positive");
  require_matching_alphabet(sub, pot);
  const auto prefixes = partition_prefixes(sub, n, 64);
  std::vector<LogSumExp> parts(prefixes.size());
  detail::parallel_for_index(prefixes.size(), threads, [&](std::size_t i) {
    const auto root = word_state(pot, prefixes[i]);
    LogSumExp acc;
    walk_words(
        sub, n, prefixes[i], root, [&](const auto& prev, Symbol s, auto& out) { pot.extend(prev, s, out); },
        [&](const Word&, const auto& st) { acc.add(pot.log_value(st)); });
    parts[i] = acc;
  });
  LogSumExp total;
  for (const auto& part : parts) total.merge(part);
  return total.log();
}

inline double log_partition_sum(const Subshift& sub, const Cocycle& cocycle, int n, int threads = 1) {
  return log_partition_sum(sub, SingularValuePotential(cocycle), n, threads);
}

struct UpperBound {
  double value = std::numeric_limits<double>::infinity();
  int n = 0;  ///< length achieving the minimum
  std::vector<std::pair<int, double>> per_length;  ///< (n, (1/n) log Z_n)
};

template <WordPotential P>
UpperBound pressure_upper(const Subshift& sub, const P& pot, const std::vector<int>& lengths, int threads = 1) {
  if (lengths.empty()) fail(ErrorKind::InvalidArgument, "length list must be nonempty");
  UpperBound out;
  for (int n : lengths) {
    const double v = log_partition_sum(sub, pot, n, threads) / n;
    out.per_length.emplace_back(n, v);
    if (v < out.value) {
      out.value = v;
      out.n = n;
    }
  }
  return out;
}

inline UpperBound pressure_upper(const Subshift& sub, const Cocycle& cocycle, const std::vector<int>& lengths,
                                 int threads = 1) {
  return pressure_upper(sub, SingularValuePotential(cocycle), lengths, threads);
}

struct PeriodicLowerBound {
  double value = kNegInf;
  Word witness;
};

/// max over periodic words w, |w| <= period_bound, of (1/|w|) log phi^s_eig(A(w)).
template <WordPotential P>
PeriodicLowerBound pressure_lower_periodic(const Subshift& sub, const P& pot, int period_bound) {
  if (period_bound < 1) fail(ErrorKind::InvalidArgument, "period bound must be positive");
  require_matching_alphabet(sub, pot);
  PeriodicLowerBound out;
  for (const auto& w : periodic_words(sub, period_bound)) {
    const double v = pot.log_value_periodic(word_state(pot, w)) / static_cast<double>(w.size());
    if (v > out.value) {
      out.value = v;
      out.witness = w;
    }
  }
  return out;
}

inline PeriodicLowerBound pressure_lower_periodic(const Subshift& sub, const Cocycle& cocycle, int period_bound) {
  return pressure_lower_periodic(sub, SingularValuePotential(cocycle), period_bound);
}

// ---------------------------------------------------------------------------
// Quasi-multiplicativity

/// Empirical certificate: for all tested I, J with |I|, |J| <= n_max some
/// connector K, |K| <= k, gives Phi~(IKJ) >= c Phi~(I) Phi~(J).
struct QmCertificate {
  double c = 1.0;
  double log_c = 0.0;
  int k = 0;
  int n_max = 0;
  int k_max = 0;
  Word worst_i;
  Word worst_j;
  Word worst_connector;
};

/// Number of ratio evaluations qm_search performs.
inline double qm_work(const Subshift& sub, int n_max, int k_max) {
  double words = 0.0, connectors = 1.0;
  for (int n = 1; n <= n_max; ++n) words += count_words(sub, n);
  for (int n = 1; n <= k_max; ++n) connectors += count_words(sub, n);
  return words * words * connectors;
}

/// Exhaustive pair/connector search. Connectors are scanned shortest first,
/// then lexicographically, and the first maximizer is recorded.
template <WordPotential P>
QmCertificate qm_search(const Subshift& sub, const P& pot, int n_max, int k_max) {
  if (n_max < 1 || k_max < 0) fail(ErrorKind::InvalidArgument, "qm_search needs n_max >= 1 and k_max >= 0");
  require_matching_alphabet(sub, pot);
  using State = typename P::State;

  std::vector<Word> words;
  for (int n = 1; n <= n_max; ++n)
    for (const auto& w : WordEnumerator(sub, n)) words.push_back(w);
  std::vector<Word> connectors{Word{}};
  for (int n = 1; n <= k_max; ++n)
    for (const auto& w : WordEnumerator(sub, n)) connectors.push_back(w);

  std::vector<State> word_states, conn_states;
  std::vector<double> word_logs;
  for (const auto& w : words) {
    word_states.push_back(word_state(pot, w));
    word_logs.push_back(pot.log_value(word_states.back()));
  }
  for (const auto& k : connectors) conn_states.push_back(word_state(pot, k));

  const std::size_t nw = words.size();
  const auto levels = static_cast<std::size_t>(k_max) + 1;
  // best[(pair)*levels + len] = best log ratio using connectors of exactly len.
  std::vector<double> best(nw * nw * levels, kNegInf);
  std::vector<int> best_conn(nw * nw * levels, -1);

  State ik = pot.empty_state(), ikj = pot.empty_state();
  for (std::size_t i = 0; i < nw; ++i) {
    for (std::size_t c = 0; c < connectors.size(); ++c) {
      const Word& conn = connectors[c];
      if (!junction_ok(sub, words[i], conn)) continue;
      pot.concat(word_states[i], conn_states[c], ik);
      const Word& left = conn.empty() ? words[i] : conn;
      for (std::size_t j = 0; j < nw; ++j) {
        if (!sub.allows(left.back(), words[j].front())) continue;
        pot.concat(ik, word_states[j], ikj);
        const double ratio = pot.log_value(ikj) - word_logs[i] - word_logs[j];
        const std::size_t slot = (i * nw + j) * levels + conn.size();
        if (ratio > best[slot]) {
          best[slot] = ratio;
          best_conn[slot] = static_cast<int>(c);
        }
      }
    }
  }

  // Prefix maxima over connector length; c = min(1, min over pairs).
  double log_c = 0.0;
  std::size_t worst = 0;
  std::vector<double> upto(nw * nw * levels, kNegInf);
  for (std::size_t pair = 0; pair < nw * nw; ++pair) {
    double running = kNegInf;
    for (std::size_t len = 0; len < levels; ++len) {
      running = std::max(running, best[pair * levels + len]);
      upto[pair * levels + len] = running;
    }
    if (running == kNegInf)
      fail(ErrorKind::NoConnector, "no admissible connector of length <= " + std::to_string(k_max) + " for I=" +
                                       word_to_string(words[pair / nw], sub.q()) +
                                       " J=" + word_to_string(words[pair % nw], sub.q()));
    if (running < log_c) {
      log_c = running;
      worst = pair;
    }
  }
  int k = 0;
  for (; k < k_max; ++k) {
    bool enough = true;
    for (std::size_t pair = 0; pair < nw * nw && enough; ++pair)
      enough = upto[pair * levels + static_cast<std::size_t>(k)] >= log_c - 1e-12;
    if (enough) break;
  }

  QmCertificate out;
  out.log_c = log_c;
  out.c = std::exp(log_c);
  out.k = k;
  out.n_max = n_max;
  out.k_max = k_max;
  out.worst_i = words[worst / nw];
  out.worst_j = words[worst % nw];
  double chosen = kNegInf;
  for (int len = 0; len <= k; ++len) {
    const std::size_t slot = worst * levels + static_cast<std::size_t>(len);
    if (best[slot] > chosen) {
      chosen = best[slot];
      out.worst_connector = connectors[static_cast<std::size_t>(best_conn[slot])];
    }
  }
  return out;
}

inline QmCertificate qm_search(const Subshift& sub, const Cocycle& cocycle, int n_max, int k_max) {
  return qm_search(sub, SingularValuePotential(cocycle), n_max, k_max);
}

struct ChainedLowerBound {
  double value = kNegInf;
  int n = 0;
  Word best_word;  ///< I* (best-word variant)
  bool chain_sum = false;
};

/// Lower bound from chaining length-n words through the certificate:
///   best word: (log Phi~(I*) + log c + k min(0, g)) / (n + k)
///   chain sum: (log Z_n + log c - log(k+1) + k min(0, g)) / (n + k)
/// where g is the potential's per-symbol padding gain.
template <WordPotential P>
ChainedLowerBound pressure_lower_chained(const Subshift& sub, const P& pot, const QmCertificate& qm, int n,
                                         bool chain_sum = false, int threads = 1) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "word length must be positive");
  if (n > qm.n_max)
    fail(ErrorKind::MissingCertificate,
         "certificate covers lengths <= " + std::to_string(qm.n_max) + ", requested " + std::to_string(n));
  require_matching_alphabet(sub, pot);
  const double pad = static_cast<double>(qm.k) * std::min(0.0, pot.min_step_log_gain());
  ChainedLowerBound out;
  out.n = n;
  out.chain_sum = chain_sum;
  if (chain_sum) {
    const double log_z = log_partition_sum(sub, pot, n, threads);
    out.value = (log_z + qm.log_c - std::log(qm.k + 1.0) + pad) / (n + qm.k);
    return out;
  }
  double best = kNegInf;
  walk_words(
      sub, n, Word{}, pot.empty_state(), [&](const auto& prev, Symbol s, auto& o) { pot.extend(prev, s, o); },
      [&](const Word& w, const auto& st) {
        const double v = pot.log_value(st);
        if (v > best) {
          best = v;
          out.best_word = w;
        }
      });
  out.value = (best + qm.log_c + pad) / (n + qm.k);
  return out;
}

// ---------------------------------------------------------------------------
// Orchestration

struct PressureOptions {
  double budget = 1e6;     ///< max words enumerated by the upper-bound schedule
  int period_bound = 12;   ///< cap on periodic-orbit witness length
  int qm_n_max = 4;
  int qm_k_max = 2;
  bool chain_sum = false;
  int threads = 1;
};

enum class LowerSource { Periodic, Chained };

struct PressureEstimate {
  double lower = kNegInf;
  double upper = std::numeric_limits<double>::infinity();
  int n_upper = 0;
  double s = 0.0;
  std::string witness;
  LowerSource source = LowerSource::Periodic;
  /// The chained bound is only as good as the finite qm certificate.
  bool rigorous_modulo_certificate = false;
  UpperBound upper_detail;
  PeriodicLowerBound periodic;
  int period_bound_used = 0;
  std::optional<ChainedLowerBound> chained;
  std::optional<QmCertificate> qm;
  std::string qm_failure;
  std::string note;

  double midpoint() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
  bool contains(double x, double slack = 0.0) const { return lower - slack <= x && x <= upper + slack; }
};

/// Upper-bound schedule n = 1, 2, 4, ... within the word budget, plus the
/// longest length the remaining budget still affords.
inline std::vector<int> upper_schedule(const Subshift& sub, double budget) {
  std::vector<int> out;
  double used = 0.0;
  for (int n = 1; n <= 1 << 20; n *= 2) {
    const double c = count_words(sub, n);
    if (used + c > budget) break;
    used += c;
    out.push_back(n);
  }
  if (out.empty()) out.push_back(1);
  int tail = out.back();
  while (count_words(sub, tail + 1) <= budget - used) ++tail;
  if (tail > out.back()) out.push_back(tail);
  return out;
}

template <WordPotential P>
PressureEstimate pressure_estimate(const Subshift& sub, const P& pot, const PressureOptions& opt = {}) {
  require_matching_alphabet(sub, pot);
  if (!(opt.budget >= 1.0)) fail(ErrorKind::InvalidArgument, "budget must be >= 1");
  PressureEstimate est;
  est.s = pot.exponent();

  est.upper_detail = pressure_upper(sub, pot, upper_schedule(sub, opt.budget), opt.threads);
  est.upper = est.upper_detail.value;
  est.n_upper = est.upper_detail.n;

  int period_bound = 1;
  double used = count_words(sub, 1);
  while (period_bound < opt.period_bound && used + count_words(sub, period_bound + 1) <= opt.budget) {
    ++period_bound;
    used += count_words(sub, period_bound);
  }
  est.period_bound_used = period_bound;
  est.periodic = pressure_lower_periodic(sub, pot, period_bound);
  est.lower = est.periodic.value;
  est.source = LowerSource::Periodic;
  est.witness = "periodic orbit " + word_to_string(est.periodic.witness, sub.q());

  int qm_n = 0;
  while (qm_n < opt.qm_n_max && qm_work(sub, qm_n + 1, opt.qm_k_max) <= opt.budget) ++qm_n;
  if (qm_n >= 1) {
    try {
      est.qm = qm_search(sub, pot, qm_n, opt.qm_k_max);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoConnector) throw;
      est.qm_failure = e.what();
    }
  } else {
    est.qm_failure = "budget too small for a quasi-multiplicativity search";
  }
  if (est.qm) {
    for (int n = 1; n <= est.qm->n_max; ++n) {
      auto ch = pressure_lower_chained(sub, pot, *est.qm, n, opt.chain_sum, opt.threads);
      if (!est.chained || ch.value > est.chained->value) est.chained = ch;
    }
    if (est.chained->value > est.upper + 1e-12) {
      est.note = "chained bound exceeded the upper bound and was discarded";
    } else if (est.chained->value > est.lower) {
      est.lower = est.chained->value;
      est.source = LowerSource::Chained;
      est.rigorous_modulo_certificate = true;
      std::ostringstream w;
      w << (opt.chain_sum ? "chain-sum" : "chained word " + word_to_string(est.chained->best_word, sub.q()))
        << " at n=" << est.chained->n << " (c=" << est.qm->c << ", k=" << est.qm->k
        << ", certificate n_max=" << est.qm->n_max << ")";
      est.witness = w.str();
    }
  }
  return est;
}

inline PressureEstimate pressure_estimate(const Subshift& sub, const Cocycle& cocycle,
                                          const PressureOptions& opt = {}) {
  return pressure_estimate(sub, SingularValuePotential(cocycle), opt);
}

}  // namespace subtherm
