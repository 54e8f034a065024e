#pragma once

// Empirical Gibbs cylinder tables w(I) = Phi~(I) / Z_n, their invariance and
// Gibbs-ratio diagnostics, correlations, and numerical checks of
// P(Psi) = 2 P(Phi) and P(Phi_{A^n}) = n P(Phi_A).

#include <map>
#include <string>

#include "subtherm/pressure.hpp"
#include "subtherm/recoding.hpp"

namespace subtherm {

struct CylinderTable {
  int n = 0;
  int q = 0;
  double p_hat = 0.0;
  double log_z = 0.0;
  std::map<Word, double> weights;

  double weight(const Word& w) const {
    const auto it = weights.find(w);
    return it == weights.end() ? 0.0 : it->second;
  }
  double total() const {
    double t = 0.0;
    for (const auto& [w, v] : weights) t += v;
    return t;
  }
};

/// weights(I) = Phi~(I) / Z_n over L(n). p_hat is carried for the ratio scan.
template <WordPotential P>
CylinderTable empirical_equilibrium(const Subshift& sub, const P& pot, int n, double p_hat) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "table length must be positive");
  require_matching_alphabet(sub, pot);
  std::vector<std::pair<Word, double>> logs;
  LogSumExp acc;
  walk_words(
      sub, n, Word{}, pot.empty_state(), [&](const auto& prev, Symbol s, auto& out) { pot.extend(prev, s, out); },
      [&](const Word& w, const auto& st) {
        const double v = pot.log_value(st);
        logs.emplace_back(w, v);
        acc.add(v);
      });
  CylinderTable out;
  out.n = n;
  out.q = sub.q();
  out.p_hat = p_hat;
  out.log_z = acc.log();
  for (auto& [w, v] : logs) out.weights.emplace_hint(out.weights.end(), std::move(w), std::exp(v - out.log_z));
  return out;
}

inline CylinderTable empirical_equilibrium(const Subshift& sub, const Cocycle& cocycle, int n, double p_hat) {
  return empirical_equilibrium(sub, SingularValuePotential(cocycle), n, p_hat);
}

/// max over J in L(n-1) of |sum_i w(iJ) - sum_j w(Jj)|.
inline double shift_invariance_defect(const CylinderTable& table) {
  if (table.n < 2) fail(ErrorKind::InvalidArgument, "invariance defect needs n >= 2");
  std::map<Word, double> left, right;  // marginals dropping the first / last symbol
  for (const auto& [w, v] : table.weights) {
    left[Word(w.begin() + 1, w.end())] += v;
    right[Word(w.begin(), w.end() - 1)] += v;
  }
  double worst = 0.0;
  for (const auto& [j, v] : left) {
    const auto it = right.find(j);
    worst = std::max(worst, std::abs(v - (it == right.end() ? 0.0 : it->second)));
  }
  for (const auto& [j, v] : right)
    if (!left.count(j)) worst = std::max(worst, v);
  return worst;
}

struct GibbsScan {
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  double c_hat = 1.0;          ///< max(max_ratio, 1 / min_ratio)
  double drift_slope = 0.0;    ///< least-squares slope of log ratio against n
  std::vector<std::pair<int, double>> log_ratio_by_n;  ///< mean log ratio for each n
};

/// ratio(I) = weights(I) / (exp(-n p_hat) Phi~(I)) over the given tables.
template <WordPotential P>
GibbsScan gibbs_ratio_scan(const P& pot, const std::vector<CylinderTable>& tables, double p_hat) {
  if (tables.empty()) fail(ErrorKind::InvalidArgument, "gibbs_ratio_scan needs at least one table");
  GibbsScan out;
  for (const auto& t : tables) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (const auto& [w, v] : t.weights) {
      if (v <= 0.0) continue;
      const double lr = std::log(v) + t.n * p_hat - log_potential(pot, w);
      lo = std::min(lo, lr);
      hi = std::max(hi, lr);
      sum += lr;
    }
    out.min_ratio = std::min(out.min_ratio, std::exp(lo));
    out.max_ratio = std::max(out.max_ratio, std::exp(hi));
    out.log_ratio_by_n.emplace_back(t.n, sum / static_cast<double>(t.weights.size()));
  }
  out.c_hat = std::max(out.max_ratio, 1.0 / out.min_ratio);
  const auto m = static_cast<double>(out.log_ratio_by_n.size());
  if (m >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [n, y] : out.log_ratio_by_n) {
      sx += n;
      sy += y;
      sxx += static_cast<double>(n) * n;
      sxy += n * y;
    }
    const double den = m * sxx - sx * sx;
    if (den != 0.0) out.drift_slope = (m * sxy - sx * sy) / den;
  }
  return out;
}

/// Tables for n = 1..n_max.
template <WordPotential P>
std::vector<CylinderTable> gibbs_tables(const Subshift& sub, const P& pot, int n_max, double p_hat) {
  std::vector<CylinderTable> out;
  for (int n = 1; n <= n_max; ++n) out.push_back(empirical_equilibrium(sub, pot, n, p_hat));
  return out;
}

struct DistortionBound {
  double constant = 1.0;
  std::string justification;
};

/// phi_n is constant on length-n cylinders for a one-step cocycle, so C = 1.
inline DistortionBound bounded_distortion_constant(const Cocycle&, int n_max = 1) {
  if (n_max < 1) fail(ErrorKind::InvalidArgument, "n_max must be positive");
  return {1.0, "one-step cocycle: phi_n is constant on every length-n cylinder"};
}

/// sum over connectors K with |IKJ| = k + |J| of w(IKJ), from a table of that length.
inline double correlation(const CylinderTable& table, const Word& i, const Word& j, int k) {
  if (k < static_cast<int>(i.size())) fail(ErrorKind::InvalidArgument, "gap k must be at least |I|");
  if (table.n != k + static_cast<int>(j.size()))
    fail(ErrorKind::DimensionMismatch, "table length must equal k + |J|");
  double out = 0.0;
  for (const auto& [w, v] : table.weights)
    if (std::equal(i.begin(), i.end(), w.begin()) && std::equal(j.begin(), j.end(), w.begin() + k)) out += v;
  return out;
}

template <WordPotential P>
double correlation(const Subshift& sub, const P& pot, const Word& i, const Word& j, int k, double budget = 1e6) {
  const int len = k + static_cast<int>(j.size());
  if (i.empty() || j.empty()) fail(ErrorKind::InvalidArgument, "cylinders must be nonempty");
  if (k < static_cast<int>(i.size())) fail(ErrorKind::InvalidArgument, "gap k must be at least |I|");
  if (count_words(sub, len) > budget)
    fail(ErrorKind::BudgetExceeded, "table of length " + std::to_string(len) + " exceeds the budget");
  return correlation(empirical_equilibrium(sub, pot, len, 0.0), i, j, k);
}

struct MixingRow {
  Word i;
  Word j;
  int k = 0;
  double correlation = 0.0;
  double product = 0.0;  ///< mu^(I) mu^(J)
  double defect = 0.0;
  double ratio = 0.0;
  bool violation = false;
};

struct MixingReport {
  std::vector<MixingRow> rows;
  double c_hat = 1.0;
  double bound = 1.0;  ///< C^4 (with C_1 = 1)
  bool any_violation = false;
};

/// Correlations for every (pair, k) with mu^ read from the tables of length
/// |I| and |J|. A row is flagged when its ratio exceeds C^4 (1 + rel_tol),
/// with C from a Gibbs scan over every table length used.
template <WordPotential P>
MixingReport mixing_report(const Subshift& sub, const P& pot, const std::vector<std::pair<Word, Word>>& pairs,
                           const std::vector<int>& ks, double p_hat, double budget = 1e6, double rel_tol = 1e-6) {
  if (pairs.empty() || ks.empty()) fail(ErrorKind::InvalidArgument, "mixing_report needs pairs and gaps");
  int longest = 1;
  for (const auto& [i, j] : pairs) {
    if (i.empty() || j.empty()) fail(ErrorKind::InvalidArgument, "cylinders must be nonempty");
    sub.require_admissible(i, "I");
    sub.require_admissible(j, "J");
    for (int k : ks) {
      if (k < static_cast<int>(i.size())) continue;
      longest = std::max(longest, k + static_cast<int>(j.size()));
      longest = std::max(longest, static_cast<int>(std::max(i.size(), j.size())));
    }
  }
  double words = 0.0;
  for (int n = 1; n <= longest; ++n) words += count_words(sub, n);
  if (words > budget) fail(ErrorKind::BudgetExceeded, "tables up to length " + std::to_string(longest) + " exceed the budget");

  const auto tables = gibbs_tables(sub, pot, longest, p_hat);
  const auto scan = gibbs_ratio_scan(pot, tables, p_hat);
  MixingReport out;
  out.c_hat = scan.c_hat;
  out.bound = std::pow(scan.c_hat, 4);
  for (const auto& [i, j] : pairs) {
    const double mi = tables[i.size() - 1].weight(i);
    const double mj = tables[j.size() - 1].weight(j);
    for (int k : ks) {
      if (k < static_cast<int>(i.size())) continue;
      MixingRow row;
      row.i = i;
      row.j = j;
      row.k = k;
      row.correlation = correlation(tables[static_cast<std::size_t>(k) + j.size() - 1], i, j, k);
      row.product = mi * mj;
      row.defect = std::abs(row.correlation - row.product);
      row.ratio = row.product > 0.0 ? row.correlation / row.product : std::numeric_limits<double>::infinity();
      row.violation = row.ratio > out.bound * (1.0 + rel_tol);
      out.any_violation = out.any_violation || row.violation;
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

/// All (I, J) with 1 <= |I|, |J| <= max_len.
inline std::vector<std::pair<Word, Word>> all_pairs(const Subshift& sub, int max_len) {
  std::vector<Word> words;
  for (int n = 1; n <= max_len; ++n)
    for (const auto& w : WordEnumerator(sub, n)) words.push_back(w);
  std::vector<std::pair<Word, Word>> out;
  for (const auto& a : words)
    for (const auto& b : words) out.emplace_back(a, b);
  return out;
}

// ---------------------------------------------------------------------------
// Product and power systems

/// q^2 symbols (a, b) -> a q + b with adjacency T_{aa'} T_{bb'}.
inline Subshift product_subshift(const Subshift& sub) {
  const int q = sub.q();
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(q) * q * q * q, 0);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (int a2 = 0; a2 < q; ++a2)
        for (int b2 = 0; b2 < q; ++b2)
          adj[static_cast<std::size_t>(a * q + b) * q * q + a2 * q + b2] = sub.allows(a, a2) && sub.allows(b, b2);
  return Subshift(q * q, std::move(adj));
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool intersects(const Interval& o, double slack = 1e-12) const { return lo <= o.hi + slack && o.lo <= hi + slack; }
};

struct LemmaCheck {
  Interval predicted;  ///< 2 [P(Phi)] or n [P(Phi)]
  Interval measured;   ///< bracket of the product / power system
  PressureEstimate single;
  PressureEstimate system;
  bool pass = false;
};

template <WordPotential P>
LemmaCheck product_pressure_check(const Subshift& sub, const P& pot, const PressureOptions& opt = {}) {
  LemmaCheck out;
  out.single = pressure_estimate(sub, pot, opt);
  out.system = pressure_estimate(product_subshift(sub), ProductPotential<P>(pot), opt);
  out.predicted = {2.0 * out.single.lower, 2.0 * out.single.upper};
  out.measured = {out.system.lower, out.system.upper};
  out.pass = out.predicted.intersects(out.measured);
  return out;
}

inline LemmaCheck product_pressure_check(const Subshift& sub, const Cocycle& cocycle, const PressureOptions& opt = {}) {
  return product_pressure_check(sub, SingularValuePotential(cocycle), opt);
}

inline LemmaCheck power_pressure_check(const Subshift& sub, const Cocycle& cocycle, int n,
                                       const PressureOptions& opt = {}) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "power check needs n >= 2");
  const auto sys = block_system(sub, n, BlockAdjacency::Concatenate);
  LemmaCheck out;
  out.single = pressure_estimate(sub, cocycle, opt);
  out.system = pressure_estimate(sys.sub, power_cocycle(sys, cocycle), opt);
  out.predicted = {n * out.single.lower, n * out.single.upper};
  out.measured = {out.system.lower, out.system.upper};
  out.pass = out.predicted.intersects(out.measured);
  return out;
}

}  // namespace subtherm
