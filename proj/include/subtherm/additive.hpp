#pragma once

// Additive locally constant potentials on an SFT: pressure as the log Perron
// root of the weighted adjacency matrix, the Markov equilibrium state, and the
// periodic-orbit cohomology test.

#include <optional>
#include <string>

#include "subtherm/gibbs.hpp"
#include "subtherm/linalg.hpp"
#include "subtherm/sft.hpp"

namespace subtherm {

/// depth 1: values[i] = pot(i). depth 2: values[i q + j] = pot(ij).
struct AdditivePotential {
  int depth = 1;
  std::vector<double> values;

  static AdditivePotential symbols(std::vector<double> v) { return {1, std::move(v)}; }
  static AdditivePotential edges(std::vector<double> v) { return {2, std::move(v)}; }

  /// Weight of the step i -> j (reads i alone at depth 1).
  double step(int q, Symbol i, Symbol j) const {
    return depth == 1 ? values[static_cast<std::size_t>(i)] : values[static_cast<std::size_t>(i) * q + j];
  }

  bool operator==(const AdditivePotential&) const = default;
};

inline void validate(const Subshift& sub, const AdditivePotential& pot) {
  const auto q = static_cast<std::size_t>(sub.q());
  if (pot.depth == 1) {
    if (pot.values.size() != q) fail(ErrorKind::DimensionMismatch, "depth-1 potential needs one value per symbol");
  } else if (pot.depth == 2) {
    if (pot.values.size() != q * q) fail(ErrorKind::DimensionMismatch, "depth-2 potential needs q*q values");
  } else {
    fail(ErrorKind::InvalidArgument, "potential depth must be 1 or 2");
  }
  for (std::size_t i = 0; i < pot.values.size(); ++i) {
    const bool used = pot.depth == 1 || sub.allows(static_cast<Symbol>(i / q), static_cast<Symbol>(i % q));
    if (used && !std::isfinite(pot.values[i])) fail(ErrorKind::InvalidArgument, "potential values must be finite");
  }
}

/// M_ij = T_ij exp(pot(i)) or T_ij exp(pot(ij)).
inline Matrix weighted_matrix(const Subshift& sub, const AdditivePotential& pot) {
  validate(sub, pot);
  const int q = sub.q();
  Matrix m = Matrix::Zero(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      if (sub.allows(i, j)) m(i, j) = std::exp(pot.step(q, i, j));
  return m;
}

struct PerronData {
  double rho = 0.0;
  double lo = 0.0;  ///< Collatz-Wielandt bracket
  double hi = 0.0;
  Vector right;     ///< positive, unit 1-norm
  int iterations = 0;
};

/// Power iteration from the all-ones vector, stopped once the normalised
/// iterate stops moving (or stalls at rounding level). The Collatz-Wielandt
/// ratios of the final positive iterate bracket the Perron root.
inline PerronData perron(const Matrix& m, int max_iterations = 200000) {
  const auto q = m.rows();
  PerronData out;
  Vector v = Vector::Ones(q) / static_cast<double>(q);
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iterations; ++it) {
    Vector w = m * v;
    w /= w.sum();
    const double step = (w - v).lpNorm<1>();
    v = w;
    out.iterations = it;
    if (step <= 1e-15 || (step < 1e-12 && step >= last_step)) break;
    last_step = step;
  }
  const Vector mv = m * v;
  out.lo = std::numeric_limits<double>::infinity();
  out.hi = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) {
    if (!(v(i) > 0.0)) fail(ErrorKind::NotPrimitive, "Perron vector is not positive; check primitivity");
    const double r = mv(i) / v(i);
    out.lo = std::min(out.lo, r);
    out.hi = std::max(out.hi, r);
  }
  out.rho = v.dot(mv) / v.dot(v);
  out.rho = std::clamp(out.rho, out.lo, out.hi);
  out.right = v;
  return out;
}

struct AdditivePressure {
  double value = 0.0;
  double lo = 0.0;  ///< log of the Collatz-Wielandt bracket
  double hi = 0.0;
};

inline AdditivePressure additive_pressure(const Subshift& sub, const AdditivePotential& pot) {
  const auto pd = perron(weighted_matrix(sub, pot));
  return {std::log(pd.rho), std::log(pd.lo), std::log(pd.hi)};
}

struct MarkovMeasure {
  Vector stationary;
  Matrix transition;

  /// mu([w]) for an admissible word w.
  double cylinder(const Word& w) const {
    if (w.empty()) return 1.0;
    double out = stationary(w.front());
    for (std::size_t i = 1; i < w.size(); ++i) out *= transition(w[i - 1], w[i]);
    return out;
  }
};

/// transition_ij = M_ij r_j / (rho r_i), stationary proportional to l_i r_i.
inline MarkovMeasure markov_equilibrium(const Subshift& sub, const AdditivePotential& pot) {
  const Matrix m = weighted_matrix(sub, pot);
  const auto right = perron(m);
  const auto left = perron(m.transpose());
  MarkovMeasure out;
  const auto q = m.rows();
  out.transition = Matrix::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index j = 0; j < q; ++j)
      out.transition(i, j) = m(i, j) * right.right(j) / (right.rho * right.right(i));
    out.transition.row(i) /= out.transition.row(i).sum();
  }
  out.stationary = left.right.cwiseProduct(right.right);
  out.stationary /= out.stationary.sum();
  return out;
}

/// Markov cylinder weights on L(n) as a table.
inline CylinderTable markov_table(const Subshift& sub, const MarkovMeasure& mu, int n) {
  CylinderTable out;
  out.n = n;
  out.q = sub.q();
  for (const auto& w : WordEnumerator(sub, n)) out.weights.emplace_hint(out.weights.end(), w, mu.cylinder(w));
  return out;
}

/// Birkhoff sum of pot around the periodic orbit w^inf.
inline double birkhoff_sum(const Subshift& sub, const AdditivePotential& pot, const Word& w) {
  if (!sub.is_periodic_admissible(w)) fail(ErrorKind::NotPeriodic, "word does not close up into an orbit");
  double out = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) out += pot.step(sub.q(), w[i], w[(i + 1) % w.size()]);
  return out;
}

struct CohomologyVerdict {
  bool not_cohomologous = false;  ///< otherwise: consistent up to `bound`
  int bound = 0;
  Word witness;
  double sum1 = 0.0;
  double sum2 = 0.0;
  int orbits_checked = 0;
};

/// Compares Birkhoff sums on every periodic orbit of period <= bound; the
/// first discrepancy above 1e-9 |w| is the witness.
inline CohomologyVerdict cohomology_test(const Subshift& sub, const AdditivePotential& a, const AdditivePotential& b,
                                         int bound = 12) {
  if (bound < 1) fail(ErrorKind::InvalidArgument, "period bound must be positive");
  validate(sub, a);
  validate(sub, b);
  CohomologyVerdict out;
  out.bound = bound;
  for (const auto& w : periodic_words(sub, bound)) {
    ++out.orbits_checked;
    const double sa = birkhoff_sum(sub, a, w), sb = birkhoff_sum(sub, b, w);
    if (std::abs(sa - sb) > 1e-9 * static_cast<double>(w.size())) {
      out.not_cohomologous = true;
      out.witness = w;
      out.sum1 = sa;
      out.sum2 = sb;
      return out;
    }
  }
  return out;
}

/// Largest period bound <= cap whose orbit enumeration stays within `words`.
inline int affordable_period_bound(const Subshift& sub, int cap, double words) {
  int bound = 1;
  double used = count_words(sub, 1);
  while (bound < cap && used + count_words(sub, bound + 1) <= words) used += count_words(sub, ++bound);
  return bound;
}

}  // namespace subtherm
