#pragma once

// Equilibrium-state classification for locally constant GL_2(R) cocycles of
// the norm potential: reducible families are triangularized and split by the
// pressures and cohomology of their diagonal potentials; irreducible families
// are examined through the square cocycle over the 2-step system.

#include <array>
#include <deque>
#include <map>
#include <optional>
#include <string>

#include "subtherm/additive.hpp"
#include "subtherm/cocycle.hpp"
#include "subtherm/recoding.hpp"

namespace subtherm {

enum class Tag { IrreducibleUnique, ReducibleUnique, ReducibleTwoStates, AntidiagonalPeriodTwo, Inconclusive };

inline const char* to_string(Tag t) {
  switch (t) {
    case Tag::IrreducibleUnique: return "IrreducibleUnique";
    case Tag::ReducibleUnique: return "ReducibleUnique";
    case Tag::ReducibleTwoStates: return "ReducibleTwoStates";
    case Tag::AntidiagonalPeriodTwo: return "AntidiagonalPeriodTwo";
    case Tag::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct Reducibility {
  bool irreducible = false;
  bool scalar_family = false;
  std::vector<Vector> lines;
};

inline Reducibility reducibility_2x2(const Cocycle& cocycle, double tol = 1e-8) {
  if (cocycle.d() != 2) fail(ErrorKind::DimensionMismatch, "2x2 cocycle expected");
  const auto found = common_invariant_lines_2x2(cocycle.generators(), tol);
  Reducibility out;
  out.scalar_family = found.scalar_family;
  out.lines = found.lines;
  out.irreducible = !found.scalar_family && found.lines.empty();
  return out;
}

struct Triangularization {
  Matrix conjugator;       ///< C with C e_1 on the line
  Cocycle triangular;      ///< B_i = C^{-1} A_i C
  AdditivePotential log_a; ///< log|B_i(0,0)|
  AdditivePotential log_c; ///< log|B_i(1,1)|
  double residual = 0.0;   ///< max |B_i(1,0)| / |B_i|
};

/// C = [v, w] with v on the line and w the orthogonalized standard basis
/// vector least aligned with v.
inline Triangularization triangularize(const Cocycle& cocycle, const Vector& line, double tol = 1e-8) {
  if (cocycle.d() != 2 || line.size() != 2) fail(ErrorKind::DimensionMismatch, "2x2 cocycle and planar line expected");
  if (!(line.norm() > 0.0)) fail(ErrorKind::InvalidArgument, "line direction must be nonzero");
  const Vector v = line.normalized();
  Vector w = Vector::Zero(2);
  w(std::abs(v(0)) >= std::abs(v(1)) ? 1 : 0) = 1.0;
  w -= w.dot(v) * v;
  w.normalize();
  Matrix c(2, 2);
  c.col(0) = v;
  c.col(1) = w;
  Triangularization out;
  out.conjugator = c;
  out.triangular = conjugate(cocycle, c);
  std::vector<double> a, cc;
  for (const auto& b : out.triangular.generators()) {
    out.residual = std::max(out.residual, std::abs(b(1, 0)) / b.norm());
    a.push_back(std::log(std::abs(b(0, 0))));
    cc.push_back(std::log(std::abs(b(1, 1))));
  }
  if (out.residual > tol)
    fail(ErrorKind::LineNotInvariant, "line is not invariant: lower-left residual " + std::to_string(out.residual));
  out.log_a = AdditivePotential::symbols(std::move(a));
  out.log_c = AdditivePotential::symbols(std::move(cc));
  return out;
}

enum class PressureRelation { Equal, Unequal, Undecided };

inline const char* to_string(PressureRelation r) {
  switch (r) {
    case PressureRelation::Equal: return "equal";
    case PressureRelation::Unequal: return "unequal";
    case PressureRelation::Undecided: return "undecided";
  }
  return "?";
}

struct PressureComparison {
  AdditivePressure first;
  AdditivePressure second;
  PressureRelation relation = PressureRelation::Undecided;
  double difference = 0.0;
};

/// Equal within tol, unequal once the brackets are separated by more than
/// tol, undecided in between.
inline PressureComparison compare_pressures(const AdditivePressure& a, const AdditivePressure& b, double tol = 1e-9) {
  PressureComparison out{a, b, PressureRelation::Undecided, a.value - b.value};
  if (std::abs(out.difference) <= tol && a.lo <= b.hi + tol && b.lo <= a.hi + tol)
    out.relation = PressureRelation::Equal;
  else if (a.lo > b.hi + tol || b.lo > a.hi + tol)
    out.relation = PressureRelation::Unequal;
  return out;
}

struct ReducibleData {
  Vector line;
  Triangularization tri;
  PressureComparison pressures;
  std::optional<CohomologyVerdict> cohomology;
  MarkovMeasure mu_a;
  MarkovMeasure mu_c;
};

struct SquareAnalysis {
  bool line_field_found = false;
  std::vector<Vector> line_field;           ///< L_1 per symbol x_0
  std::map<Word, Matrix> conjugators;       ///< C(x) per (x_{-1}, x_0)
  std::map<Word, double> lambda;            ///< a(x) per (x_{-1}, x_0, x_1); b = 1
  double antidiagonal_residual = 0.0;
  BlockSystem blocks;
  AdditivePotential alpha;                  ///< log|a(sigma x) b(x)| on the 2-step system
  AdditivePotential beta;                   ///< log|b(sigma x) a(x)|, precomposed with sigma^2
  std::optional<PressureComparison> pressures;
  std::optional<CohomologyVerdict> cohomology;
  std::optional<MarkovMeasure> mu1;
  std::optional<MarkovMeasure> mu2;
  double average_invariance_defect = 0.0;   ///< (mu1 + mu2)/2 at the 1-step cylinder level
};

struct Classification {
  Tag tag = Tag::Inconclusive;
  std::string reason;
  bool reducible = false;
  bool scalar_family = false;
  std::vector<std::string> hypotheses;
  std::optional<ReducibleData> reduced;
  std::optional<SquareAnalysis> square;
};

namespace detail {

inline std::vector<Vector> line_candidates(const Subshift& sub, const Cocycle& cocycle, double tol) {
  std::vector<Vector> out;
  for (int len : {2, 4}) {
    for (const auto& w : WordEnumerator(sub, len, Word{0})) {
      if (!sub.allows(w.back(), 0)) continue;
      const Matrix p = word_product(cocycle, w);
      if (is_scalar_2x2(p, 1e-10)) continue;
      out = eigenlines_2x2(p, tol);
      std::sort(out.begin(), out.end(), [](const Vector& a, const Vector& b) { return line_angle(a) < line_angle(b); });
      return out;
    }
  }
  // Every even return product is scalar: try the axes and generator eigenlines.
  Vector e1(2), e2(2);
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  out = {e1, e2};
  for (const auto& g : cocycle.generators())
    if (!is_scalar_2x2(g)) {
      const auto lines = eigenlines_2x2(g, tol);
      out.insert(out.end(), lines.begin(), lines.end());
    }
  std::sort(out.begin(), out.end(), [](const Vector& a, const Vector& b) { return line_angle(a) < line_angle(b); });
  return out;
}

/// Per-symbol lines with A_{x1} A_{x0} L(x0) = L(x2) on every admissible
/// x0 x1 x2, seeded by L(0) = seed.
inline std::optional<std::vector<Vector>> propagate_line_field(const Subshift& sub, const Cocycle& cocycle,
                                                               const Vector& seed, double tol) {
  const int q = sub.q();
  std::vector<std::optional<Vector>> field(static_cast<std::size_t>(q));
  field[0] = canonical_line(seed);
  std::deque<Symbol> queue{0};
  while (!queue.empty()) {
    const Symbol x0 = queue.front();
    queue.pop_front();
    const Vector v = *field[static_cast<std::size_t>(x0)];
    for (Symbol x1 = 0; x1 < q; ++x1) {
      if (!sub.allows(x0, x1)) continue;
      const Vector image = canonical_line(cocycle.generator(x1) * (cocycle.generator(x0) * v));
      for (Symbol x2 = 0; x2 < q; ++x2) {
        if (!sub.allows(x1, x2)) continue;
        auto& slot = field[static_cast<std::size_t>(x2)];
        if (!slot) {
          slot = image;
          queue.push_back(x2);
        } else if (line_distance(*slot, image) > tol) {
          return std::nullopt;
        }
      }
    }
  }
  std::vector<Vector> out;
  for (auto& f : field) {
    if (!f) return std::nullopt;
    out.push_back(*f);
  }
  return out;
}

/// Weights of original words at phases 0 and 1 under a Markov measure on the
/// 2-step system.
inline std::array<std::map<Word, double>, 2> phase_weights(const BlockSystem& sys, const MarkovMeasure& mu, int n) {
  std::array<std::map<Word, double>, 2> out;
  const int blocks = (n + 2) / 2;
  for (const auto& bw : WordEnumerator(sys.sub, blocks)) {
    const double w = mu.cylinder(bw);
    const Word x = sys.expand(bw);
    for (int ph = 0; ph < 2; ++ph) out[static_cast<std::size_t>(ph)][Word(x.begin() + ph, x.begin() + ph + n)] += w;
  }
  return out;
}

}  // namespace detail

/// Square-cocycle analysis of an irreducible 2x2 family whose square may
/// preserve a line field L_1. With L_2(sigma x) = A(x) L_1(x), the per-point
/// frame C(x) = [v(x_0), A(x_{-1}) v(x_{-1})] puts A in antidiagonal form
/// B(x) = [[0, a(x)], [1, 0]].
inline SquareAnalysis square_analysis(const Subshift& sub, const Cocycle& cocycle, double tol = 1e-8,
                                      int cohomology_bound = 12) {
  if (cocycle.d() != 2) fail(ErrorKind::DimensionMismatch, "2x2 cocycle expected");
  SquareAnalysis out;
  std::optional<std::vector<Vector>> field;
  for (const auto& cand : detail::line_candidates(sub, cocycle, tol)) {
    field = detail::propagate_line_field(sub, cocycle, cand, tol);
    if (field) break;
  }
  if (!field) return out;
  out.line_field_found = true;
  out.line_field = *field;
  const int q = sub.q();
  const auto& v = out.line_field;

  for (Symbol prev = 0; prev < q; ++prev)
    for (Symbol x0 = 0; x0 < q; ++x0) {
      if (!sub.allows(prev, x0)) continue;
      const Vector second = cocycle.generator(prev) * v[static_cast<std::size_t>(prev)];
      if (line_distance(second, v[static_cast<std::size_t>(x0)]) <= tol)
        fail(ErrorKind::StructuralFailure, "L_2 coincides with L_1 at junction " + word_to_string({prev, x0}));
      Matrix c(2, 2);
      c.col(0) = v[static_cast<std::size_t>(x0)];
      c.col(1) = second;
      out.conjugators[{prev, x0}] = c;
    }
  for (Symbol prev = 0; prev < q; ++prev)
    for (Symbol x0 = 0; x0 < q; ++x0)
      for (Symbol x1 = 0; x1 < q; ++x1) {
        if (!sub.allows(prev, x0) || !sub.allows(x0, x1)) continue;
        const Matrix b = out.conjugators.at({x0, x1}).inverse() * cocycle.generator(x0) * out.conjugators.at({prev, x0});
        const double scale = b.norm();
        const double res = std::max({std::abs(b(0, 0)), std::abs(b(1, 1)), std::abs(b(1, 0) - 1.0)}) / scale;
        out.antidiagonal_residual = std::max(out.antidiagonal_residual, res);
        out.lambda[{prev, x0, x1}] = b(0, 1);
      }
  if (out.antidiagonal_residual > 1e-10)
    fail(ErrorKind::StructuralFailure,
         "frame does not produce antidiagonal form, residual " + std::to_string(out.antidiagonal_residual));

  out.blocks = block_system(sub, 2, BlockAdjacency::Concatenate);
  const auto nb = static_cast<std::size_t>(out.blocks.sub.q());
  std::vector<double> alpha(nb * nb, 0.0), beta(nb * nb, 0.0);
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      if (!out.blocks.sub.allows(static_cast<Symbol>(i), static_cast<Symbol>(j))) continue;
      const Word& y0 = out.blocks.blocks[i];
      const Word& y1 = out.blocks.blocks[j];
      alpha[i * nb + j] = std::log(std::abs(out.lambda.at({y0[0], y0[1], y1[0]})));
      beta[i * nb + j] = std::log(std::abs(out.lambda.at({y0[1], y1[0], y1[1]})));
    }
  out.alpha = AdditivePotential::edges(std::move(alpha));
  out.beta = AdditivePotential::edges(std::move(beta));
  out.pressures = compare_pressures(additive_pressure(out.blocks.sub, out.alpha),
                                    additive_pressure(out.blocks.sub, out.beta));
  const int bound = affordable_period_bound(out.blocks.sub, cohomology_bound, 2e5);
  out.cohomology = cohomology_test(out.blocks.sub, out.alpha, out.beta, bound);
  out.mu1 = markov_equilibrium(out.blocks.sub, out.alpha);
  out.mu2 = markov_equilibrium(out.blocks.sub, out.beta);
  for (int n = 1; n <= 3; ++n) {
    const auto w1 = detail::phase_weights(out.blocks, *out.mu1, n);
    const auto w2 = detail::phase_weights(out.blocks, *out.mu2, n);
    for (const auto& [u, x] : w1[0]) {
      auto get = [&](const std::map<Word, double>& m) {
        const auto it = m.find(u);
        return it == m.end() ? 0.0 : it->second;
      };
      const double at0 = 0.5 * (x + get(w2[0]));
      const double at1 = 0.5 * (get(w1[1]) + get(w2[1]));
      out.average_invariance_defect = std::max(out.average_invariance_defect, std::abs(at0 - at1));
    }
  }
  return out;
}

/// Decision tree for the norm potential (s = 1) of a 2x2 cocycle.
inline Classification classify(const Subshift& sub, const Cocycle& input, double tol = 1e-8,
                               int cohomology_bound = 12) {
  if (input.d() != 2) fail(ErrorKind::DimensionMismatch, "classify2x2 needs a 2x2 cocycle");
  require_primitive(sub);
  const Cocycle cocycle = input.with_exponent(1.0);
  Classification out;
  const auto red = reducibility_2x2(cocycle, tol);
  out.scalar_family = red.scalar_family;

  if (!red.irreducible) {
    out.reducible = true;
    Vector line(2);
    line << 1.0, 0.0;
    if (!red.lines.empty()) line = red.lines.front();
    ReducibleData data;
    data.line = line;
    data.tri = triangularize(cocycle, line, tol);
    data.pressures = compare_pressures(additive_pressure(sub, data.tri.log_a), additive_pressure(sub, data.tri.log_c));
    data.mu_a = markov_equilibrium(sub, data.tri.log_a);
    data.mu_c = markov_equilibrium(sub, data.tri.log_c);
    out.hypotheses.push_back("common invariant line found: cocycle is reducible and conjugate to upper triangular");
    switch (data.pressures.relation) {
      case PressureRelation::Unequal:
        out.tag = Tag::ReducibleUnique;
        out.reason = "P(log|a|) != P(log|c|): only the larger diagonal potential carries an equilibrium state";
        break;
      case PressureRelation::Undecided:
        out.tag = Tag::Inconclusive;
        out.reason = "diagonal pressures are neither provably equal nor provably different";
        break;
      case PressureRelation::Equal: {
        data.cohomology = cohomology_test(sub, data.tri.log_a, data.tri.log_c,
                                          affordable_period_bound(sub, cohomology_bound, 1e6));
        if (data.cohomology->not_cohomologous) {
          out.tag = Tag::ReducibleTwoStates;
          out.reason = "equal diagonal pressures and log|a| not cohomologous to log|c|: two ergodic equilibrium states";
        } else {
          out.tag = Tag::Inconclusive;
          out.reason = "equal diagonal pressures, Birkhoff sums agree up to the period bound (leaning unique)";
        }
        break;
      }
    }
    out.reduced = std::move(data);
    return out;
  }

  out.hypotheses.push_back("no common invariant line: cocycle is irreducible");
  auto sq = square_analysis(sub, cocycle, tol, cohomology_bound);
  if (!sq.line_field_found) {
    out.tag = Tag::IrreducibleUnique;
    out.reason = "square cocycle over the 2-step system has no invariant line field";
    out.hypotheses.push_back("A^2 irreducible: unique equilibrium state");
  } else {
    out.hypotheses.push_back("A^2 preserves a line field: antidiagonal frame constructed");
    switch (sq.pressures->relation) {
      case PressureRelation::Unequal:
        out.tag = Tag::IrreducibleUnique;
        out.reason = "alpha and beta pressures differ over the 2-step system";
        break;
      case PressureRelation::Undecided:
        out.tag = Tag::Inconclusive;
        out.reason = "alpha and beta pressures are neither provably equal nor provably different";
        break;
      case PressureRelation::Equal:
        if (sq.cohomology->not_cohomologous) {
          out.tag = Tag::AntidiagonalPeriodTwo;
          out.reason = "equal alpha/beta pressures and alpha not cohomologous to beta over sigma^2";
          out.hypotheses.push_back("equilibrium state is (mu1 + mu2)/2 with mu2 the shift of mu1; isomorphism to a "
                                   "K-system times a rotation is not verified");
        } else {
          out.tag = Tag::Inconclusive;
          out.reason = "equal alpha/beta pressures, Birkhoff sums agree up to the period bound (leaning unique)";
        }
        break;
    }
  }
  out.square = std::move(sq);
  return out;
}

}  // namespace subtherm
