#pragma once

// Locally constant GL_d(R) cocycles: one matrix per symbol, read at
// coordinate 0. Products, singular value functions, fiber bunching,
// exterior powers, constant conjugation and irreducibility.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "subtherm/linalg.hpp"
#include "subtherm/sft.hpp"

namespace subtherm {

class Cocycle {
 public:
  Cocycle() = default;

  /// Generators indexed by symbol; every generator must be d x d and invertible.
  Cocycle(std::vector<Matrix> generators, double s) : gens_(std::move(generators)), s_(s) {
    if (gens_.empty()) fail(ErrorKind::InvalidArgument, "cocycle needs at least one generator");
    if (s_ < 0.0 || !std::isfinite(s_)) fail(ErrorKind::InvalidArgument, "exponent s must be finite and >= 0");
    d_ = static_cast<int>(gens_.front().rows());
    if (d_ < 1) fail(ErrorKind::DimensionMismatch, "dimension must be positive");
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      const auto& g = gens_[i];
      if (g.rows() != d_ || g.cols() != d_)
        fail(ErrorKind::DimensionMismatch, "generator " + std::to_string(i + 1) + " is not " +
                                               std::to_string(d_) + "x" + std::to_string(d_));
      if (!g.allFinite()) fail(ErrorKind::InvalidArgument, "generator " + std::to_string(i + 1) + " not finite");
      const auto sv = singular_values(g).values;
      if (!(sv.back() > 1e-14 * sv.front()))
        fail(ErrorKind::SingularMatrix, "generator " + std::to_string(i + 1) + " is not invertible");
    }
  }

  int d() const noexcept { return d_; }
  int symbols() const noexcept { return static_cast<int>(gens_.size()); }
  double s() const noexcept { return s_; }
  const Matrix& generator(Symbol i) const { return gens_.at(static_cast<std::size_t>(i)); }
  const std::vector<Matrix>& generators() const noexcept { return gens_; }

  Cocycle with_exponent(double s) const { return Cocycle(gens_, s); }
  Cocycle scaled(double c) const {
    auto g = gens_;
    for (auto& m : g) m *= c;
    return Cocycle(std::move(g), s_);
  }

 private:
  int d_ = 0;
  std::vector<Matrix> gens_;
  double s_ = 1.0;
};

/// A(i_{n-1}) ... A(i_0); identity for the empty word.
inline Matrix word_product(const Cocycle& cocycle, const Word& word) {
  Matrix out = Matrix::Identity(cocycle.d(), cocycle.d());
  for (Symbol s : word) {
    if (s < 0 || s >= cocycle.symbols()) fail(ErrorKind::OutOfRange, "symbol outside the cocycle alphabet");
    out = cocycle.generator(s) * out;
  }
  return out;
}

/// Checked variant: the word must be nonempty and admissible.
inline Matrix word_product(const Subshift& sub, const Cocycle& cocycle, const Word& word) {
  if (word.empty()) fail(ErrorKind::InvalidArgument, "word must be nonempty");
  sub.require_admissible(word);
  return word_product(cocycle, word);
}

inline void require_invertible(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) fail(ErrorKind::DimensionMismatch, std::string(what) + " must be square");
  const auto sv = singular_values(m).values;
  if (!(sv.back() > 1e-14 * sv.front())) fail(ErrorKind::SingularMatrix, std::string(what) + " is singular");
}

inline double log_singular_value_function(const Matrix& m, double s) {
  require_invertible(m, "matrix");
  return log_phi_from_sorted(singular_values(m).values, s);
}

/// phi^s(M): alpha_1 ... alpha_floor(s) alpha_ceil(s)^{frac(s)} for s <= d,
/// |det M|^{s/d} beyond.
inline double singular_value_function(const Matrix& m, double s) { return std::exp(log_singular_value_function(m, s)); }

/// phi^s evaluated on eigenvalue moduli instead of singular values.
inline double log_eigen_value_function(const Matrix& m, double s) {
  return log_phi_from_sorted(eigen_moduli(m), s);
}

/// max_i |A_i| |A_i^{-1}| / 2^alpha; fiber-bunched iff the result is < 1.
inline double fiber_bunching_margin(const Cocycle& cocycle, double alpha = 1.0) {
  double worst = 0.0;
  for (const auto& g : cocycle.generators()) worst = std::max(worst, condition_number(g));
  return worst / std::exp2(alpha);
}

inline Cocycle exterior_power(const Cocycle& cocycle, int t) {
  if (t < 1 || t > cocycle.d()) fail(ErrorKind::OutOfRange, "exterior power index out of range");
  std::vector<Matrix> gens;
  for (const auto& g : cocycle.generators()) gens.push_back(compound(g, t));
  return Cocycle(std::move(gens), cocycle.s());
}

/// Generators C^{-1} A_i C.
inline Cocycle conjugate(const Cocycle& cocycle, const Matrix& c) {
  if (c.rows() != cocycle.d() || c.cols() != cocycle.d())
    fail(ErrorKind::DimensionMismatch, "conjugator has the wrong size");
  require_invertible(c, "conjugator");
  const Matrix c_inv = c.inverse();
  std::vector<Matrix> gens;
  for (const auto& g : cocycle.generators()) gens.push_back(c_inv * g * c);
  return Cocycle(std::move(gens), cocycle.s());
}

// ---------------------------------------------------------------------------
// Invariant lines of 2x2 families

struct LineSearch {
  bool scalar_family = false;  ///< every generator is scalar: all lines invariant
  std::vector<Vector> lines;   ///< common invariant lines, sorted by angle
};

/// Lines L with A_i L = L for all i. Residual above 100*tol rejects a line,
/// at or below tol accepts it; in between the call is inconclusive.
inline LineSearch common_invariant_lines_2x2(const std::vector<Matrix>& gens, double tol = 1e-8) {
  LineSearch out;
  std::vector<const Matrix*> active;
  for (const auto& g : gens) {
    if (g.rows() != 2 || g.cols() != 2) fail(ErrorKind::DimensionMismatch, "2x2 generators expected");
    if (!is_scalar_2x2(g)) active.push_back(&g);
  }
  if (active.empty()) {
    out.scalar_family = true;
    return out;
  }
  std::vector<Vector> candidates = eigenlines_2x2(*active.front(), tol);
  for (std::size_t k = 1; k < active.size(); ++k) {
    std::vector<Vector> kept;
    for (const auto& v : candidates) {
      const double r = line_invariance_residual(*active[k], v);
      if (r <= tol) {
        kept.push_back(v);
      } else if (r < 100.0 * tol) {
        fail(ErrorKind::InconclusiveNumerics,
             "eigenline coincidence residual " + std::to_string(r) + " inside the tolerance band");
      }
    }
    candidates = std::move(kept);
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Vector& a, const Vector& b) { return line_angle(a) < line_angle(b); });
  out.lines = std::move(candidates);
  return out;
}

// ---------------------------------------------------------------------------
// Irreducibility (Burnside spanning test)

struct IrreducibilityVerdict {
  bool irreducible = false;
  int algebra_dimension = 0;
  /// Orthonormal basis (columns) of a common invariant proper subspace.
  Matrix invariant_basis;
  /// d = 2 only: every common invariant line.
  std::vector<Vector> invariant_lines;
  bool scalar_family = false;
  /// Algebra is a proper subalgebra that still acts irreducibly over R
  /// (complex or quaternionic type); Burnside's criterion needs C.
  bool real_division_type = false;
};

namespace detail {

inline Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

}  // namespace detail

/// Grows the span of generator products of length <= d^2 from I. A candidate
/// product is new when its normalized Gram residual exceeds 100*rank_tol,
/// dependent below rank_tol/100, and inconclusive in between.
inline IrreducibilityVerdict irreducibility_check(const Cocycle& cocycle, double rank_tol = 1e-8) {
  const int d = cocycle.d();
  const int full = d * d;
  IrreducibilityVerdict out;

  std::vector<Matrix> kept;     // algebra basis (unit Frobenius norm)
  std::vector<Vector> ortho;    // orthonormalized flattening of `kept`
  bool ambiguous = false;
  auto try_add = [&](const Matrix& candidate) {
    Matrix unit = candidate / candidate.norm();
    Vector r = detail::flatten(unit);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : ortho) r -= q.dot(r) * q;
    const double residual2 = r.squaredNorm();
    if (residual2 > 100.0 * rank_tol) {
      ortho.push_back(r.normalized());
      kept.push_back(unit);
      return true;
    }
    if (residual2 >= rank_tol / 100.0) ambiguous = true;
    return false;
  };

  std::vector<Matrix> frontier{Matrix::Identity(d, d)};
  try_add(frontier.front());
  for (int len = 1; len <= full && !frontier.empty() && static_cast<int>(kept.size()) < full; ++len) {
    std::vector<Matrix> next;
    for (const auto& m : frontier)
      for (const auto& g : cocycle.generators()) {
        Matrix product = g * m;
        if (try_add(product)) next.push_back(kept.back());
        if (static_cast<int>(kept.size()) == full) break;
      }
    frontier = std::move(next);
  }

  // Gram-matrix confirmation of the rank.
  const auto k = static_cast<Eigen::Index>(kept.size());
  Matrix stacked(full, k);
  for (Eigen::Index j = 0; j < k; ++j) stacked.col(j) = detail::flatten(kept[static_cast<std::size_t>(j)]);
  const Matrix gram = stacked.transpose() * stacked;
  Eigen::SelfAdjointEigenSolver<Matrix> gram_eigs(gram);
  const double largest = gram_eigs.eigenvalues().maxCoeff();
  const double smallest = gram_eigs.eigenvalues().minCoeff();
  if (smallest < rank_tol * largest)
    fail(ErrorKind::InconclusiveNumerics, "algebra Gram spectrum too close to the rank threshold");

  out.algebra_dimension = static_cast<int>(k);
  if (out.algebra_dimension == full) {
    out.irreducible = true;
    return out;
  }
  if (ambiguous) fail(ErrorKind::InconclusiveNumerics, "span growth hit the rank tolerance band");

  // Proper subalgebra: look for a cyclic subspace A v != R^d, with v taken from
  // the real and imaginary parts of eigenvectors of a generic algebra element.
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix generic = Matrix::Zero(d, d);
  for (const auto& m : kept) generic += unif(rng) * m;
  Eigen::EigenSolver<Matrix> es(generic, true);
  std::optional<Matrix> best;
  for (Eigen::Index col = 0; col < es.eigenvectors().cols(); ++col) {
    const ComplexVector u = es.eigenvectors().col(col);
    for (const Vector& v : {Vector(u.real()), Vector(u.imag())}) {
      if (v.norm() < 1e-8) continue;
      Matrix images(d, k);
      for (Eigen::Index j = 0; j < k; ++j) images.col(j) = (kept[static_cast<std::size_t>(j)] * v).normalized();
      Eigen::JacobiSVD<Matrix> svd(images, Eigen::ComputeThinU);
      const auto& sv = svd.singularValues();
      int rank = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-8 * sv(0)) ++rank;
      if (rank < d && (!best || rank < best->cols())) best = Matrix(svd.matrixU().leftCols(rank));
    }
  }
  if (!best) {
    out.irreducible = true;
    out.real_division_type = true;
    return out;
  }
  out.invariant_basis = *best;
  if (d == 2) {
    const auto lines = common_invariant_lines_2x2(cocycle.generators(), 1e-8);
    out.invariant_lines = lines.lines;
    out.scalar_family = lines.scalar_family;
  }
  return out;
}

}  // namespace subtherm
