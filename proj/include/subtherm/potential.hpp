#pragma once

// Word potentials: anything that assigns log Phi~(I) to admissible words
// through an incremental state. The pressure engine, qm search and Gibbs
// tables are written against the WordPotential concept so that product and
// recoded systems reuse them unchanged.

#include <cmath>
#include <concepts>
#include <limits>
#include <vector>

#include "subtherm/cocycle.hpp"

namespace subtherm {

template <class P>
concept WordPotential = requires(const P& p, const typename P::State& a, const typename P::State& b,
                                 typename P::State& out, Symbol sym) {
  { p.alphabet_size() } -> std::convertible_to<int>;
  { p.exponent() } -> std::convertible_to<double>;
  { p.empty_state() } -> std::same_as<typename P::State>;
  p.extend(a, sym, out);   // out = state(word . sym)
  p.concat(a, b, out);     // out = state(word_a . word_b)
  { p.log_value(a) } -> std::convertible_to<double>;
  { p.log_value_periodic(a) } -> std::convertible_to<double>;
  { p.min_step_log_gain() } -> std::convertible_to<double>;
};

/// Compensated log-sum-exp accumulator.
class LogSumExp {
 public:
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x > max_) {
      const double rescale = max_ == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(max_ - x);
      sum_ *= rescale;
      comp_ *= rescale;
      max_ = x;
    }
    const double y = std::exp(x - max_) - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }

  void merge(const LogSumExp& other) { add(other.log()); }

  double log() const {
    if (max_ == -std::numeric_limits<double>::infinity()) return max_;
    return max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Matrix product with an exact power-of-two scale factor held in log form,
/// so long products never overflow.
struct MatrixState {
  Matrix m;
  int exponent2 = 0;  ///< true product = m * 2^exponent2
};

namespace detail {

inline void renormalize(MatrixState& st) {
  const double big = st.m.cwiseAbs().maxCoeff();
  if (big > 0x1p+200 || (big > 0.0 && big < 0x1p-200)) {
    int e = 0;
    std::frexp(big, &e);
    st.m *= std::ldexp(1.0, -e);
    st.exponent2 += e;
  }
}

}  // namespace detail

/// Phi^s_A: log phi^s(A(I)) for a locally constant cocycle.
class SingularValuePotential {
 public:
  using State = MatrixState;

  explicit SingularValuePotential(Cocycle cocycle) : cocycle_(std::move(cocycle)) {
    gain_ = std::numeric_limits<double>::infinity();
    for (const auto& g : cocycle_.generators()) {
      const double smallest = singular_values(g).values.back();
      gain_ = std::min(gain_, cocycle_.s() * std::log(smallest));
    }
  }

  const Cocycle& cocycle() const noexcept { return cocycle_; }
  int alphabet_size() const noexcept { return cocycle_.symbols(); }
  double exponent() const noexcept { return cocycle_.s(); }

  State empty_state() const { return State{Matrix::Identity(cocycle_.d(), cocycle_.d()), 0}; }

  void extend(const State& prev, Symbol sym, State& out) const {
    out.m.noalias() = cocycle_.generator(sym) * prev.m;
    out.exponent2 = prev.exponent2;
    detail::renormalize(out);
  }

  void concat(const State& first, const State& second, State& out) const {
    out.m.noalias() = second.m * first.m;
    out.exponent2 = first.exponent2 + second.exponent2;
    detail::renormalize(out);
  }

  double log_value(const State& st) const {
    if (cocycle_.s() == 0.0) return 0.0;
    return log_phi_from_sorted(singular_values(st.m).values, cocycle_.s()) +
           cocycle_.s() * st.exponent2 * std::numbers::ln2;
  }

  double log_value_periodic(const State& st) const {
    if (cocycle_.s() == 0.0) return 0.0;
    return log_phi_from_sorted(eigen_moduli(st.m), cocycle_.s()) + cocycle_.s() * st.exponent2 * std::numbers::ln2;
  }

  /// Lower bound on log phi^s(A_i M) - log phi^s(M) over symbols i:
  /// s * log alpha_d(A_i), from alpha_j(MN) >= alpha_j(M) alpha_d(N).
  double min_step_log_gain() const noexcept { return gain_; }

  Matrix product(const State& st) const { return std::ldexp(1.0, st.exponent2) * st.m; }

 private:
  Cocycle cocycle_;
  double gain_ = 0.0;
};

/// psi_n(x, y) = phi_n(x) phi_n(y) on the product shift; pair symbol a*q + b.
template <WordPotential P>
class ProductPotential {
 public:
  struct State {
    typename P::State left;
    typename P::State right;
  };

  explicit ProductPotential(P base) : base_(std::move(base)), q_(base_.alphabet_size()) {}

  int alphabet_size() const noexcept { return q_ * q_; }
  double exponent() const noexcept { return base_.exponent(); }
  const P& base() const noexcept { return base_; }

  State empty_state() const { return State{base_.empty_state(), base_.empty_state()}; }

  void extend(const State& prev, Symbol sym, State& out) const {
    base_.extend(prev.left, sym / q_, out.left);
    base_.extend(prev.right, sym % q_, out.right);
  }

  void concat(const State& a, const State& b, State& out) const {
    base_.concat(a.left, b.left, out.left);
    base_.concat(a.right, b.right, out.right);
  }

  double log_value(const State& st) const { return base_.log_value(st.left) + base_.log_value(st.right); }
  double log_value_periodic(const State& st) const {
    return base_.log_value_periodic(st.left) + base_.log_value_periodic(st.right);
  }
  double min_step_log_gain() const { return 2.0 * base_.min_step_log_gain(); }

 private:
  P base_;
  int q_;
};

/// State of a whole word, built by successive extension.
template <WordPotential P>
typename P::State word_state(const P& pot, const Word& w) {
  auto st = pot.empty_state();
  auto tmp = st;
  for (Symbol s : w) {
    pot.extend(st, s, tmp);
    std::swap(st, tmp);
  }
  return st;
}

template <WordPotential P>
double log_potential(const P& pot, const Word& w) {
  return pot.log_value(word_state(pot, w));
}

}  // namespace subtherm
