#pragma once

// Holonomies of locally constant cocycles as exact finite products, the
// holonomy loop at a homoclinic point, pinching and twisting checks (also on
// exterior powers), and a deterministic search for typicality certificates.

#include <optional>
#include <string>

#include "subtherm/cocycle.hpp"
#include "subtherm/recoding.hpp"

namespace subtherm {

struct TraceFactor {
  Symbol symbol = 0;
  bool inverse = false;
  bool operator==(const TraceFactor&) const = default;
};

/// Matrix = product of the factors, left to right.
struct HolonomyTrace {
  std::vector<TraceFactor> factors;
  long shift = 0;  ///< n_0 (stable) or m_0 (unstable)
};

inline Matrix evaluate_trace(const Cocycle& cocycle, const HolonomyTrace& trace) {
  Matrix out = Matrix::Identity(cocycle.d(), cocycle.d());
  for (const auto& f : trace.factors) {
    const Matrix& g = cocycle.generator(f.symbol);
    out = f.inverse ? Matrix(out * g.inverse()) : Matrix(out * g);
  }
  return out;
}

struct Holonomy {
  Matrix matrix;
  HolonomyTrace trace;
};

namespace detail {

inline long lcm_len(std::size_t a, std::size_t b) { return static_cast<long>(std::lcm(a, b)); }

}  // namespace detail

/// H^s_{x,y} = A^{n0}(y)^{-1} A^{n0}(x) with n0 >= 0 the first coordinate
/// from which x and y agree; beyond it the local holonomy is the identity.
inline Holonomy stable_holonomy(const Cocycle& cocycle, const SymbolicPoint& x, const SymbolicPoint& y) {
  const long m = std::max({x.future_start(), y.future_start(), 0L});
  const long period = detail::lcm_len(x.future.size(), y.future.size());
  for (long i = m; i < m + period; ++i)
    if (x.at(i) != y.at(i)) fail(ErrorKind::NotStablyRelated, "futures of x and y never agree");
  long n0 = m;
  while (n0 > 0 && x.at(n0 - 1) == y.at(n0 - 1)) --n0;
  Holonomy out;
  out.trace.shift = n0;
  for (long i = 0; i < n0; ++i) out.trace.factors.push_back({y.at(i), true});
  for (long i = n0 - 1; i >= 0; --i) out.trace.factors.push_back({x.at(i), false});
  out.matrix = evaluate_trace(cocycle, out.trace);
  return out;
}

/// H^u_{x,y} = [A(y_{-1}) ... A(y_{-m0})] [A(x_{-1}) ... A(x_{-m0})]^{-1}.
inline Holonomy unstable_holonomy(const Cocycle& cocycle, const SymbolicPoint& x, const SymbolicPoint& y) {
  const long m = std::min({x.past_end(), y.past_end(), 0L});
  const long period = detail::lcm_len(x.past.size(), y.past.size());
  for (long i = m - period; i < m; ++i)
    if (x.at(i) != y.at(i)) fail(ErrorKind::NotUnstablyRelated, "pasts of x and y never agree");
  long m0 = -m;
  while (m0 > 0 && x.at(-m0) == y.at(-m0)) --m0;
  Holonomy out;
  out.trace.shift = m0;
  for (long i = 1; i <= m0; ++i) out.trace.factors.push_back({y.at(-i), false});
  for (long i = m0; i >= 1; --i) out.trace.factors.push_back({x.at(-i), true});
  out.matrix = evaluate_trace(cocycle, out.trace);
  return out;
}

/// Truncated limit A^n(y)^{-1} A^n(x) (n > 0) or its unstable mirror (n < 0).
inline Matrix truncated_holonomy(const Cocycle& cocycle, const SymbolicPoint& x, const SymbolicPoint& y, long n) {
  if (n >= 0) {
    const Matrix ax = word_product(cocycle, x.window(0, n));
    const Matrix ay = word_product(cocycle, y.window(0, n));
    return ay.inverse() * ax;
  }
  // A^{-k}(x) = (A^k(sigma^{-k} x))^{-1}
  const Matrix ax = word_product(cocycle, x.window(n, -n));
  const Matrix ay = word_product(cocycle, y.window(n, -n));
  return ay * ax.inverse();
}

struct HolonomyLoop {
  SymbolicPoint p;
  SymbolicPoint z;
  Matrix matrix;        ///< psi = H^s_{z,p} H^u_{p,z}
  Holonomy stable;      ///< H^s_{z,p}
  Holonomy unstable;    ///< H^u_{p,z}
  HolonomyTrace trace;  ///< stable factors then unstable factors
};

inline HolonomyLoop holonomy_loop(const Cocycle& cocycle, const SymbolicPoint& p, const SymbolicPoint& z) {
  HolonomyLoop out;
  out.p = p;
  out.z = z;
  out.stable = stable_holonomy(cocycle, z, p);
  out.unstable = unstable_holonomy(cocycle, p, z);
  out.matrix = out.stable.matrix * out.unstable.matrix;
  out.trace.factors = out.stable.trace.factors;
  out.trace.factors.insert(out.trace.factors.end(), out.unstable.trace.factors.begin(),
                           out.unstable.trace.factors.end());
  return out;
}

// ---------------------------------------------------------------------------
// Pinching and twisting

struct PinchingVerdict {
  bool pass = false;
  std::string reason;
  std::vector<double> eigenvalues;  ///< real, ordered by decreasing modulus
  Matrix eigenvectors;              ///< unit columns matching `eigenvalues`
  double min_gap = 0.0;             ///< min |lambda_i| - |lambda_{i+1}|
  double min_relative_gap = 0.0;    ///< min of the gap over |lambda_i|
  double max_imaginary = 0.0;       ///< relative to the spectral radius
  double residual = 0.0;            ///< max |P v - lambda v| / |P|
};

/// Simple real eigenvalues of pairwise distinct moduli.
inline PinchingVerdict pinching_check(const Matrix& p, double tol = 1e-6) {
  PinchingVerdict out;
  const auto d = p.rows();
  Eigen::EigenSolver<Matrix> es(p, true);
  const auto& ev = es.eigenvalues();
  double radius = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) radius = std::max(radius, std::abs(ev(i)));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(ev(a)) > std::abs(ev(b)); });
  out.eigenvectors = Matrix(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto i = order[static_cast<std::size_t>(k)];
    out.max_imaginary = std::max(out.max_imaginary, std::abs(ev(i).imag()) / radius);
    out.eigenvalues.push_back(ev(i).real());
    Vector v = es.eigenvectors().col(i).real();
    if (v.norm() == 0.0) v = es.eigenvectors().col(i).imag();
    out.eigenvectors.col(k) = v.normalized();
  }
  if (out.max_imaginary > tol) {
    out.reason = "non-real eigenvalues";
    return out;
  }
  out.min_gap = std::numeric_limits<double>::infinity();
  out.min_relative_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < out.eigenvalues.size(); ++k) {
    const double a = std::abs(out.eigenvalues[k]), b = std::abs(out.eigenvalues[k + 1]);
    out.min_gap = std::min(out.min_gap, a - b);
    out.min_relative_gap = std::min(out.min_relative_gap, (a - b) / a);
  }
  if (d == 1) out.min_gap = out.min_relative_gap = 0.0;
  const double pn = operator_norm(p);
  for (Eigen::Index k = 0; k < d; ++k)
    out.residual = std::max(out.residual, (p * out.eigenvectors.col(k) -
                                           out.eigenvalues[static_cast<std::size_t>(k)] * out.eigenvectors.col(k))
                                                  .norm() /
                                              pn);
  if (d > 1 && !(out.min_relative_gap > tol)) {
    out.reason = "eigenvalue moduli not separated";
    return out;
  }
  if (out.residual > 1e-10) {
    out.reason = "eigenvector residual above 1e-10";
    return out;
  }
  out.pass = true;
  return out;
}

struct TwistingVerdict {
  bool pass = false;
  Matrix coefficients;  ///< c(i, j): psi(v_i) = sum_j c(i, j) v_j
  double min_abs = 0.0;
  double min_relative = 0.0;  ///< min over i, j of |c(i, j)| / |row i|
};

inline TwistingVerdict twisting_check(const Matrix& psi, const Matrix& eigvecs, double tol = 1e-6) {
  if (psi.rows() != eigvecs.rows() || psi.cols() != eigvecs.cols())
    fail(ErrorKind::DimensionMismatch, "loop and eigenbasis sizes differ");
  require_invertible(eigvecs, "eigenbasis");
  TwistingVerdict out;
  out.coefficients = (eigvecs.inverse() * psi * eigvecs).transpose();
  out.min_abs = out.coefficients.cwiseAbs().minCoeff();
  out.min_relative = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < out.coefficients.rows(); ++i) {
    const double row = out.coefficients.row(i).norm();
    out.min_relative = std::min(out.min_relative, out.coefficients.row(i).cwiseAbs().minCoeff() / row);
  }
  out.pass = out.min_relative > tol;
  return out;
}

struct TTypicalityVerdict {
  int t = 1;
  bool products_distinct = false;
  double min_relative_gap = 0.0;  ///< between sorted t-fold modulus products
  TwistingVerdict twisting;
  bool pass = false;
};

/// Pinching of P^{wedge t} through t-fold eigenvalue products, and twisting of
/// psi^{wedge t} in the basis v_{i_1} ^ ... ^ v_{i_t}.
inline TTypicalityVerdict t_typicality_check(const PinchingVerdict& pinching, const Matrix& psi, int t,
                                             double tol = 1e-6) {
  const int d = static_cast<int>(psi.rows());
  if (t < 1 || t > d) fail(ErrorKind::OutOfRange, "t out of range");
  TTypicalityVerdict out;
  out.t = t;
  std::vector<double> products;
  for (const auto& idx : index_subsets(d, t)) {
    double m = 1.0;
    for (int i : idx) m *= std::abs(pinching.eigenvalues[static_cast<std::size_t>(i)]);
    products.push_back(m);
  }
  std::sort(products.begin(), products.end(), std::greater<>());
  out.min_relative_gap = products.size() > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t k = 0; k + 1 < products.size(); ++k)
    out.min_relative_gap = std::min(out.min_relative_gap, (products[k] - products[k + 1]) / products[k]);
  out.products_distinct = products.size() == 1 || out.min_relative_gap > tol;
  out.twisting = twisting_check(compound(psi, t), compound(pinching.eigenvectors, t), tol);
  out.pass = out.products_distinct && out.twisting.pass;
  return out;
}

// ---------------------------------------------------------------------------
// Certificates

enum class Scope { WithinTheoremScope, OutsideTheoremScope };

inline const char* to_string(Scope s) {
  return s == Scope::WithinTheoremScope ? "WithinTheoremScope" : "OutsideTheoremScope";
}

struct TypicalityCertificate {
  Word p_word;
  SymbolicPoint p;
  SymbolicPoint z;
  HolonomyLoop loop;
  Matrix periodic_matrix;
  PinchingVerdict pinching;
  std::vector<TTypicalityVerdict> per_t;  ///< t = 1 .. max(1, d-1)
  double fiber_bunching_margin = 0.0;
  Scope scope = Scope::WithinTheoremScope;
};

struct NearMiss {
  Word p_word;
  Word insertion;  ///< empty when pinching failed
  std::string stage;
  double margin = 0.0;
};

struct TypicalitySearch {
  std::optional<TypicalityCertificate> certificate;
  std::vector<NearMiss> near_misses;  ///< best margins first
  int candidates_tried = 0;
  double fiber_bunching_margin = 0.0;
};

/// Pinching at p, then twisting of the loop at z for every t in 1..max(1, d-1).
/// Returns nullopt with the failing stage recorded in `miss`.
inline std::optional<TypicalityCertificate> certify_pair(const Cocycle& cocycle, const Word& p_word,
                                                         const SymbolicPoint& z, double tol, NearMiss* miss = nullptr) {
  TypicalityCertificate cert;
  cert.p_word = p_word;
  cert.p = SymbolicPoint::periodic(p_word);
  cert.z = z;
  cert.periodic_matrix = word_product(cocycle, p_word);
  cert.pinching = pinching_check(cert.periodic_matrix, tol);
  if (!cert.pinching.pass) {
    if (miss) *miss = {p_word, {}, "pinching: " + cert.pinching.reason, cert.pinching.min_relative_gap};
    return std::nullopt;
  }
  cert.loop = holonomy_loop(cocycle, cert.p, z);
  const int d = cocycle.d();
  for (int t = 1; t <= std::max(1, d - 1); ++t) {
    auto v = t_typicality_check(cert.pinching, cert.loop.matrix, t, tol);
    const bool ok = v.pass;
    cert.per_t.push_back(std::move(v));
    if (!ok) {
      if (miss) {
        const auto& last = cert.per_t.back();
        *miss = {p_word, z.core, last.products_distinct ? "twisting t=" + std::to_string(t) : "t-pinching t=" + std::to_string(t),
                 last.products_distinct ? last.twisting.min_relative : last.min_relative_gap};
      }
      return std::nullopt;
    }
  }
  cert.fiber_bunching_margin = fiber_bunching_margin(cocycle, 1.0);
  cert.scope = cert.fiber_bunching_margin < 1.0 ? Scope::WithinTheoremScope : Scope::OutsideTheoremScope;
  return cert;
}

/// Periodic words by period, then insertions by length (multiples of the
/// period) and lexicographically; the first passing pair wins.
inline TypicalitySearch typicality_certificate(const Subshift& sub, const Cocycle& cocycle, int period_bound,
                                               int insertion_bound, double tol = 1e-6, std::size_t keep = 10) {
  if (period_bound < 1 || insertion_bound < 1) fail(ErrorKind::InvalidArgument, "search bounds must be positive");
  TypicalitySearch out;
  out.fiber_bunching_margin = fiber_bunching_margin(cocycle, 1.0);
  auto record = [&](NearMiss m) {
    out.near_misses.push_back(std::move(m));
    std::stable_sort(out.near_misses.begin(), out.near_misses.end(),
                     [](const NearMiss& a, const NearMiss& b) { return a.margin > b.margin; });
    if (out.near_misses.size() > keep) out.near_misses.resize(keep);
  };
  for (const auto& p : periodic_words(sub, period_bound)) {
    const auto per = static_cast<int>(p.size());
    const auto pin = pinching_check(word_product(cocycle, p), tol);
    if (!pin.pass) {
      ++out.candidates_tried;
      record({p, {}, "pinching: " + pin.reason, pin.min_relative_gap});
      continue;
    }
    for (int len = per; len <= insertion_bound; len += per) {
      for (const auto& ins : WordEnumerator(sub, len)) {
        if (!sub.is_admissible(concat(concat(p, ins), p))) continue;
        if (ins == repeat(p, len / per)) continue;
        ++out.candidates_tried;
        NearMiss miss;
        auto cert = certify_pair(cocycle, p, homoclinic_point(sub, p, ins), tol, &miss);
        if (cert) {
          out.certificate = std::move(cert);
          return out;
        }
        record(std::move(miss));
      }
    }
  }
  return out;
}

/// Re-checks a certificate's (p, z) for A^n over the n-step system.
inline std::optional<TypicalityCertificate> certify_power(const Subshift& sub, const Cocycle& cocycle,
                                                          const TypicalityCertificate& cert, int n, double tol = 1e-6) {
  const auto sys = block_system(sub, n, BlockAdjacency::Concatenate);
  const auto lifted_p = lift_point(sys, cert.p);
  const auto lifted_z = lift_point(sys, cert.z);
  return certify_pair(power_cocycle(sys, cocycle), lifted_p.future, lifted_z, tol);
}

}  // namespace subtherm
