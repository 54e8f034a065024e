#pragma once

// Small dense linear algebra on top of Eigen: singular values, eigenvalue
// moduli, compound matrices and line geometry in the plane.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "subtherm/error.hpp"

namespace subtherm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Singular values, nonincreasing.
struct SingularData {
  std::vector<double> values;
};

inline SingularData singular_values(const Matrix& m) {
  SingularData out;
  if (m.rows() != m.cols()) fail(ErrorKind::DimensionMismatch, "singular_values expects a square matrix");
  const auto d = m.rows();
  if (d == 1) {
    out.values = {std::abs(m(0, 0))};
  } else if (d == 2) {
    const double a = m(0, 0), b = m(0, 1), c = m(1, 0), e = m(1, 1);
    const double plus = std::hypot(a + e, b - c);
    const double minus = std::hypot(a - e, b + c);
    const double top = 0.5 * (plus + minus);
    const double det = std::abs(a * e - b * c);
    out.values = {top, top > 0.0 ? det / top : 0.0};
  } else {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    out.values.assign(sv.data(), sv.data() + sv.size());
  }
  return out;
}

inline double operator_norm(const Matrix& m) { return singular_values(m).values.front(); }

inline double condition_number(const Matrix& m) {
  const auto sv = singular_values(m).values;
  return sv.back() > 0.0 ? sv.front() / sv.back() : std::numeric_limits<double>::infinity();
}

/// log of the singular value function applied to a nonincreasing sequence of
/// positive numbers (singular values, or eigenvalue moduli).
inline double log_phi_from_sorted(const std::vector<double>& sorted, double s) {
  const int d = static_cast<int>(sorted.size());
  if (s < 0.0) fail(ErrorKind::InvalidArgument, "exponent s must be nonnegative");
  if (s == 0.0) return 0.0;
  if (s > d) {
    double log_det = 0.0;
    for (double v : sorted) log_det += std::log(v);
    return (s / d) * log_det;
  }
  const int whole = static_cast<int>(std::floor(s));
  const double frac = s - whole;
  double out = 0.0;
  for (int i = 0; i < whole; ++i) out += std::log(sorted[static_cast<std::size_t>(i)]);
  if (frac > 0.0 && whole < d) out += frac * std::log(sorted[static_cast<std::size_t>(whole)]);
  return out;
}

inline std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  std::vector<std::complex<double>> out;
  if (m.rows() == 1) {
    out.emplace_back(m(0, 0), 0.0);
    return out;
  }
  Eigen::EigenSolver<Matrix> es(m, false);
  const auto& ev = es.eigenvalues();
  out.assign(ev.data(), ev.data() + ev.size());
  return out;
}

/// Eigenvalue moduli, nonincreasing.
inline std::vector<double> eigen_moduli(const Matrix& m) {
  std::vector<double> out;
  for (const auto& z : eigenvalues(m)) out.push_back(std::abs(z));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

/// All t-subsets of {0..d-1} in lexicographic order.
inline std::vector<std::vector<int>> index_subsets(int d, int t) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (t == 0 || t > d) return out;
  while (true) {
    out.push_back(idx);
    int i = t - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == d - t + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < t; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

/// t-th compound matrix: minors det M[I, J] over t-subsets in
/// lexicographic order (the matrix of M acting on the t-th exterior power).
inline Matrix compound(const Matrix& m, int t) {
  const int d = static_cast<int>(m.rows());
  if (t < 1 || t > d) fail(ErrorKind::OutOfRange, "exterior power index out of range");
  const auto subsets = index_subsets(d, t);
  const auto n = static_cast<Eigen::Index>(subsets.size());
  Matrix out(n, n);
  Matrix minor(t, t);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j)
          minor(i, j) = m(subsets[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)],
                          subsets[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]);
      out(r, c) = t == 1 ? minor(0, 0) : minor.determinant();
    }
  return out;
}

// ---------------------------------------------------------------------------
// Lines in R^2

/// Unit direction with angle in [0, pi).
inline Vector canonical_line(Vector v) {
  v.normalize();
  if (v(1) < 0.0 || (v(1) == 0.0 && v(0) < 0.0)) v = -v;
  return v;
}

inline double line_angle(const Vector& v) { return std::atan2(v(1), v(0)); }

/// |sin| of the angle between two lines.
inline double line_distance(const Vector& a, const Vector& b) {
  return std::abs(a(0) * b(1) - a(1) * b(0)) / (a.norm() * b.norm());
}

/// How far M moves the line spanned by v, relative to |M|.
inline double line_invariance_residual(const Matrix& m, const Vector& v) {
  const Vector mv = m * v;
  const double scale = m.norm() * v.norm();
  return std::abs(mv(0) * v(1) - mv(1) * v(0)) / (scale * v.norm());
}

inline bool is_scalar_2x2(const Matrix& m, double rel = 1e-12) {
  const double half_trace = 0.5 * m.trace();
  Matrix diff = m;
  diff(0, 0) -= half_trace;
  diff(1, 1) -= half_trace;
  return diff.norm() <= rel * m.norm();
}

/// Real eigenlines of a non-scalar 2x2 matrix (zero, one or two lines).
inline std::vector<Vector> eigenlines_2x2(const Matrix& m, double tol = 1e-8) {
  std::vector<Vector> out;
  const double a = m(0, 0), b = m(0, 1), c = m(1, 0), e = m(1, 1);
  const double scale2 = m.squaredNorm();
  const double disc = (a - e) * (a - e) + 4.0 * b * c;
  auto kernel_of = [&](double lambda) {
    const double r1n = std::hypot(a - lambda, b), r2n = std::hypot(c, e - lambda);
    Vector v(2);
    if (r1n >= r2n)
      v << -b, a - lambda;
    else
      v << e - lambda, -c;
    if (v.norm() == 0.0) v << 1.0, 0.0;
    return canonical_line(v);
  };
  if (disc < -tol * tol * scale2) return out;
  if (std::abs(disc) <= tol * tol * scale2) {
    out.push_back(kernel_of(0.5 * (a + e)));
    return out;
  }
  const double root = std::sqrt(disc);
  const double tr = a + e;
  // Stable pair of roots.
  const double big = 0.5 * (tr + std::copysign(root, tr == 0.0 ? 1.0 : tr));
  const double det = a * e - b * c;
  const double small = big != 0.0 ? det / big : 0.5 * (tr - root);
  out.push_back(kernel_of(big));
  out.push_back(kernel_of(small));
  return out;
}

}  // namespace subtherm
