#pragma once

#include <gtest/gtest.h>

#include <initializer_list>

#include "subtherm/cocycle.hpp"

namespace fixtures {

using subtherm::Cocycle;
using subtherm::Matrix;
using subtherm::Subshift;

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

inline Cocycle identity_cocycle(int q, int d = 1, double s = 1.0) {
  return Cocycle(std::vector<Matrix>(static_cast<std::size_t>(q), Matrix::Identity(d, d)), s);
}

inline Cocycle diag_cocycle(double s = 1.0) { return Cocycle({mat({{2, 0}, {0, 1}}), mat({{3, 0}, {0, 1}})}, s); }

inline Cocycle swap_cocycle(double s = 1.0) { return Cocycle({mat({{2, 0}, {0, 1}}), mat({{0, 1}, {1, 0}})}, s); }

inline Cocycle flagship_cocycle(double s = 1.0) {
  const Matrix a2 = mat({{1, 0.1}, {0.1, 1}}) / std::sqrt(0.99);
  return Cocycle({mat({{1.3, 0}, {0, 1}}), a2}, s);
}

inline Cocycle antidiagonal_cocycle(double a1 = 2.0, double a2 = 0.5) {
  return Cocycle({mat({{0, a1}, {1, 0}}), mat({{0, a2}, {1, 0}})}, 1.0);
}

inline Matrix rotation(double theta) {
  return mat({{std::cos(theta), -std::sin(theta)}, {std::sin(theta), std::cos(theta)}});
}

inline subtherm::Word w(const std::string& s) { return subtherm::word_from_string(s); }

}  // namespace fixtures

#define EXPECT_ERROR_KIND(stmt, expected_kind)                                  \
  do {                                                                          \
    try {                                                                       \
      stmt;                                                                     \
      ADD_FAILURE() << "expected " << subtherm::to_string(expected_kind);       \
    } catch (const subtherm::Error& e) {                                        \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                           \
    }                                                                           \
  } while (0)
