#include "helpers.hpp"
#include "oracles.hpp"
#include "subtherm/gl2.hpp"
#include "subtherm/typicality.hpp"

using namespace subtherm;
using namespace fixtures;

namespace {

Vector e(int i) {
  Vector v = Vector::Zero(2);
  v(i) = 1.0;
  return v;
}

bool has_line(const std::vector<Vector>& lines, const Vector& l) {
  for (const auto& x : lines)
    if (line_distance(x, l) < 1e-10) return true;
  return false;
}

double lower_left(const Matrix& m) { return std::abs(m(1, 0)) / m.norm(); }

}  // namespace

// ---------------------------------------------------------------- reducibility

TEST(Reducibility, DiagonalFamilyHasBothAxes) {
  const auto r = reducibility_2x2(diag_cocycle());
  EXPECT_FALSE(r.irreducible);
  EXPECT_FALSE(r.scalar_family);
  ASSERT_EQ(r.lines.size(), 2u);
  EXPECT_TRUE(has_line(r.lines, e(0)));
  EXPECT_TRUE(has_line(r.lines, e(1)));
}

TEST(Reducibility, SwapFamilyIsIrreducible) { EXPECT_TRUE(reducibility_2x2(swap_cocycle()).irreducible); }

TEST(Reducibility, ScalarFamily) {
  const auto r = reducibility_2x2(Cocycle({mat({{2, 0}, {0, 2}}), mat({{3, 0}, {0, 3}})}, 1.0));
  EXPECT_FALSE(r.irreducible);
  EXPECT_TRUE(r.scalar_family);
}

TEST(Reducibility, ScalarGeneratorsConstrainNothing) {
  const auto r = reducibility_2x2(Cocycle({mat({{2, 0}, {0, 2}}), mat({{1, 1}, {0, 1}})}, 1.0));
  EXPECT_FALSE(r.irreducible);
  ASSERT_EQ(r.lines.size(), 1u);
  EXPECT_TRUE(has_line(r.lines, e(0)));
}

TEST(Reducibility, RotationHasNoRealLine) {
  EXPECT_TRUE(reducibility_2x2(Cocycle({rotation(0.4), mat({{2, 0}, {0, 1}})}, 1.0)).irreducible);
}

// ---------------------------------------------------------------- triangularize

TEST(Triangularize, AlreadyTriangular) {
  const auto c = Cocycle({mat({{2, 1}, {0, 1}}), mat({{3, -1}, {0, 0.5}})}, 1.0);
  const auto t = triangularize(c, e(0));
  EXPECT_TRUE(t.conjugator.isApprox(Matrix::Identity(2, 2)));
  EXPECT_LT(t.residual, 1e-12);
  EXPECT_NEAR(t.log_a.values[1], std::log(3.0), 1e-14);
  EXPECT_NEAR(t.log_c.values[1], std::log(0.5), 1e-14);
}

TEST(Triangularize, SecondAxisGivesSwap) {
  const auto t = triangularize(diag_cocycle(), e(1));
  EXPECT_NEAR(std::abs(t.conjugator(0, 1)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(t.conjugator(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(t.conjugator(0, 0), 0.0, 1e-14);
  EXPECT_TRUE(t.triangular.generator(0).isApprox(mat({{1, 0}, {0, 2}})));
  EXPECT_TRUE(t.triangular.generator(1).isApprox(mat({{1, 0}, {0, 3}})));
}

TEST(Triangularize, RotatedFamilyRecoversRotation) {
  const Matrix r = rotation(0.9);
  const auto c = conjugate(Cocycle({mat({{2, 1}, {0, 1}}), mat({{3, 0.5}, {0, -1}})}, 1.0), r.inverse());
  // C^{-1}... with C = R^{-1} gives R A R^{-1}; its invariant line is R e_1.
  const Vector line = r * e(0);
  const auto t = triangularize(c, line);
  EXPECT_LT(line_distance(t.conjugator.col(0), line), 1e-12);
  for (int i = 0; i < 2; ++i) EXPECT_LT(lower_left(t.triangular.generator(i)), 1e-10);
  EXPECT_NEAR(std::exp(t.log_a.values[0]), 2.0, 1e-12);
  EXPECT_NEAR(std::exp(t.log_c.values[1]), 1.0, 1e-12);
}

TEST(Triangularize, RejectsNonInvariantLine) {
  Vector l(2);
  l << 1.0, 1.0;
  EXPECT_ERROR_KIND(triangularize(diag_cocycle(), l), ErrorKind::LineNotInvariant);
}

// ---------------------------------------------------------------- classify

TEST(Classify, ReducibleTwoStates) {
  const auto c = Cocycle({mat({{2, 0}, {0, 1}}), mat({{1, 0}, {0, 2}})}, 1.0);
  const auto r = classify(Subshift::full(2), c);
  EXPECT_EQ(r.tag, Tag::ReducibleTwoStates);
  ASSERT_TRUE(r.reduced);
  EXPECT_NEAR(r.reduced->pressures.first.value, std::log(3.0), 1e-9);
  EXPECT_NEAR(r.reduced->pressures.second.value, std::log(3.0), 1e-9);
  ASSERT_TRUE(r.reduced->cohomology);
  EXPECT_EQ(r.reduced->cohomology->witness.size(), 1u);
  EXPECT_FALSE(r.square);
}

TEST(Classify, ReducibleUnique) {
  const auto r = classify(Subshift::full(2), diag_cocycle());
  EXPECT_EQ(r.tag, Tag::ReducibleUnique);
  ASSERT_TRUE(r.reduced);
  const double pa = r.reduced->pressures.first.value, pc = r.reduced->pressures.second.value;
  EXPECT_NEAR(std::max(pa, pc), std::log(5.0), 1e-12);
  EXPECT_NEAR(std::min(pa, pc), std::log(2.0), 1e-12);
}

TEST(Classify, IrreducibleUnique) {
  const auto r = classify(Subshift::full(2), swap_cocycle());
  EXPECT_EQ(r.tag, Tag::IrreducibleUnique);
  EXPECT_FALSE(r.reduced);
}

TEST(Classify, IdenticalAntidiagonalIsReducibleInconclusive) {
  // A_1 = A_2 = [[0,2],[1,0]] preserves the eigenlines of its own matrix.
  const auto r = classify(Subshift::full(2), antidiagonal_cocycle(2.0, 2.0));
  EXPECT_TRUE(r.reducible);
  EXPECT_EQ(r.tag, Tag::Inconclusive);
}

TEST(Classify, AntidiagonalPeriodTwo) {
  const auto r = classify(Subshift::full(2), antidiagonal_cocycle());
  ASSERT_EQ(r.tag, Tag::AntidiagonalPeriodTwo) << r.reason;
  ASSERT_TRUE(r.square);
  ASSERT_TRUE(r.square->cohomology);
  EXPECT_LE(r.square->cohomology->witness.size(), 2u);
  EXPECT_LT(r.square->average_invariance_defect, 1e-10);
}

TEST(Classify, RejectsWrongDimensionAndNonPrimitive) {
  EXPECT_ERROR_KIND(classify(Subshift::full(2), identity_cocycle(2, 3)), ErrorKind::DimensionMismatch);
  EXPECT_ERROR_KIND(classify(Subshift(2, {1, 0, 0, 1}), diag_cocycle()), ErrorKind::NotPrimitive);
}

// ---------------------------------------------------------------- square analysis

TEST(SquareAnalysis, StandardAntidiagonalFamily) {
  const auto sq = square_analysis(Subshift::full(2), antidiagonal_cocycle());
  ASSERT_TRUE(sq.line_field_found);
  for (const auto& l : sq.line_field) EXPECT_LT(line_distance(l, e(0)), 1e-12);
  EXPECT_LT(sq.antidiagonal_residual, 1e-12);
  // With B = A, alpha on (x0 x1)(x2 x3) is log|a(x1)| and beta is log|a(x2)|:
  // both have block partition sums 2 (2 + 1/2) = 5.
  ASSERT_TRUE(sq.pressures);
  EXPECT_EQ(sq.pressures->relation, PressureRelation::Equal);
  EXPECT_NEAR(sq.pressures->first.value, std::log(5.0), 1e-12);
  EXPECT_NEAR(sq.pressures->second.value, std::log(5.0), 1e-12);
}

TEST(SquareAnalysis, ConjugatedCopyRecoversFrame) {
  const Matrix r = rotation(0.35) * mat({{1.5, 0.2}, {0, 1}});
  const auto base = antidiagonal_cocycle(3.0, 0.25);
  const auto c = conjugate(base, r.inverse());
  const auto a = square_analysis(Subshift::full(2), base);
  const auto b = square_analysis(Subshift::full(2), c);
  ASSERT_TRUE(b.line_field_found);
  EXPECT_LT(b.antidiagonal_residual, 1e-10);
  // Either axis of the square's splitting may serve as L_1.
  const bool first = line_distance(b.line_field[0], r * e(0)) < 1e-10;
  for (const auto& l : b.line_field) EXPECT_LT(line_distance(l, r * e(first ? 0 : 1)), 1e-10);
  ASSERT_TRUE(a.pressures && b.pressures);
  EXPECT_EQ(a.pressures->relation, b.pressures->relation);
  const double pa = std::max(a.pressures->first.value, a.pressures->second.value);
  const double pb = std::max(b.pressures->first.value, b.pressures->second.value);
  EXPECT_NEAR(pa, pb, 1e-10);
  if (line_distance(a.line_field[0], e(first ? 0 : 1)) < 1e-10) {
    for (const auto& [k, v] : a.lambda) EXPECT_NEAR(std::abs(b.lambda.at(k)), std::abs(v), 1e-9);
  }
}

TEST(SquareAnalysis, IrreducibleSquareHasNoLineField) {
  EXPECT_FALSE(square_analysis(Subshift::full(2), swap_cocycle()).line_field_found);
  // Burnside on the square generators A_i A_j.
  std::vector<Matrix> sq;
  const auto c = swap_cocycle();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) sq.push_back(c.generator(j) * c.generator(i));
  EXPECT_TRUE(irreducibility_check(Cocycle(sq, 1.0)).irreducible);
}

TEST(PressureCompare, ThreeWay) {
  EXPECT_EQ(compare_pressures({1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}).relation, PressureRelation::Equal);
  EXPECT_EQ(compare_pressures({1.0, 1.0, 1.0}, {1.1, 1.1, 1.1}).relation, PressureRelation::Unequal);
  EXPECT_EQ(compare_pressures({1.0, 0.9, 1.1}, {1.05, 1.0, 1.1}).relation, PressureRelation::Undecided);
}

// ---------------------------------------------------------------- holonomies

TEST(StableHolonomy, SamePointIsIdentity) {
  const auto z = homoclinic_point(Subshift::full(2), w("1"), w("2"));
  EXPECT_TRUE(stable_holonomy(flagship_cocycle(), z, z).matrix.isApprox(Matrix::Identity(2, 2)));
}

TEST(StableHolonomy, LocalStableSetIsIdentity) {
  // Pasts differ, coordinates >= 0 agree.
  SymbolicPoint x{{0}, {1, 0}, {0}, -1}, y{{1}, {0, 0}, {0}, -1};
  ASSERT_EQ(x.at(0), y.at(0));
  const auto h = stable_holonomy(flagship_cocycle(), x, y);
  EXPECT_TRUE(h.matrix.isApprox(Matrix::Identity(2, 2)));
  EXPECT_TRUE(h.trace.factors.empty());
}

TEST(StableHolonomy, FlagshipFiniteProduct) {
  const auto c = flagship_cocycle();
  const auto p = SymbolicPoint::periodic(w("1"));
  const auto z = homoclinic_point(Subshift::full(2), w("1"), w("2"));
  const auto h = stable_holonomy(c, z, p);
  EXPECT_EQ(h.trace.shift, 1);
  const Matrix expected = c.generator(0).inverse() * c.generator(1);
  EXPECT_LT((h.matrix - expected).norm(), 1e-14);
  EXPECT_LT((truncated_holonomy(c, z, p, 30) - h.matrix).norm(), 1e-8);
  EXPECT_TRUE(evaluate_trace(c, h.trace).isApprox(h.matrix, 1e-12));
}

TEST(StableHolonomy, NotStablyRelated) {
  EXPECT_ERROR_KIND(stable_holonomy(flagship_cocycle(), SymbolicPoint::periodic(w("1")), SymbolicPoint::periodic(w("2"))),
                    ErrorKind::NotStablyRelated);
}

TEST(UnstableHolonomy, Mirrors) {
  const auto c = flagship_cocycle();
  const auto p = SymbolicPoint::periodic(w("1"));
  const auto z = homoclinic_point(Subshift::full(2), w("1"), w("2"));
  EXPECT_TRUE(unstable_holonomy(c, z, z).matrix.isApprox(Matrix::Identity(2, 2)));
  // z and p agree on negative coordinates.
  EXPECT_TRUE(unstable_holonomy(c, p, z).matrix.isApprox(Matrix::Identity(2, 2)));
  // Shifted by one the insertion sits at -1.
  const auto z1 = z.shifted(1), p1 = p.shifted(1);
  const auto h = unstable_holonomy(c, p1, z1);
  const Matrix expected = c.generator(1) * c.generator(0).inverse();
  EXPECT_LT((h.matrix - expected).norm(), 1e-14);
  EXPECT_LT((truncated_holonomy(c, p1, z1, -30) - h.matrix).norm(), 1e-8);
  EXPECT_ERROR_KIND(unstable_holonomy(c, SymbolicPoint::periodic(w("1")), SymbolicPoint::periodic(w("2"))),
                    ErrorKind::NotUnstablyRelated);
}

TEST(HolonomyLoop, IdentityCocycle) {
  const auto z = homoclinic_point(Subshift::full(2), w("12"), w("11"));
  const auto loop = holonomy_loop(identity_cocycle(2, 2), SymbolicPoint::periodic(w("12")), z);
  EXPECT_TRUE(loop.matrix.isApprox(Matrix::Identity(2, 2)));
}

TEST(HolonomyLoop, FlagshipEntriesNonzero) {
  const auto c = flagship_cocycle();
  const auto loop = holonomy_loop(c, SymbolicPoint::periodic(w("1")), homoclinic_point(Subshift::full(2), w("1"), w("2")));
  const auto ref = oracle::mul(oracle::from_eigen(c.generator(0).inverse()), oracle::from_eigen(c.generator(1)));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_GT(std::abs(loop.matrix(i, j)), 1e-3);
      EXPECT_NEAR(loop.matrix(i, j), ref[i][j], 1e-14);
    }
  EXPECT_TRUE(evaluate_trace(c, loop.trace).isApprox(loop.matrix, 1e-12));
}

TEST(HolonomyLoop, TrivialInsertionIsRejectedUpstream) {
  EXPECT_ERROR_KIND(homoclinic_point(Subshift::full(2), w("1"), w("11")), ErrorKind::TrivialHomoclinic);
}

// ---------------------------------------------------------------- pinching, twisting

TEST(Pinching, DiagonalPasses) {
  const auto v = pinching_check(mat({{1.3, 0}, {0, 1}}));
  EXPECT_TRUE(v.pass);
  EXPECT_NEAR(v.min_gap, 0.3, 1e-14);
  EXPECT_NEAR(v.eigenvalues[0], 1.3, 1e-14);
}

TEST(Pinching, RotationFails) { EXPECT_FALSE(pinching_check(rotation(M_PI / 2)).pass); }

TEST(Pinching, EqualModuliFail) {
  EXPECT_FALSE(pinching_check(mat({{2, 0}, {0, 2}})).pass);
  EXPECT_FALSE(pinching_check(mat({{2, 0}, {0, -2}})).pass);
}

TEST(Twisting, IdentityNeverTwists) {
  EXPECT_FALSE(twisting_check(Matrix::Identity(2, 2), Matrix::Identity(2, 2)).pass);
}

TEST(Twisting, FullMatrixTwists) {
  const auto v = twisting_check(mat({{1, 1}, {1, 2}}), Matrix::Identity(2, 2));
  EXPECT_TRUE(v.pass);
  EXPECT_NEAR(v.min_abs, 1.0, 1e-14);
}

TEST(Twisting, FlagshipPasses) {
  const auto c = flagship_cocycle();
  const auto loop = holonomy_loop(c, SymbolicPoint::periodic(w("1")), homoclinic_point(Subshift::full(2), w("1"), w("2")));
  const auto pin = pinching_check(c.generator(0));
  ASSERT_TRUE(pin.pass);
  const auto v = twisting_check(loop.matrix, pin.eigenvectors);
  EXPECT_TRUE(v.pass);
  EXPECT_GT(v.min_abs, 0.05);
}

TEST(TTypicality, DimensionThreeProducts) {
  const Matrix psi = mat({{1, 2, 3}, {0.5, 1, 1}, {2, -1, 1}});
  for (const Matrix& p : {mat({{4, 0, 0}, {0, 2, 0}, {0, 0, 1}}), mat({{4, 0, 0}, {0, 2, 0}, {0, 0, 0.5}})}) {
    const auto pin = pinching_check(p);
    ASSERT_TRUE(pin.pass);
    const auto v = t_typicality_check(pin, psi, 2);
    EXPECT_TRUE(v.products_distinct);
    EXPECT_EQ(v.twisting.coefficients.rows(), 3);
  }
}

TEST(TTypicality, CoincidingProductsFail) {
  // 4*1 = 2*2 is impossible with simple spectrum, but 8*1 = 4*2 collides for t = 2 in d = 4.
  const auto pin = pinching_check(mat({{8, 0, 0, 0}, {0, 4, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 1}}));
  ASSERT_TRUE(pin.pass);
  std::mt19937_64 rng(1);
  const auto v = t_typicality_check(pin, oracle::random_invertible(rng, 4), 2);
  EXPECT_FALSE(v.products_distinct);
  EXPECT_FALSE(v.pass);
}

// ---------------------------------------------------------------- certificates

TEST(Certificate, Flagship) {
  const auto s = typicality_certificate(Subshift::full(2), flagship_cocycle(), 3, 3);
  ASSERT_TRUE(s.certificate);
  EXPECT_EQ(s.certificate->p_word, w("1"));
  EXPECT_EQ(s.certificate->z.core, w("2"));
  EXPECT_EQ(s.certificate->scope, Scope::WithinTheoremScope);
  ASSERT_EQ(s.certificate->per_t.size(), 1u);
  EXPECT_LT(s.fiber_bunching_margin, 1.0);
}

TEST(Certificate, IdentityExhausts) {
  const auto s = typicality_certificate(Subshift::full(2), identity_cocycle(2, 2), 3, 3);
  EXPECT_FALSE(s.certificate);
  ASSERT_FALSE(s.near_misses.empty());
  for (const auto& m : s.near_misses) EXPECT_EQ(m.stage.rfind("pinching", 0), 0u);
}

TEST(Certificate, DiagonalExhaustsAtTwisting) {
  const auto s = typicality_certificate(Subshift::full(2), diag_cocycle(), 3, 3);
  EXPECT_FALSE(s.certificate);
  bool saw_twisting = false;
  for (const auto& m : s.near_misses) saw_twisting = saw_twisting || m.stage.rfind("twisting", 0) == 0;
  EXPECT_TRUE(saw_twisting);
}

TEST(Certificate, NonFiberBunchedIsOutsideScope) {
  const auto c = Cocycle({mat({{3, 0}, {0, 1}}), mat({{1, 1}, {1, 2}})}, 1.0);
  const auto s = typicality_certificate(Subshift::full(2), c, 2, 2);
  ASSERT_TRUE(s.certificate);
  EXPECT_EQ(s.certificate->scope, Scope::OutsideTheoremScope);
}

TEST(Certificate, SquareSystem) {
  const auto sub = Subshift::full(2);
  const auto s = typicality_certificate(sub, flagship_cocycle(), 3, 3);
  ASSERT_TRUE(s.certificate);
  const auto p2 = certify_power(sub, flagship_cocycle(), *s.certificate, 2);
  ASSERT_TRUE(p2);
  EXPECT_EQ(p2->p_word.size(), 1u);
}

TEST(Certificate, DimensionThree) {
  const Matrix a = mat({{1.2, 0, 0}, {0, 1, 0}, {0, 0, 0.9}});
  std::mt19937_64 rng(4);
  const Matrix b = Matrix::Identity(3, 3) + 0.1 * oracle::random_matrix(rng, 3);
  const auto s = typicality_certificate(Subshift::full(2), Cocycle({a, b}, 1.0), 2, 2);
  ASSERT_TRUE(s.certificate);
  EXPECT_EQ(s.certificate->per_t.size(), 2u);
}
