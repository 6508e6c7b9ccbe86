#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "komatsu/error.hpp"
#include "komatsu/harmonic.hpp"
#include "komatsu/kernels.hpp"

using namespace komatsu;

TEST(Harmonic, HalfIntAndReps) {
  EXPECT_EQ(HalfInt::from_twice(3).str(), "3/2");
  EXPECT_EQ(HalfInt::from_int(-2).str(), "-2");
  EXPECT_TRUE(HalfInt::from_twice(4).is_integer());
  EXPECT_EQ(dim(Rep::su2_twice(3)), 4);
  EXPECT_EQ(dim(Rep::torus(-5)), 1);
  EXPECT_DOUBLE_EQ(casimir_eig(Rep::su2_twice(2)), 2.0);
  EXPECT_DOUBLE_EQ(casimir_eig(Rep::torus(3)), 9.0);
  EXPECT_DOUBLE_EQ(bracket(Rep::su2_twice(2)), std::sqrt(3.0));
  EXPECT_EQ(twice_weight(Rep::su2_twice(3), 0), -3);
  EXPECT_EQ(twice_weight(Rep::torus(2), 0), 4);
  EXPECT_THROW(Rep::su2_twice(-1), DomainError);
  EXPECT_THROW(parse_group_key("SO3"), ConfigError);
  EXPECT_EQ(parse_group_key("SU2"), GroupKind::SU2);
}

TEST(Harmonic, FieldSymbol) {
  const auto s = field_symbol(Rep::su2_twice(2));
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], cplx(0, -1));
  EXPECT_EQ(s[2], cplx(0, 1));
  EXPECT_EQ(field_symbol(Rep::torus(-3))[0], cplx(0, -3));
}

TEST(Harmonic, WignerKnownValues) {
  const double b = 0.83;
  EXPECT_NEAR(wigner_d(2, 0, 0, b), std::cos(b), 1e-14);
  EXPECT_NEAR(wigner_d(1, 1, 1, b), std::cos(b / 2), 1e-14);
  EXPECT_NEAR(std::abs(wigner_d(1, 1, -1, b)), std::sin(b / 2), 1e-14);
  EXPECT_NEAR(wigner_d(2, 2, 2, b), 0.5 * (1 + std::cos(b)), 1e-14);
}

class WignerOrthogonality : public ::testing::TestWithParam<int> {};

TEST_P(WignerOrthogonality, RowsAreOrthonormal) {
  const int t = GetParam();
  const double b = 1.234;
  Eigen::MatrixXd d(t + 1, t + 1);
  for (int a = 0; a <= t; ++a)
    for (int c = 0; c <= t; ++c) d(a, c) = wigner_d(t, 2 * a - t, 2 * c - t, b);
  EXPECT_LT((d * d.transpose() - Eigen::MatrixXd::Identity(t + 1, t + 1)).cwiseAbs().maxCoeff(), 1e-11);
}

// Both sides of the explicit-sum / eigen switch.
INSTANTIATE_TEST_SUITE_P(Spins, WignerOrthogonality, ::testing::Values(1, 4, 15, 16, 17, 18, 40, 80));

TEST(Harmonic, SpinHalfMatrixElements) {
  const double phi = 0.3, theta = 0.7, psi = 1.1;
  const cplx p1 = std::cos(theta / 2) * std::exp(cplx(0, (phi + psi) / 2));
  const cplx p2 = cplx(0, 1) * std::sin(theta / 2) * std::exp(cplx(0, (phi - psi) / 2));
  EXPECT_LT(std::abs(matrix_element(HalfInt{1}, HalfInt{1}, HalfInt{1}, phi, theta, psi) - p1), 1e-14);
  EXPECT_LT(std::abs(matrix_element(HalfInt{1}, HalfInt{1}, HalfInt{-1}, phi, theta, psi) - p2), 1e-14);
  EXPECT_THROW(matrix_element(HalfInt{1}, HalfInt{2}, HalfInt{1}, 0, 0, 0), IndexError);
}

TEST(Harmonic, RepMatricesAreSpecialUnitary) {
  const Point x{0.0, 0.4, 2.1, -0.9};
  for (int t = 0; t <= 8; ++t) {
    const CMatrix m = rep_matrix(Rep::su2_twice(t), x);
    EXPECT_LT((m * m.adjoint() - CMatrix::Identity(t + 1, t + 1)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(std::abs(m.determinant() - 1.0), 1e-12) << t;
  }
}

TEST(Harmonic, BasisLayout) {
  const Basis b(GroupKind::Torus, 2);
  ASSERT_EQ(b.size(), 5);
  EXPECT_EQ(b.rep_of(0).index, 0);
  EXPECT_EQ(b.rep_of(1).index, 1);
  EXPECT_EQ(b.rep_of(2).index, -1);
  const Basis s(GroupKind::SU2, 3);
  EXPECT_EQ(s.size(), 1 + 4 + 9 + 16);
  EXPECT_EQ(s.index(Rep::su2_twice(1), 1, 0), 1 + 2);
  EXPECT_TRUE(s.contains(Rep::su2_twice(3)));
  EXPECT_FALSE(s.contains(Rep::su2_twice(4)));
  EXPECT_THROW(s.rep_index(Rep::su2_twice(4)), IndexError);
  // Prefix property.
  const Basis big(GroupKind::SU2, 6);
  for (int i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s.rep_of(i), big.rep_of(i));
    EXPECT_EQ(s.entry(i).row, big.entry(i).row);
    EXPECT_EQ(s.entry(i).col, big.entry(i).col);
  }
}

TEST(Harmonic, GaussLegendre) {
  std::vector<double> x, w;
  gauss_legendre(10, x, w);
  double sum = 0, x8 = 0;
  for (int i = 0; i < 10; ++i) {
    sum += w[static_cast<std::size_t>(i)];
    x8 += w[static_cast<std::size_t>(i)] * std::pow(x[static_cast<std::size_t>(i)], 18);
  }
  EXPECT_NEAR(sum, 2.0, 1e-14);
  EXPECT_NEAR(x8, 2.0 / 19.0, 1e-14);
}

TEST(Harmonic, GridWeightsAndGate) {
  for (int t : {0, 3, 8, 20}) {
    const GroupGrid g = GroupGrid::su2(t);
    double sum = 0;
    for (double w : g.weights()) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-13);
    EXPECT_LT(g.theta_gate_error(), 1e-10) << t;
  }
  const GroupGrid tg = GroupGrid::torus(5);
  EXPECT_EQ(tg.size(), 11);
  EXPECT_NEAR(tg.weight(0), 1.0 / 11, 1e-16);
}

TEST(Harmonic, SchurOrthogonality) {
  const GroupGrid g = GroupGrid::su2(6);
  const Basis b = g.basis();
  CMatrix S(g.size(), b.size());
  for (int x = 0; x < g.size(); ++x) {
    const Point p = g.point(x);
    for (int i = 0; i < b.size(); ++i) S(x, i) = std::sqrt(dim(b.rep_of(i)) * g.weight(x)) * reference::basis_value(b, i, p);
  }
  EXPECT_LT((S.adjoint() * S - CMatrix::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Harmonic, NumericSymbolIsDiagonal) {
  const GroupGrid g = GroupGrid::su2(6);
  for (int t = 0; t <= 6; ++t) {
    CMatrix d = numeric_symbol(g, Rep::su2_twice(t), 5);
    const auto s = field_symbol(Rep::su2_twice(t));
    for (int a = 0; a <= t; ++a) d(a, a) -= s[static_cast<std::size_t>(a)];
    EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-10);
  }
  const GroupGrid tg = GroupGrid::torus(6);
  EXPECT_LT(std::abs(numeric_symbol(tg, Rep::torus(-4), 3)(0, 0) - cplx(0, -4)), 1e-10);
}

TEST(Harmonic, SpectralDerivativeOfTrigonometric) {
  const GroupGrid g = GroupGrid::torus(8);
  std::vector<cplx> f(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) f[static_cast<std::size_t>(i)] = std::sin(3 * g.point(i).t);
  const auto df = vector_field_apply(g, f);
  for (int i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(df[static_cast<std::size_t>(i)] - 3.0 * std::cos(3 * g.point(i).t)), 0.0, 1e-12);
}
