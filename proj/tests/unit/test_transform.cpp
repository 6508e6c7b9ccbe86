#include <gtest/gtest.h>

#include <cmath>

#include "komatsu/error.hpp"
#include "komatsu/normalform.hpp"
#include "komatsu/transform.hpp"

using namespace komatsu;

namespace {

const GridPtr& t1() {
  static const GridPtr g = shared_grid(GroupKind::Torus, 4);
  return g;
}
const GridPtr& s3() {
  static const GridPtr g = shared_grid(GroupKind::SU2, 4);
  return g;
}

Spectrum exp_decay(GroupKind g1, int b1, GroupKind g2, int b2, double c, double s) {
  Spectrum sp(Basis(g1, b1), Basis(g2, b2));
  for (int i = 0; i < sp.coef.rows(); ++i)
    for (int j = 0; j < sp.coef.cols(); ++j) sp.coef(i, j) = std::exp(-c * std::pow(sp.scale(i, j), 1.0 / s));
  return sp;
}

}  // namespace

TEST(Transform, SharedGridIsMemoized) {
  EXPECT_EQ(shared_grid(GroupKind::SU2, 4).get(), s3().get());
  EXPECT_NE(shared_grid(GroupKind::SU2, 4, 2).get(), s3().get());
}

TEST(Transform, FullRoundTripAndPlancherel) {
  const Spectrum s = random_spectrum(GroupKind::Torus, 4, GroupKind::SU2, 4, 9);
  const GridFunction f = inverse(s, t1(), s3());
  EXPECT_NEAR(grid_norm(f), plancherel_norm(s), 1e-12 * plancherel_norm(s));
  const Spectrum back = forward_full(f);
  EXPECT_LT((back.coef - s.coef).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Transform, ConstantFunction) {
  const GridFunction one = GridFunction::sample(t1(), s3(), [](const Point&, const Point&) { return cplx(2.5); });
  const Spectrum s = forward_full(one);
  EXPECT_NEAR(std::abs(s.coef(0, 0) - 2.5), 0.0, 1e-13);
  EXPECT_LT(s.coef.cwiseAbs().sum() - 2.5, 1e-12);
}

TEST(Transform, PartialTransformsCommute) {
  const Spectrum s = random_spectrum(GroupKind::Torus, 4, GroupKind::SU2, 4, 10);
  const GridFunction f = inverse(s, t1(), s3());
  const PartialField p2 = forward_partial(f, 2);
  EXPECT_LT((partial_to_full(p2).coef - s.coef).cwiseAbs().maxCoeff(), 1e-12);
  const GridFunction back = partial_inverse(p2, s3());
  EXPECT_LT(grid_inner_norm_diff(back, f), 1e-12);
  const PartialField from_spec = spectrum_to_partial(s, t1());
  EXPECT_LT((from_spec.values - p2.values).cwiseAbs().maxCoeff(), 1e-12);
  const PartialField p1 = forward_partial(f, 1);
  EXPECT_FALSE(p1.spectral_second);
  EXPECT_LT(grid_inner_norm_diff(partial_inverse(p1, t1()), f), 1e-12);
}

TEST(Transform, SmallerBandTruncates) {
  const Spectrum s = random_spectrum(GroupKind::Torus, 4, GroupKind::SU2, 4, 11);
  const GridFunction f = inverse(s, t1(), s3());
  const Spectrum low = forward_full(f, 2, 2);
  EXPECT_EQ(low.coef.rows(), Basis(GroupKind::Torus, 2).size());
  EXPECT_LT((low.coef - s.coef.topLeftCorner(low.coef.rows(), low.coef.cols())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Transform, SpectrumAccessAndScale) {
  Spectrum s(Basis(GroupKind::Torus, 2), Basis(GroupKind::SU2, 2));
  s.at(Rep::torus(-1), 0, 0, Rep::su2_twice(2), 1, 2) = 3.0;
  EXPECT_EQ(s.coef(s.basis1.index(Rep::torus(-1), 0, 0), s.basis2.index(Rep::su2_twice(2), 1, 2)), cplx(3.0));
  EXPECT_DOUBLE_EQ(s.scale(0, 0), 2.0);
}

TEST(Transform, IndexFlatten) {
  EXPECT_EQ(index_flatten(1, 1, 1, 1, 2, 3), std::make_pair(1, 1));
  EXPECT_EQ(index_flatten(2, 3, 2, 1, 2, 3), std::make_pair(4, 5));
  EXPECT_THROW(index_flatten(4, 1, 1, 1, 2, 3), IndexError);
}

TEST(Transform, FieldSymbolIntertwines) {
  const Spectrum s = random_spectrum(GroupKind::Torus, 4, GroupKind::SU2, 4, 12);
  const GridFunction f = inverse(s, t1(), s3());
  const Spectrum d2 = forward_full(derivative(f, 2, Axis::Psi));
  EXPECT_LT((d2.coef - apply_field_symbol(s, 2).coef).cwiseAbs().maxCoeff(), 1e-10);
  const Spectrum d1 = forward_full(derivative(f, 1, Axis::T));
  EXPECT_LT((d1.coef - apply_field_symbol(s, 1).coef).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Transform, ShapeErrors) {
  GridFunction bad(t1(), s3());
  bad.values.resize(1, 1);
  EXPECT_THROW(grid_norm(bad), ShapeError);
  EXPECT_THROW(parse_class_mode("Nope"), ConfigError);
  EXPECT_EQ(parse_class_mode("BeurlingDistribution"), ClassMode::BeurlingDistribution);
}

TEST(Transform, ClassifyFunctionModes) {
  const Spectrum sp = exp_decay(GroupKind::Torus, 16, GroupKind::SU2, 32, 1.0, 1.0);
  const std::vector<double> N{0.25, 0.5, 2.0, 4.0};
  const auto w = WeightSequence::gevrey(1.0);
  const ClassReport r = decay_classify(sp, w, N, ClassMode::RoumieuFunction);
  EXPECT_TRUE(r.consistent);
  EXPECT_TRUE(r.rows[0].bounded);
  EXPECT_FALSE(r.rows[3].bounded);
  ASSERT_TRUE(r.critical_N.has_value());
  ASSERT_TRUE(r.fitted_rate.has_value());
  EXPECT_NEAR(*r.fitted_rate, 1.0, 0.1);
  // Beurling needs every N.
  EXPECT_FALSE(decay_classify(sp, w, N, ClassMode::BeurlingFunction).consistent);
}

TEST(Transform, ClassifyDistributionModes) {
  // Polynomially growing coefficients are distributions of every class.
  Spectrum sp(Basis(GroupKind::Torus, 16), Basis(GroupKind::SU2, 16));
  for (int i = 0; i < sp.coef.rows(); ++i)
    for (int j = 0; j < sp.coef.cols(); ++j) sp.coef(i, j) = std::pow(sp.scale(i, j), 3.0);
  const auto w = WeightSequence::gevrey(1.0);
  EXPECT_TRUE(decay_classify(sp, w, {0.5, 1.0, 2.0}, ClassMode::BeurlingDistribution).consistent);
  EXPECT_TRUE(decay_classify(sp, w, {0.5, 1.0, 2.0}, ClassMode::RoumieuDistribution).consistent);
  EXPECT_FALSE(decay_classify(sp, w, {0.5, 1.0}, ClassMode::RoumieuFunction).consistent);
}

TEST(Transform, PartialDecayCheck) {
  const GridPtr g1 = shared_grid(GroupKind::Torus, 8);
  const GridPtr g2 = shared_grid(GroupKind::SU2, 8);
  const GridFunction f = GridFunction::sample(g1, g2, [](const Point& x, const Point& y) {
    return std::exp(cplx(0, std::sin(x.t))) * eval_named(NamedFn::P1, y);
  });
  const auto rep = partial_decay_check(f, WeightSequence::gevrey(1.0), 3, {0.25, 0.5}, {1.0, 2.0});
  EXPECT_EQ(rep.alpha_max, 3);
  EXPECT_EQ(rep.multi_indices, 4);
  EXPECT_EQ(rep.table.size(), 4u);
  EXPECT_TRUE(std::isfinite(rep.best.C));
}
