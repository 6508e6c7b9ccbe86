#include <gtest/gtest.h>

#include <cmath>

#include "komatsu/diophantine.hpp"
#include "komatsu/error.hpp"

using namespace komatsu;

namespace {

const GroupPair kT1S3{GroupKind::Torus, GroupKind::SU2};
const GroupPair kS3S3{GroupKind::SU2, GroupKind::SU2};

ContinuedFraction tower() { return ContinuedFraction::factorial_tower(6); }

ExactComplex imag(const BigRational& r) { return ExactComplex{{}, AlphaAffine::rational(r)}; }

}  // namespace

TEST(Diophantine, ConvergentsExact) {
  const auto cf = tower();
  EXPECT_EQ(to_string(cf.p(0)), "10");
  EXPECT_EQ(to_string(cf.q(1)), "100");
  EXPECT_EQ(to_string(cf.p(2)), "1001000010");
  EXPECT_EQ(to_string(cf.q(2)), "100000001");
  const auto cs = cf.convergents(2);
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(to_string(cs[1]), "1001/100");
  EXPECT_THROW(cf.p(7), PrecisionCap);
  EXPECT_TRUE(cf.is_factorial_tower());
}

TEST(Diophantine, DeterminantIdentity) {
  const auto cf = tower();
  for (int n = 1; n <= 6; ++n) {
    const BigInt d = cf.p(n) * cf.q(n - 1) - cf.p(n - 1) * cf.q(n);
    EXPECT_EQ(abs(d), 1) << n;
  }
}

TEST(Diophantine, EnclosureAndApprox) {
  const auto cf = tower();
  const auto [lo, hi] = cf.enclose(3);
  EXPECT_LT(lo, hi);
  EXPECT_EQ(hi - lo, make_rational(1, cf.q(2) * cf.q(3)));
  EXPECT_NEAR(cf.approx(), 1001000010.0 / 100000001.0, 1e-12);
  EXPECT_LT(cf.approx_error(), 1e-15);
  EXPECT_THROW(cf.enclose(0), DomainError);
}

TEST(Diophantine, LadderAndBestApproximation) {
  const auto cf = tower();
  EXPECT_EQ(cf.ladder_rung(BigInt(1)), 0);
  EXPECT_EQ(cf.ladder_rung(BigInt(100)), 1);
  EXPECT_EQ(cf.ladder_rung(BigInt(99)), 0);
  EXPECT_EQ(cf.best_approx_lower_bound(BigInt(150)), make_rational(1, cf.q(1) + cf.q(2)));
}

TEST(Diophantine, LiouvilleWitnesses) {
  const auto ws = liouville_witnesses(tower(), 4);
  ASSERT_EQ(ws.size(), 5u);
  for (const auto& w : ws) {
    if (w.n >= 1) EXPECT_TRUE(w.holds_power) << w.n;
    EXPECT_EQ(w.bound, make_rational(1, tower().q(w.n + 1)));
  }
}

TEST(Diophantine, AlphaAffineArithmetic) {
  const AlphaAffine a{BigRational(1, 2), -1};
  EXPECT_EQ((a + AlphaAffine::alpha()).str(), "1/2");
  EXPECT_TRUE((a - a).is_zero());
  EXPECT_NEAR(a.to_double(10.0), -9.5, 1e-15);
  EXPECT_GT(a.abs_lower(tower()), 9.0);
  EXPECT_EQ(AlphaAffine::alpha().abs_lower(tower()) > 10.0, true);
  EXPECT_FALSE(AlphaAffine::alpha().is_rational());
}

TEST(Diophantine, GroupPairNames) {
  EXPECT_EQ(group_pair_name(kT1S3), "t1xs3");
  EXPECT_EQ(parse_group_pair("s3xs3"), kS3S3);
  EXPECT_THROW(parse_group_pair("bogus"), ConfigError);
}

TEST(Diophantine, ModelIntegers) {
  const DenominatorModel m(AlphaAffine::alpha(), imag(BigRational(1, 2)), tower());
  EXPECT_TRUE(m.exact());
  EXPECT_FALSE(m.resonant(0, 0));
  const auto e = m.evaluate(-2002, 200);
  EXPECT_FALSE(e.resonant);
  EXPECT_GT(e.lower, 0.0);
  EXPECT_LE(e.lower, e.approx);
  const DenominatorModel z(AlphaAffine::alpha(), {}, tower());
  EXPECT_TRUE(z.resonant(0, 0));
  EXPECT_FALSE(z.resonant(4, 0));
  EXPECT_FALSE(z.resonant(0, 2));
}

TEST(Diophantine, FloatModelCertifiesNothing) {
  const auto m = DenominatorModel::from_float(10.01, {0.0, 0.5});
  EXPECT_FALSE(m.exact());
  EXPECT_THROW(resonance_set(m, kT1S3, 10), UncertifiedInput);
  EXPECT_FALSE(scan_small_divisors(m, kT1S3, 50).exact);
  const auto r = certify_condition2(m, kT1S3, WeightSequence::gevrey(1.0), 1.0, Quantifier::Roumieu, {25, 50});
  EXPECT_NE(r.verdict, "consistent");
}

TEST(Diophantine, ResonanceSetIrrationalVsRational) {
  const DenominatorModel irr(AlphaAffine::alpha(), {}, tower());
  const auto inv = resonance_set(irr, kT1S3, 50);
  EXPECT_FALSE(inv.finite);
  ASSERT_EQ(inv.weight_pairs.size(), 1u);
  EXPECT_EQ(inv.weight_pairs[0], std::make_pair(0LL, 0LL));

  const DenominatorModel half(AlphaAffine::alpha(), imag(BigRational(1, 2)), tower());
  const auto none = resonance_set(half, kT1S3, 50);
  EXPECT_TRUE(none.finite);
  EXPECT_EQ(none.count, 0);

  const DenominatorModel rat(AlphaAffine::rational(1), {}, tower());
  const auto many = resonance_set(rat, kT1S3, 20);
  EXPECT_FALSE(many.finite);
  EXPECT_GT(many.weight_pairs.size(), 1u);
}

TEST(Diophantine, ScanFindsSmallDivisorAtWitnessShell) {
  const DenominatorModel m(AlphaAffine::alpha(), {}, tower());
  const auto scan = scan_small_divisors(m, kT1S3, 200);
  EXPECT_EQ(scan.resonant_pairs, 1);
  double best = 1e300;
  for (const auto& s : scan.shells) {
    EXPECT_LE(s.min_lower, s.min_approx + 1e-15);
    if (s.min_approx > 0) best = std::min(best, s.min_approx);
  }
  // |k + alpha m| with m = 1/2 near k = -5: 0.005.
  EXPECT_NEAR(best, 0.005, 1e-9);
  const std::string csv = shells_csv(scan, kT1S3);
  EXPECT_EQ(csv.rfind("shell,min_denominator", 0), 0u);
}

TEST(Diophantine, Condition2IsCertified) {
  const DenominatorModel m(AlphaAffine::alpha(), {}, tower());
  for (double N : {0.5, 1.0}) {
    const auto r = certify_condition2(m, kT1S3, WeightSequence::gevrey(1.0), N, Quantifier::Roumieu, {250, 500, 1000});
    EXPECT_EQ(r.verdict, "consistent");
    EXPECT_GT(r.C_N, 0.0);
    EXPECT_TRUE(r.ladder.available);
    EXPECT_GE(r.ladder.through, 3);
    EXPECT_GE(r.fits.back().log_C, r.ladder.log_C_lower - 1e-9);
  }
}

TEST(Diophantine, Condition2BatchMatchesSingle) {
  const DenominatorModel m(AlphaAffine::alpha(), imag(BigRational(1, 2)), tower());
  const std::vector<FitRequest> reqs{{WeightSequence::gevrey(1.0), 1.0}, {WeightSequence::gevrey(2.0), 0.5}};
  const auto many = certify_condition2_many(m, kT1S3, reqs, Quantifier::Beurling, {250, 500});
  ASSERT_EQ(many.size(), 2u);
  const auto one = certify_condition2(m, kT1S3, WeightSequence::gevrey(2.0), 0.5, Quantifier::Beurling, {250, 500});
  EXPECT_DOUBLE_EQ(many[1].C_N, one.C_N);
}

TEST(Diophantine, FitConstantsMonotoneInCutoff) {
  const DenominatorModel m(AlphaAffine::alpha(), {}, tower());
  const auto fits = fit_constants(m, kS3S3, {50, 100, 200}, {{WeightSequence::gevrey(1.0), 1.0}});
  ASSERT_EQ(fits.size(), 1u);
  ASSERT_EQ(fits[0].size(), 3u);
  EXPECT_GE(fits[0][0].log_C, fits[0][1].log_C);
  EXPECT_GE(fits[0][1].log_C, fits[0][2].log_C);
}

TEST(Diophantine, SmoothAnalysis) {
  const DenominatorModel m(AlphaAffine::alpha(), {}, tower());
  const auto sa = smooth_analysis(m, kT1S3);
  EXPECT_TRUE(sa.applicable);
  EXPECT_TRUE(sa.refuted);
  EXPECT_TRUE(sa.witness_family_recurs);
  EXPECT_FALSE(sa.witnesses.empty());
  for (const auto& w : sa.witnesses) EXPECT_TRUE(w.exact_check);

  // Re q0 != 0 bounds |sigma| away from zero.
  const DenominatorModel re(AlphaAffine::alpha(), ExactComplex{AlphaAffine::rational(1), {}}, tower());
  const auto sr = smooth_analysis(re, kT1S3);
  EXPECT_FALSE(sr.refuted);
}
