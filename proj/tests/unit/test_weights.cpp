#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "komatsu/error.hpp"
#include "komatsu/weights.hpp"

using namespace komatsu;

namespace {

double brute_associated(const WeightSequence& w, double r, int kmax) {
  double best = 0.0;
  for (int k = 1; k <= kmax; ++k) best = std::max(best, k * std::log(r) - w.log_value(k));
  return best;
}

}  // namespace

TEST(Weights, GevreyLogValues) {
  const auto w = WeightSequence::gevrey(2.0);
  EXPECT_DOUBLE_EQ(w.log_value(0), 0.0);
  EXPECT_NEAR(w.value(3), 36.0, 1e-12);
  EXPECT_NEAR(w.log_ratio(4), 2.0 * std::log(5.0), 1e-12);
  EXPECT_FALSE(w.kmax().has_value());
  EXPECT_EQ(w.describe(), "gevrey(s=2)");
  ASSERT_TRUE(w.witness().has_value());
  EXPECT_DOUBLE_EQ(w.witness()->A, 4.0);
}

TEST(Weights, RejectsBadInput) {
  EXPECT_THROW(WeightSequence::gevrey(0.5), DomainError);
  EXPECT_THROW(WeightSequence::custom({}), InvalidSequence);
  EXPECT_THROW(WeightSequence::custom({1.0, -2.0}), InvalidSequence);
  EXPECT_THROW(WeightSequence::gevrey(1.0).log_value(-1), IndexError);
  EXPECT_THROW(WeightSequence::custom({1.0, 1.0}).log_value(5), IndexError);
  EXPECT_THROW(associated(WeightSequence::gevrey(1.0), -1.0), DomainError);
}

TEST(Weights, AssociatedAtZeroAndKnownValues) {
  const auto w1 = WeightSequence::gevrey(1.0);
  EXPECT_EQ(associated_value(w1, 0.0), 0.0);
  EXPECT_EQ(associated(w1, 2.0).value, std::log(2.0));
  EXPECT_NEAR(associated_value(WeightSequence::gevrey(2.0), 4.0), 1.386294, 5e-7);
  // r below M_1/M_0 gives the k = 0 term.
  EXPECT_EQ(associated_value(w1, 0.5), 0.0);
}

TEST(Weights, AssociatedMatchesBruteForce) {
  for (double s : {1.0, 1.5, 2.0, 3.0}) {
    const auto w = WeightSequence::gevrey(s);
    for (double r : {0.1, 0.9, 1.0, 3.7, 10.0, 123.0, 1000.0}) {
      EXPECT_EQ(associated(w, r).value, brute_associated(w, r, 5000)) << "s=" << s << " r=" << r;
      EXPECT_NEAR(associated_fast(w, r), associated(w, r).value, 1e-12);
    }
  }
}

TEST(Weights, AssociatedArgmaxIsFloorRoot) {
  const auto w = WeightSequence::gevrey(2.0);
  const auto q = associated(w, 30.0);
  EXPECT_EQ(q.argmax, static_cast<int>(std::floor(std::sqrt(30.0))));
}

TEST(Weights, CustomTableExhaustion) {
  const auto w = WeightSequence::custom({1.0, 1.0, 2.0, 6.0});
  EXPECT_NO_THROW(associated(w, 1.5));
  EXPECT_THROW(associated(w, 100.0), NoConvergence);
}

TEST(Weights, GevreyLowerBoundIsBelowValue) {
  for (double s : {1.0, 2.0}) {
    for (double r : {2.0, 10.0, 500.0}) {
      EXPECT_LE(gevrey_associated_lower_bound_log(s, std::log(r)), associated_value(WeightSequence::gevrey(s), r) + 1e-12);
    }
  }
  EXPECT_TRUE(std::isinf(gevrey_associated_lower_bound_log(1.0, 1e6)));
}

TEST(Weights, GevreyPassesAxioms) {
  for (double s : {1.0, 2.0, 3.0}) {
    const auto rep = check_axioms(WeightSequence::gevrey(s), 50);
    EXPECT_TRUE(rep.all_pass()) << s;
    EXPECT_TRUE(rep.get("LC").pass);
  }
  EXPECT_TRUE(check_axioms(WeightSequence::gevrey(2.0), 40, true).all_pass());
  EXPECT_THROW(check_axioms(WeightSequence::gevrey(1.0), 1), DomainError);
}

TEST(Weights, CustomLogConvexityFailureIsLocated) {
  const auto rep = check_axioms(WeightSequence::custom({1, 1, 0.1, 5, 100}), 4);
  const auto& lc = rep.get("LC");
  EXPECT_FALSE(lc.pass);
  ASSERT_TRUE(lc.first_failure.has_value());
  EXPECT_EQ(*lc.first_failure, 1);
  EXPECT_LT(lc.margin, 0.0);
  EXPECT_THROW(rep.get("nonexistent"), IndexError);
}

TEST(Weights, CustomTableOfGevreyValuesPasses) {
  std::vector<double> t;
  double f = 1.0;
  for (int k = 0; k <= 30; ++k) {
    if (k > 0) f *= k;
    t.push_back(f);
  }
  EXPECT_TRUE(check_axioms(WeightSequence::custom(t), 30).get("LC").pass);
}

TEST(Weights, Inequalities) {
  for (double s : {1.0, 2.0, 3.0}) {
    const auto w = WeightSequence::gevrey(s);
    for (double r : {0.3, 1.0, 7.0, 40.0}) {
      for (double t : {0.5, 2.0, 30.0}) {
        EXPECT_TRUE(check_inequality_prop31(w, r, t).pass());
        for (int k = 0; k < 5; ++k) EXPECT_TRUE(check_inequality_prop32(w, r, t, k).pass());
      }
    }
  }
  EXPECT_THROW(check_inequality_prop31(WeightSequence::custom({1, 1, 2}), 1.0, 1.0), MissingWitness);
  EXPECT_THROW(check_inequality_prop31(WeightSequence::gevrey(1.0), 0.0, 1.0), DomainError);
}

TEST(Weights, Bounds2x) {
  const std::vector<double> grid{0.5, 1, 2, 4, 8, 16, 32, 64, 128};
  const auto res = check_bounds_2x(WeightSequence::gevrey(1.0), 2.0, 1.0, 0.5, grid);
  EXPECT_TRUE(res.komine_pass);
  EXPECT_GT(res.fitted_C, 0.0);
  EXPECT_TRUE(res.tail_decreasing);
}
