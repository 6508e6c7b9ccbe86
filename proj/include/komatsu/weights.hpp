#pragma once

// Komatsu weight sequences {M_k} and their associated function
//   M(r) = sup_k log(r^k / M_k).
// Everything is kept in log-space: (k!)^s overflows a double near k = 170.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace komatsu {

// Constants (A, H) witnessing M_{k+1} <= A H^k M_k and M_{2k} <= A H^{2k} M_k^2.
struct StabilityWitness {
  double A = 1.0;
  double H = 1.0;
};

class WeightSequence {
 public:
  // M_k = (k!)^s with s >= 1. Carries the default witness A = H = 2^s.
  static WeightSequence gevrey(double s);
  // Finite table M_0..M_kmax. Non-positive entries throw InvalidSequence.
  static WeightSequence custom(std::vector<double> table);

  bool is_gevrey() const noexcept { return table_.empty(); }
  double gevrey_order() const noexcept { return order_; }
  // Largest admissible index; nullopt for the unbounded Gevrey kind.
  std::optional<int> kmax() const noexcept;

  double log_value(int k) const;
  double value(int k) const;
  // log(M_{k+1} / M_k)
  double log_ratio(int k) const;

  const std::optional<StabilityWitness>& witness() const noexcept { return witness_; }
  WeightSequence with_witness(StabilityWitness w) const;

  std::string describe() const;

 private:
  WeightSequence() = default;

  double order_ = 1.0;
  std::vector<double> table_;      // log M_k for the custom kind
  std::vector<double> raw_table_;  // original entries, kept for reporting
  std::optional<StabilityWitness> witness_;
};

struct AssociatedFunctionQuery {
  double r = 0.0;
  double value = 0.0;
  int argmax = 0;
};

// Exact supremum via the log-convexity stopping rule. r == 0 returns 0,
// r < 0 throws DomainError, a table that runs out throws NoConvergence.
AssociatedFunctionQuery associated(const WeightSequence& w, double r);
// Shorthand for associated(w, r).value.
double associated_value(const WeightSequence& w, double r);
// Same value; for the Gevrey kind the argmax floor(r^{1/s}) is used directly.
double associated_fast(const WeightSequence& w, double r);

// Rigorous lower bound for the Gevrey kind that stays finite for huge
// arguments given through their logarithm: M_s(r) >= s (x - 2 - log(x)/2)
// with x = r^{1/s} >= 1. Returns +inf when x overflows.
double gevrey_associated_lower_bound_log(double order, double log_r);

struct AxiomResult {
  std::string axiom;
  bool pass = false;
  // Named witness constants, e.g. {"A", 1}, {"H", 2}.
  std::vector<std::pair<std::string, double>> witness;
  // Smallest log-slack observed over the scan (negative on failure).
  double margin = 0.0;
  std::optional<int> first_failure;
  std::string note;
};

struct AxiomReport {
  int kmax = 0;
  bool beurling = false;
  std::vector<AxiomResult> results;

  bool all_pass() const;
  const AxiomResult& get(const std::string& axiom) const;
};

// Scans (M.0)-(M.4), (LC) and monotonicity for k <= kmax. With beurling the
// (M.3') variant is sampled on l in {2^-10, ..., 2^10}.
AxiomReport check_axioms(const WeightSequence& w, int kmax, bool beurling = false);

// H values tried when searching for stability witnesses, besides the
// sequence's own witness.
inline constexpr double kWitnessHGrid[] = {1.0, 1.25, 1.5, 2.0, 4.0, 8.0, 16.0};

struct InequalityCheck {
  bool pass_i = false;
  bool pass_ii = false;
  // rhs - lhs in log form; >= 0 means the inequality holds.
  double slack_i = 0.0;
  double slack_ii = 0.0;
  bool pass() const { return pass_i && pass_ii; }
};

// e^{-M(r)} e^{-M(s)} <= e^{-M((r+s)/2)} and e^{M(r)} e^{M(s)} <= A e^{M(H(r+s))}.
InequalityCheck check_inequality_prop31(const WeightSequence& w, double r, double s,
                                        std::optional<StabilityWitness> witness = std::nullopt);

// r^t e^{-M(sr)} <= A (H/s)^t M_t e^{-M(sr/H)} and
// r^t e^{M(sr)} <= A s^{-t} M_t e^{M(Hsr)}.
InequalityCheck check_inequality_prop32(const WeightSequence& w, double r, double s, int t,
                                        std::optional<StabilityWitness> witness = std::nullopt);

struct Bounds2xResult {
  double fitted_C = 0.0;
  double argmax_x = 0.0;
  bool komine_pass = false;
  double komine_min_slack = 0.0;
  // Left side at the last grid point is below its value at the argmax.
  bool tail_decreasing = false;
};

// Fits C = max_x x^p e^{-delta M(q x)} over the grid and checks
// e^{-M(qx)/2} <= sqrt(A) e^{-M(qx/H)} at every grid point.
Bounds2xResult check_bounds_2x(const WeightSequence& w, double p, double q, double delta,
                               std::span<const double> grid,
                               std::optional<StabilityWitness> witness = std::nullopt);

}  // namespace komatsu
