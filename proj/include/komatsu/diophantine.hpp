#pragma once

// Exact continued-fraction arithmetic and certification of the small-divisor
// conditions for the constant-coefficient symbol
//   sigma = i (lambda + a0 mu) + q0.
//
// Weights are handled doubled (lambda2 = 2 lambda, mu2 = 2 mu). With
// a0 = u + v alpha and Im q0 = c0 + c1 alpha, and L the least common
// denominator of u, v, c0, c1:
//   2 L (lambda + a0 mu + Im q0) = K + alpha M',
//   K  = L lambda2 + (L u) mu2 + 2 L c0,
//   M' = (L v) mu2 + 2 L c1,
// so every resonance question becomes an integer one.

#include <gmpxx.h>

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "komatsu/harmonic.hpp"
#include "komatsu/weights.hpp"

namespace komatsu {

using BigInt = mpz_class;
using BigRational = mpq_class;

std::string to_string(const BigInt& z);
std::string to_string(const BigRational& q);
BigRational make_rational(const BigInt& p, const BigInt& q);
// Lower bound of log|q| (q != 0), exact to ~1e-15 relative, usable for huge values.
double log_abs(const BigInt& z);

class ContinuedFraction {
 public:
  // term(i) is the partial quotient at position i >= 0 (a0 is the integer part).
  using TermFn = std::function<BigInt(int)>;

  ContinuedFraction(std::string name, TermFn term, int max_convergent);
  // alpha = [10^{1!}; 10^{2!}, 10^{3!}, ...], the n-th term (1-based) is 10^{n!}.
  static ContinuedFraction factorial_tower(int max_convergent = 6);

  const std::string& name() const noexcept { return name_; }
  int max_convergent() const noexcept { return max_convergent_; }
  bool is_factorial_tower() const noexcept { return tower_; }

  const BigInt& term(int i) const;
  const BigInt& p(int n) const;
  const BigInt& q(int n) const;

  std::vector<BigRational> convergents(int n) const;
  // Consecutive convergents n-1, n ordered as (lo, hi); width 1/(q_{n-1} q_n).
  std::pair<BigRational, BigRational> enclose(int n) const;
  // B(m) = 1/(q_n + q_{n+1}) for q_n <= m < q_{n+1}: |k + alpha m'| >= B for
  // every integer k and 1 <= m' <= m.
  BigRational best_approx_lower_bound(const BigInt& m) const;
  // Index n with q_n <= m < q_{n+1}; PrecisionCap when m >= q_max.
  int ladder_rung(const BigInt& m) const;

  // Nearest double to the last convergent and a bound on |alpha - value|.
  double approx() const;
  double approx_error() const;

 private:
  void extend(int n) const;

  std::string name_;
  TermFn term_fn_;
  int max_convergent_;
  bool tower_ = false;
  mutable std::vector<BigInt> terms_, p_, q_;
};

// Exact element u + v alpha of Q(alpha).
struct AlphaAffine {
  BigRational u{0};
  BigRational v{0};

  static AlphaAffine rational(const BigRational& r) { return {r, 0}; }
  static AlphaAffine alpha(const BigRational& coeff = 1) { return {0, coeff}; }

  bool is_zero() const { return u == 0 && v == 0; }
  bool is_rational() const { return v == 0; }
  double to_double(const ContinuedFraction& cf) const;
  double to_double(double alpha_value) const;
  // Certified lower bound of |value| (0 if it cannot be separated from 0).
  double abs_lower(const ContinuedFraction& cf) const;
  std::string str() const;

  AlphaAffine operator+(const AlphaAffine& o) const { return {u + o.u, v + o.v}; }
  AlphaAffine operator-(const AlphaAffine& o) const { return {u - o.u, v - o.v}; }
  AlphaAffine operator-() const { return {-u, -v}; }
  AlphaAffine operator*(const BigRational& s) const { return {u * s, v * s}; }
  bool operator==(const AlphaAffine& o) const { return u == o.u && v == o.v; }
};

struct ExactComplex {
  AlphaAffine re;
  AlphaAffine im;

  ExactComplex operator+(const ExactComplex& o) const { return {re + o.re, im + o.im}; }
  ExactComplex operator-(const ExactComplex& o) const { return {re - o.re, im - o.im}; }
  bool operator==(const ExactComplex& o) const { return re == o.re && im == o.im; }
  std::complex<double> to_complex(const ContinuedFraction& cf) const;
  std::complex<double> to_complex(double alpha_value) const;
  std::string str() const;
};

using GroupPair = std::pair<GroupKind, GroupKind>;
std::string group_pair_name(const GroupPair& gp);  // "t1xs3", ...
GroupPair parse_group_pair(const std::string& name);

// A (lambda, mu) pair at its smallest-scale representatives.
struct Tuple {
  int lambda2 = 0;
  int mu2 = 0;
  int rep1 = 0;  // k, or 2l
  int rep2 = 0;
  double scale = 0.0;

  std::string str(const GroupPair& gp) const;
};

class DenominatorModel {
 public:
  DenominatorModel(AlphaAffine a0, ExactComplex q0, ContinuedFraction cf);
  // a0, q0 known only as floats: nothing is certified.
  static DenominatorModel from_float(double a0, std::complex<double> q0);

  bool exact() const noexcept { return exact_; }
  const AlphaAffine& a0() const noexcept { return a0_; }
  const ExactComplex& q0() const noexcept { return q0_; }
  const ContinuedFraction& cf() const noexcept { return cf_; }

  long long L() const noexcept { return L_; }
  long long U() const noexcept { return U_; }
  long long V() const noexcept { return V_; }
  long long C0() const noexcept { return C0_; }
  long long C1() const noexcept { return C1_; }
  bool re_q0_zero() const noexcept { return re_zero_; }

  long long K(int lambda2, int mu2) const { return L_ * lambda2 + U_ * mu2 + C0_; }
  long long Mp(int mu2) const { return V_ * mu2 + C1_; }

  bool resonant(int lambda2, int mu2) const;
  // |sigma| approximately and a certified lower bound (0 when resonant).
  // A float model reports its estimate as the bound.
  struct Eval {
    bool resonant = false;
    double approx = 0.0;
    double lower = 0.0;
  };
  Eval evaluate(int lambda2, int mu2) const;

  std::string describe() const;

 private:
  DenominatorModel() : cf_(ContinuedFraction::factorial_tower()) {}

  AlphaAffine a0_;
  ExactComplex q0_;
  ContinuedFraction cf_;
  bool exact_ = true;
  double a0_float_ = 0.0;
  std::complex<double> q0_float_{};
  long long L_ = 1, U_ = 0, V_ = 0, C0_ = 0, C1_ = 0;
  bool re_zero_ = true;
  double re_lower_ = 0.0;
  double alpha_ = 0.0, alpha_err_ = 0.0;
  // ladder_[n] = (q_{n+1} as double, lower bound of 1/(q_n + q_{n+1}))
  std::vector<std::pair<double, double>> ladder_;
};

struct ResonanceInventory {
  double cutoff = 0.0;
  bool exact = true;
  bool finite = true;
  std::string structure;
  // Resonant doubled weight pairs (lambda2, mu2), exact.
  std::vector<std::pair<long long, long long>> weight_pairs;
  bool weight_pairs_complete = true;
  long long count = 0;          // (xi, eta, m, r) tuples within the cutoff
  std::vector<Tuple> examples;  // first few, in enumeration order
};

ResonanceInventory resonance_set(const DenominatorModel& model, const GroupPair& gp, double cutoff);

struct ShellMin {
  int shell = 0;
  double min_lower = 0.0;
  double min_approx = 0.0;
  Tuple argmin;
  long long pairs = 0;  // weight pairs first appearing in this shell
};

struct ScanResult {
  double cutoff = 0.0;
  bool exact = true;
  long long pairs = 0;
  long long resonant_pairs = 0;
  std::vector<ShellMin> shells;
};

ScanResult scan_small_divisors(const DenominatorModel& model, const GroupPair& gp, double cutoff);
std::string shells_csv(const ScanResult& scan, const GroupPair& gp);

struct FitRequest {
  WeightSequence w;
  double N = 1.0;
};

struct FitResult {
  double cutoff = 0.0;
  double log_C = 0.0;  // log of min |sigma| exp(M(N scale)) over nonresonant pairs
  Tuple argmin;
};

// result[request][cutoff]
std::vector<std::vector<FitResult>> fit_constants(const DenominatorModel& model, const GroupPair& gp,
                                                  const std::vector<double>& cutoffs,
                                                  const std::vector<FitRequest>& requests);

struct LadderRung {
  int n = 0;
  std::string q_lo, q_hi;
  double log_bound = 0.0;  // log of the certified |sigma| lower bound on the rung
  double log_scale_min = 0.0;
  double log_C_lower = 0.0;
};

struct LadderCertificate {
  bool available = false;
  bool all_scales = false;  // valid without a cap (rational direction)
  int through = 0;          // covers |M'| < q_through
  double log_C_lower = 0.0;
  std::vector<LadderRung> rungs;
  std::string note;
};

LadderCertificate ladder_certificate(const DenominatorModel& model, const GroupPair& gp,
                                     const WeightSequence& w, double N);

enum class Quantifier { Roumieu, Beurling };
const char* quantifier_name(Quantifier q);

struct Condition2Result {
  Quantifier mode = Quantifier::Roumieu;
  double N = 0.0;
  std::string weight;
  std::vector<FitResult> fits;  // per cutoff
  bool stable = false;          // fitted C within a factor 2 across cutoffs
  LadderCertificate ladder;
  std::string verdict;  // consistent | undecided
  double C_N = 0.0;     // fitted at the largest cutoff
};

Condition2Result certify_condition2(const DenominatorModel& model, const GroupPair& gp,
                                    const WeightSequence& w, double N, Quantifier mode,
                                    const std::vector<double>& cutoffs = {500, 1000, 2000});
// One scan for several (weight, N) requests.
std::vector<Condition2Result> certify_condition2_many(const DenominatorModel& model, const GroupPair& gp,
                                                      const std::vector<FitRequest>& requests, Quantifier mode,
                                                      const std::vector<double>& cutoffs = {500, 1000, 2000});

struct LiouvilleWitness {
  int n = 0;
  BigInt p, q;
  // |p_n - alpha q_n| < bound = 1/q_{n+1}, and bound < q_n^{-n} when holds_power.
  BigRational bound;
  bool holds_power = false;
};

std::vector<LiouvilleWitness> liouville_witnesses(const ContinuedFraction& cf, int n_max);

// A denominator tuple built from convergent n: K = -j p_n, M' = j q_n.
struct SmoothWitness {
  int n = 0;
  int j = 0;
  BigInt lambda2, mu2;
  double log10_sigma_upper = 0.0;  // log10 of an upper bound on |sigma|
  double log10_scale_upper = 0.0;
  bool exact_check = false;        // |sigma| < 1/q_{n+1} verified in exact arithmetic
};

struct SmoothAnalysis {
  bool applicable = false;  // an irrational direction with Re q0 = 0
  bool refuted = false;     // polynomial bounds fail for every P in 1..p_max
  int p_max = 10;
  std::vector<SmoothWitness> witnesses;
  // For each P, the first witness index whose symbolic bound on
  // |sigma| scale^P is below 10^-30 (-1 if none within the examined range).
  std::vector<int> depth;
  bool witness_family_recurs = false;
  std::optional<double> certified_lower;  // when the polynomial bound holds (P = 0)
  std::string argument;
};

SmoothAnalysis smooth_analysis(const DenominatorModel& model, const GroupPair& gp, int p_max = 10);

}  // namespace komatsu
