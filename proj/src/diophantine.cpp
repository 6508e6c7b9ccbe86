#include "komatsu/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "komatsu/error.hpp"

namespace komatsu {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long kIntLimit = 1L << 50;
constexpr double kLog10 = 2.302585092994045684;

long long checked_ll(const BigInt& z, const char* what) {
  if (abs(z) >= kIntLimit) throw PrecisionCap(std::string(what) + " exceeds the integer range");
  return z.get_si();
}

BigInt lcm(const BigInt& a, const BigInt& b) {
  BigInt r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

// Round-down conversion of a nonnegative rational.
double down(const BigRational& q) {
  const double d = q.get_d();  // truncates toward zero
  return d;
}

struct FactorIndex {
  int w2 = 0;   // doubled weight
  int rep = 0;  // k or 2l at the minimal representative
  double bracket = 0.0;
};

double su2_bracket(int twice) {
  const double l = 0.5 * twice;
  return std::sqrt(1.0 + l * (l + 1.0));
}

double torus_bracket(int k) { return std::sqrt(1.0 + static_cast<double>(k) * k); }

// Minimal representatives for every doubled weight whose bracket leaves room
// for the other factor (whose bracket is at least 1).
std::vector<FactorIndex> factor_list(GroupKind g, double cutoff) {
  std::vector<FactorIndex> out;
  const double room = cutoff - 1.0;
  if (room < 1.0) return out;
  if (g == GroupKind::Torus) {
    const int kmax = static_cast<int>(std::floor(std::sqrt(room * room - 1.0))) + 1;
    for (int k = -kmax; k <= kmax; ++k) {
      const double b = torus_bracket(k);
      if (b <= room) out.push_back({2 * k, k, b});
    }
  } else {
    const int wmax = static_cast<int>(std::ceil(2.0 * room)) + 2;
    for (int w = -wmax; w <= wmax; ++w) {
      const double b = su2_bracket(std::abs(w));
      if (b <= room) out.push_back({w, std::abs(w), b});
    }
  }
  return out;
}

bool parity_ok(GroupKind g, const BigInt& w2) { return g == GroupKind::SU2 || mpz_even_p(w2.get_mpz_t()); }
bool parity_ok(GroupKind g, long long w2) { return g == GroupKind::SU2 || w2 % 2 == 0; }

// Tie-break: smaller value, then smaller scale, then lexicographic weights.
bool better(double v, const Tuple& t, double bv, const Tuple& bt) {
  if (v != bv) return v < bv;
  if (t.scale != bt.scale) return t.scale < bt.scale;
  if (t.lambda2 != bt.lambda2) return t.lambda2 < bt.lambda2;
  return t.mu2 < bt.mu2;
}

}  // namespace

std::string to_string(const BigInt& z) { return z.get_str(); }

std::string to_string(const BigRational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

BigRational make_rational(const BigInt& p, const BigInt& q) {
  if (q == 0) throw DomainError("zero denominator");
  BigRational r(p, q);
  r.canonicalize();
  return r;
}

double log_abs(const BigInt& z) {
  if (z == 0) return -kInf;
  long e = 0;
  const double d = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log(std::abs(d)) + static_cast<double>(e) * std::log(2.0);
}

// ---------------------------------------------------------------- CF

ContinuedFraction::ContinuedFraction(std::string name, TermFn term, int max_convergent)
    : name_(std::move(name)), term_fn_(std::move(term)), max_convergent_(max_convergent) {
  if (max_convergent < 1) throw DomainError("continued fraction needs at least two convergents");
}

ContinuedFraction ContinuedFraction::factorial_tower(int max_convergent) {
  ContinuedFraction cf(
      "[10^{1!}; 10^{2!}, 10^{3!}, ...]",
      [](int i) {
        unsigned long f = 1;
        for (int j = 2; j <= i + 1; ++j) f *= static_cast<unsigned long>(j);
        BigInt z;
        mpz_ui_pow_ui(z.get_mpz_t(), 10, f);
        return z;
      },
      max_convergent);
  cf.tower_ = true;
  return cf;
}

void ContinuedFraction::extend(int n) const {
  if (n < 0) throw DomainError("negative convergent index");
  if (n > max_convergent_) {
    throw PrecisionCap("convergent " + std::to_string(n) + " beyond the configured cap " +
                       std::to_string(max_convergent_));
  }
  while (static_cast<int>(p_.size()) <= n) {
    const int i = static_cast<int>(p_.size());
    BigInt a = term_fn_(i);
    if (i > 0 && a < 1) throw DomainError("partial quotients after a0 must be >= 1");
    terms_.push_back(a);
    if (i == 0) {
      p_.push_back(a);
      q_.push_back(1);
    } else if (i == 1) {
      p_.push_back(a * p_[0] + 1);
      q_.push_back(a);
    } else {
      p_.push_back(a * p_[static_cast<std::size_t>(i - 1)] + p_[static_cast<std::size_t>(i - 2)]);
      q_.push_back(a * q_[static_cast<std::size_t>(i - 1)] + q_[static_cast<std::size_t>(i - 2)]);
    }
  }
}

const BigInt& ContinuedFraction::term(int i) const {
  extend(i);
  return terms_[static_cast<std::size_t>(i)];
}
const BigInt& ContinuedFraction::p(int n) const {
  extend(n);
  return p_[static_cast<std::size_t>(n)];
}
const BigInt& ContinuedFraction::q(int n) const {
  extend(n);
  return q_[static_cast<std::size_t>(n)];
}

std::vector<BigRational> ContinuedFraction::convergents(int n) const {
  extend(n);
  std::vector<BigRational> out;
  for (int i = 0; i <= n; ++i) out.push_back(make_rational(p(i), q(i)));
  return out;
}

std::pair<BigRational, BigRational> ContinuedFraction::enclose(int n) const {
  if (n < 1) throw DomainError("enclosure needs n >= 1");
  BigRational a = make_rational(p(n - 1), q(n - 1));
  BigRational b = make_rational(p(n), q(n));
  if (a < b) return {a, b};
  return {b, a};
}

int ContinuedFraction::ladder_rung(const BigInt& m) const {
  if (m < 1) throw DomainError("ladder needs m >= 1");
  for (int n = 0; n < max_convergent_; ++n) {
    if (q(n) <= m && m < q(n + 1)) return n;
  }
  throw PrecisionCap("m = " + to_string(m) + " is beyond q_" + std::to_string(max_convergent_));
}

BigRational ContinuedFraction::best_approx_lower_bound(const BigInt& m) const {
  const int n = ladder_rung(m);
  return make_rational(1, q(n) + q(n + 1));
}

double ContinuedFraction::approx() const {
  return make_rational(p(max_convergent_), q(max_convergent_)).get_d();
}

double ContinuedFraction::approx_error() const {
  const auto [lo, hi] = enclose(max_convergent_);
  const BigRational conv = make_rational(p(max_convergent_), q(max_convergent_));
  const BigRational diff = abs(conv - BigRational(approx())) + (hi - lo);
  return diff.get_d() * (1.0 + 1e-12) + std::numeric_limits<double>::denorm_min();
}

// ---------------------------------------------------------------- exact values

double AlphaAffine::to_double(const ContinuedFraction& cf) const { return to_double(cf.approx()); }
double AlphaAffine::to_double(double alpha_value) const { return u.get_d() + v.get_d() * alpha_value; }

double AlphaAffine::abs_lower(const ContinuedFraction& cf) const {
  if (v == 0) return down(abs(u));
  const auto [lo, hi] = cf.enclose(cf.max_convergent());
  BigRational a = u + v * lo;
  BigRational b = u + v * hi;
  if ((a <= 0 && b >= 0) || (a >= 0 && b <= 0)) return 0.0;
  return down(std::min(BigRational(abs(a)), BigRational(abs(b))));
}

std::string AlphaAffine::str() const {
  if (v == 0) return to_string(u);
  std::string s = (u == 0) ? "" : to_string(u) + (v > 0 ? " + " : " - ");
  const BigRational av = (u == 0) ? v : BigRational(abs(v));
  if (av == 1) return s + "alpha";
  if (av == -1) return s + "-alpha";
  return s + to_string(av) + "*alpha";
}

std::complex<double> ExactComplex::to_complex(const ContinuedFraction& cf) const {
  return to_complex(cf.approx());
}
std::complex<double> ExactComplex::to_complex(double a) const {
  return {re.to_double(a), im.to_double(a)};
}

std::string ExactComplex::str() const {
  if (im.is_zero()) return re.str();
  if (re.is_zero()) return "(" + im.str() + ")i";
  return re.str() + " + (" + im.str() + ")i";
}

std::string group_pair_name(const GroupPair& gp) {
  auto one = [](GroupKind g) { return g == GroupKind::Torus ? "t1" : "s3"; };
  return std::string(one(gp.first)) + "x" + one(gp.second);
}

GroupPair parse_group_pair(const std::string& name) {
  if (name == "t1xs3") return {GroupKind::Torus, GroupKind::SU2};
  if (name == "s3xs3") return {GroupKind::SU2, GroupKind::SU2};
  if (name == "t1xt1") return {GroupKind::Torus, GroupKind::Torus};
  if (name == "s3xt1") return {GroupKind::SU2, GroupKind::Torus};
  throw ConfigError("unknown group pair '" + name + "' (use t1xs3, s3xs3, t1xt1, s3xt1)");
}

std::string Tuple::str(const GroupPair& gp) const {
  std::ostringstream os;
  if (gp.first == GroupKind::Torus) {
    os << "k=" << rep1;
  } else {
    os << "l=" << HalfInt{rep1}.str() << " m=" << HalfInt{lambda2}.str();
  }
  os << ' ';
  if (gp.second == GroupKind::Torus) {
    os << "j=" << rep2;
  } else {
    os << "kappa=" << HalfInt{rep2}.str() << " r=" << HalfInt{mu2}.str();
  }
  return os.str();
}

// ---------------------------------------------------------------- model

DenominatorModel::DenominatorModel(AlphaAffine a0, ExactComplex q0, ContinuedFraction cf)
    : a0_(std::move(a0)), q0_(std::move(q0)), cf_(std::move(cf)) {
  const BigRational& u = a0_.u;
  const BigRational& v = a0_.v;
  const BigRational& c0 = q0_.im.u;
  const BigRational& c1 = q0_.im.v;
  BigInt L = lcm(lcm(u.get_den(), v.get_den()), lcm(c0.get_den(), c1.get_den()));
  L_ = checked_ll(L, "common denominator");
  U_ = checked_ll(BigInt(u * L), "L*u");
  V_ = checked_ll(BigInt(v * L), "L*v");
  C0_ = checked_ll(BigInt(c0 * 2 * L), "2L*c0");
  C1_ = checked_ll(BigInt(c1 * 2 * L), "2L*c1");
  re_zero_ = q0_.re.is_zero();
  re_lower_ = q0_.re.abs_lower(cf_);
  alpha_ = cf_.approx();
  alpha_err_ = cf_.approx_error();
  for (int n = 0; n < cf_.max_convergent(); ++n) {
    const BigInt& qn = cf_.q(n);
    const BigInt& qn1 = cf_.q(n + 1);
    const double qd = log_abs(qn1) > 700.0 ? kInf : qn1.get_d();
    ladder_.emplace_back(qd, down(make_rational(1, qn + qn1)));
  }
}

DenominatorModel DenominatorModel::from_float(double a0, std::complex<double> q0) {
  DenominatorModel m;
  m.exact_ = false;
  m.a0_float_ = a0;
  m.q0_float_ = q0;
  m.re_zero_ = q0.real() == 0.0;
  return m;
}

bool DenominatorModel::resonant(int lambda2, int mu2) const {
  if (!exact_) {
    const double x = 0.5 * lambda2 + a0_float_ * 0.5 * mu2 + q0_float_.imag();
    return std::abs(x) < 1e-12 && std::abs(q0_float_.real()) < 1e-12;
  }
  return re_zero_ && K(lambda2, mu2) == 0 && Mp(mu2) == 0;
}

DenominatorModel::Eval DenominatorModel::evaluate(int lambda2, int mu2) const {
  Eval e;
  if (!exact_) {
    const double x = 0.5 * lambda2 + a0_float_ * 0.5 * mu2 + q0_float_.imag();
    e.approx = std::hypot(q0_float_.real(), x);
    e.lower = e.approx;
    e.resonant = resonant(lambda2, mu2);
    return e;
  }
  if (resonant(lambda2, mu2)) {
    e.resonant = true;
    return e;
  }
  const long long k = K(lambda2, mu2);
  const long long mp = Mp(mu2);
  const double two_l = 2.0 * static_cast<double>(L_);
  double x_approx = 0.0, x_lower = 0.0;
  if (mp == 0) {
    x_approx = std::abs(static_cast<double>(k)) / two_l;
    x_lower = x_approx * (1.0 - 1e-15);
  } else {
    const double kd = static_cast<double>(k);
    const double md = static_cast<double>(mp);
    const double val = kd + alpha_ * md;
    const double err = alpha_err_ * std::abs(md) +
                       4.0 * std::numeric_limits<double>::epsilon() * (std::abs(kd) + std::abs(alpha_ * md));
    x_approx = std::abs(val) / two_l;
    x_lower = std::max(0.0, std::abs(val) - err) / two_l * (1.0 - 1e-15);
    if (x_lower == 0.0) {
      const auto [lo, hi] = cf_.enclose(cf_.max_convergent());
      const BigRational a = BigRational(BigInt(static_cast<long>(k))) + lo * BigInt(static_cast<long>(mp));
      const BigRational b = BigRational(BigInt(static_cast<long>(k))) + hi * BigInt(static_cast<long>(mp));
      if (!((a <= 0 && b >= 0) || (a >= 0 && b <= 0))) {
        x_lower = down(std::min(BigRational(abs(a)), BigRational(abs(b)))) / two_l * (1.0 - 1e-15);
      }
    }
    const double am = std::abs(md);
    for (const auto& [q_next, bound] : ladder_) {
      if (am < q_next) {
        x_lower = std::max(x_lower, bound / two_l * (1.0 - 1e-15));
        break;
      }
    }
  }
  const double re_approx = q0_.re.to_double(alpha_);
  e.approx = std::hypot(re_approx, x_approx);
  e.lower = std::hypot(re_lower_, x_lower) * (1.0 - 1e-15);
  return e;
}

std::string DenominatorModel::describe() const {
  if (!exact_) {
    std::ostringstream os;
    os.precision(17);
    os << "a0=" << a0_float_ << " (float), q0=" << q0_float_.real() << "+" << q0_float_.imag() << "i (float)";
    return os.str();
  }
  return "a0=" + a0_.str() + ", q0=" + q0_.str() + ", alpha=" + cf_.name();
}

// ---------------------------------------------------------------- resonances

ResonanceInventory resonance_set(const DenominatorModel& model, const GroupPair& gp, double cutoff) {
  if (!model.exact()) throw UncertifiedInput("resonance decisions need an exact a0 and q0");
  ResonanceInventory inv;
  inv.cutoff = cutoff;
  const bool any_su2 = gp.first == GroupKind::SU2 || gp.second == GroupKind::SU2;
  const long long L = model.L(), U = model.U(), V = model.V(), C0 = model.C0(), C1 = model.C1();

  // Exact solution set of K = 0, M' = 0 with the parity of each factor.
  std::vector<std::pair<long long, long long>> sols;
  bool line = false;
  if (model.re_q0_zero()) {
    if (V != 0) {
      if (C1 % V == 0) {
        const long long mu2 = -C1 / V;
        const long long num = -(U * mu2 + C0);
        if (parity_ok(gp.second, mu2) && num % L == 0 && parity_ok(gp.first, num / L)) {
          sols.emplace_back(num / L, mu2);
        }
      }
    } else if (C1 == 0) {
      // K = L lambda2 + U mu2 + C0 = 0; solutions repeat with period 2L in mu2.
      for (long long mu2 = -4 * L; mu2 <= 4 * L; ++mu2) {
        const long long num = -(U * mu2 + C0);
        if (parity_ok(gp.second, mu2) && num % L == 0 && parity_ok(gp.first, num / L)) {
          line = true;
          break;
        }
      }
    }
  }

  if (line) {
    inv.finite = false;
    inv.weight_pairs_complete = false;
    inv.structure = "resonant weights fill the line L*lambda2 + U*mu2 + C0 = 0 (infinitely many pairs)";
  } else if (sols.empty()) {
    inv.finite = true;
    inv.structure = "no resonant weights: the set is empty";
  } else if (any_su2) {
    inv.finite = false;
    inv.structure = "resonant weights (lambda, mu) = (" + HalfInt{static_cast<int>(sols[0].first)}.str() +
                    ", " + HalfInt{static_cast<int>(sols[0].second)}.str() +
                    ") occur in every SU(2) representation l >= |m| with l - m integral: infinite";
  } else {
    inv.finite = true;
    inv.structure = "a single resonant weight pair on a torus product: finite";
  }

  // Enumerate tuples within the cutoff.
  const auto list1 = factor_list(gp.first, cutoff);
  const auto list2 = factor_list(gp.second, cutoff);
  auto reps_for = [&](GroupKind g, int w2, double budget, auto&& emit) {
    if (g == GroupKind::Torus) {
      if (w2 % 2 != 0) return;
      const double b = torus_bracket(w2 / 2);
      if (b <= budget) emit(w2 / 2, b);
    } else {
      for (int t = std::abs(w2); ; t += 2) {
        const double b = su2_bracket(t);
        if (b > budget) break;
        emit(t, b);
      }
    }
  };
  std::vector<std::pair<long long, long long>> pairs;
  if (line) {
    for (const auto& f1 : list1) {
      for (const auto& f2 : list2) {
        if (f1.bracket + f2.bracket > cutoff) continue;
        if (model.resonant(f1.w2, f2.w2)) pairs.emplace_back(f1.w2, f2.w2);
      }
    }
  } else {
    pairs = sols;
  }
  inv.weight_pairs = pairs;
  for (const auto& [l2, m2] : pairs) {
    reps_for(gp.first, static_cast<int>(l2), cutoff - 1.0, [&](int r1, double b1) {
      reps_for(gp.second, static_cast<int>(m2), cutoff - b1, [&](int r2, double b2) {
        ++inv.count;
        if (inv.examples.size() < 200) {
          inv.examples.push_back({static_cast<int>(l2), static_cast<int>(m2), r1, r2, b1 + b2});
        }
      });
    });
  }
  if (line && inv.count == 0) inv.weight_pairs_complete = true;
  return inv;
}

// ---------------------------------------------------------------- scans

ScanResult scan_small_divisors(const DenominatorModel& model, const GroupPair& gp, double cutoff) {
  const auto list1 = factor_list(gp.first, cutoff);
  const auto list2 = factor_list(gp.second, cutoff);
  const long long budget = static_cast<long long>(list1.size()) * static_cast<long long>(list2.size());
  if (budget > 400'000'000LL) throw GridTooLarge("scan of " + std::to_string(budget) + " pairs");
  const int nshell = static_cast<int>(std::floor(cutoff)) + 1;

  ScanResult res;
  res.cutoff = cutoff;
  res.exact = model.exact();
  std::vector<ShellMin> shells(static_cast<std::size_t>(nshell));
  for (int s = 0; s < nshell; ++s) {
    shells[static_cast<std::size_t>(s)].shell = s;
    shells[static_cast<std::size_t>(s)].min_lower = kInf;
    shells[static_cast<std::size_t>(s)].min_approx = kInf;
  }
  long long total = 0, resonant = 0;

#pragma omp parallel
  {
    std::vector<ShellMin> local = shells;
    long long t_total = 0, t_res = 0;
#pragma omp for schedule(dynamic, 16) nowait
    for (int i = 0; i < static_cast<int>(list1.size()); ++i) {
      const auto& f1 = list1[static_cast<std::size_t>(i)];
      for (const auto& f2 : list2) {
        const double x = f1.bracket + f2.bracket;
        if (x > cutoff) continue;
        ++t_total;
        const auto e = model.evaluate(f1.w2, f2.w2);
        if (e.resonant) {
          ++t_res;
          continue;
        }
        auto& sh = local[static_cast<std::size_t>(std::floor(x))];
        ++sh.pairs;
        const Tuple t{f1.w2, f2.w2, f1.rep, f2.rep, x};
        if (better(e.lower, t, sh.min_lower, sh.argmin)) {
          sh.min_lower = e.lower;
          sh.min_approx = e.approx;
          sh.argmin = t;
        }
      }
    }
#pragma omp critical
    {
      total += t_total;
      resonant += t_res;
      for (int s = 0; s < nshell; ++s) {
        auto& g = shells[static_cast<std::size_t>(s)];
        const auto& l = local[static_cast<std::size_t>(s)];
        g.pairs += l.pairs;
        if (l.min_lower < kInf && better(l.min_lower, l.argmin, g.min_lower, g.argmin)) {
          g.min_lower = l.min_lower;
          g.min_approx = l.min_approx;
          g.argmin = l.argmin;
        }
      }
    }
  }

  // With an SU(2) factor a weight pair reappears in every later shell.
  if (gp.first == GroupKind::SU2 || gp.second == GroupKind::SU2) {
    for (int s = 1; s < nshell; ++s) {
      auto& cur = shells[static_cast<std::size_t>(s)];
      const auto& prev = shells[static_cast<std::size_t>(s - 1)];
      if (prev.min_lower < kInf && better(prev.min_lower, prev.argmin, cur.min_lower, cur.argmin)) {
        cur.min_lower = prev.min_lower;
        cur.min_approx = prev.min_approx;
        cur.argmin = prev.argmin;
      }
    }
  }
  res.pairs = total;
  res.resonant_pairs = resonant;
  for (auto& s : shells) {
    if (s.min_lower < kInf) res.shells.push_back(s);
  }
  return res;
}

std::string shells_csv(const ScanResult& scan, const GroupPair& gp) {
  std::ostringstream os;
  os.precision(17);
  os << "shell,min_denominator,min_denominator_approx,lambda2,mu2,rep1,rep2,scale,pairs,argmin\n";
  for (const auto& s : scan.shells) {
    os << s.shell << ',' << s.min_lower << ',' << s.min_approx << ',' << s.argmin.lambda2 << ','
       << s.argmin.mu2 << ',' << s.argmin.rep1 << ',' << s.argmin.rep2 << ',' << s.argmin.scale << ','
       << s.pairs << ",\"" << s.argmin.str(gp) << "\"\n";
  }
  return os.str();
}

std::vector<std::vector<FitResult>> fit_constants(const DenominatorModel& model, const GroupPair& gp,
                                                  const std::vector<double>& cutoffs_in,
                                                  const std::vector<FitRequest>& requests) {
  if (cutoffs_in.empty()) throw DomainError("no cutoffs");
  std::vector<double> cutoffs = cutoffs_in;
  std::sort(cutoffs.begin(), cutoffs.end());
  const double cmax = cutoffs.back();
  const auto list1 = factor_list(gp.first, cmax);
  const auto list2 = factor_list(gp.second, cmax);
  const std::size_t nr = requests.size(), nc = cutoffs.size();
  for (const auto& r : requests) {
    if (!(r.N > 0.0)) throw DomainError("N must be positive");
  }

  // Cheap lower bounds: M(N x) >= M(N max(b1, b2)).
  std::vector<std::vector<double>> low1(nr), low2(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    for (const auto& f : list1) low1[r].push_back(associated_fast(requests[r].w, requests[r].N * f.bracket));
    for (const auto& f : list2) low2[r].push_back(associated_fast(requests[r].w, requests[r].N * f.bracket));
  }

  std::vector<std::vector<FitResult>> best(nr, std::vector<FitResult>(nc));
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t c = 0; c < nc; ++c) {
      best[r][c].cutoff = cutoffs[c];
      best[r][c].log_C = kInf;
    }

#pragma omp parallel
  {
    auto local = best;
#pragma omp for schedule(dynamic, 16) nowait
    for (int i = 0; i < static_cast<int>(list1.size()); ++i) {
      const auto& f1 = list1[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < list2.size(); ++j) {
        const auto& f2 = list2[j];
        const double x = f1.bracket + f2.bracket;
        if (x > cmax) continue;
        const auto e = model.evaluate(f1.w2, f2.w2);
        if (e.resonant) continue;
        const double ll = std::log(e.lower);
        std::size_t c0 = 0;
        while (cutoffs[c0] < x) ++c0;
        const Tuple t{f1.w2, f2.w2, f1.rep, f2.rep, x};
        for (std::size_t r = 0; r < nr; ++r) {
          const double lowm = std::max(low1[r][static_cast<std::size_t>(i)], low2[r][j]);
          if (ll + lowm > local[r][c0].log_C) continue;
          const double v = ll + associated_fast(requests[r].w, requests[r].N * x);
          for (std::size_t c = c0; c < nc; ++c) {
            auto& b = local[r][c];
            if (better(v, t, b.log_C, b.argmin)) {
              b.log_C = v;
              b.argmin = t;
            }
          }
        }
      }
    }
#pragma omp critical
    {
      for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nc; ++c) {
          auto& g = best[r][c];
          const auto& l = local[r][c];
          if (l.log_C < kInf && better(l.log_C, l.argmin, g.log_C, g.argmin)) {
            g.log_C = l.log_C;
            g.argmin = l.argmin;
          }
        }
    }
  }
  return best;
}

// ---------------------------------------------------------------- ladder

LadderCertificate ladder_certificate(const DenominatorModel& model, const GroupPair& gp,
                                     const WeightSequence& w, double N) {
  (void)gp;
  LadderCertificate cert;
  if (!model.exact()) {
    cert.note = "float coefficients: no certificate";
    return cert;
  }
  const double two_l = 2.0 * static_cast<double>(model.L());
  const double re_low = model.q0().re.abs_lower(model.cf());
  const long long V = model.V(), C1 = model.C1();
  const auto& cf = model.cf();
  cert.available = true;

  if (V == 0) {
    cert.all_scales = true;
    double bound;
    if (C1 == 0) {
      // |K| >= 1 off resonance.
      bound = model.re_q0_zero() ? 1.0 / two_l : std::min(re_low, 1.0 / two_l);
      cert.note = "rational direction: |sigma| >= 1/(2L) off resonance at every scale";
    } else {
      const BigRational B = cf.best_approx_lower_bound(BigInt(static_cast<long>(std::llabs(C1))));
      bound = std::hypot(re_low, down(B) / two_l);
      cert.note = "constant irrational offset: |K + alpha M'| >= B(|M'|) at every scale";
    }
    cert.log_C_lower = std::log(bound * (1.0 - 1e-15));
    cert.through = cf.max_convergent();
    return cert;
  }

  // Pairs with M' = 0 have |sigma| >= 1/(2L) (or |Re q0|) and e^{M} >= 1.
  double log_min = kInf;
  if (C1 % V == 0) log_min = std::log((model.re_q0_zero() ? 1.0 : std::min(1.0, re_low * two_l)) / two_l);

  const double log_two_l = std::log(two_l);
  for (int n = 0; n < cf.max_convergent(); ++n) {
    LadderRung rung;
    rung.n = n;
    rung.q_lo = to_string(cf.q(n));
    rung.q_hi = to_string(cf.q(n + 1));
    const BigInt sum = cf.q(n) + cf.q(n + 1);
    rung.log_bound = -log_abs(sum) * (1.0 + 1e-14) - 1e-12 - log_two_l;
    // |M'| >= q_n forces |mu2| >= (q_n - |C1|)/|V| and scale >= 1 + |mu2|/2.
    const BigInt excess = cf.q(n) - BigInt(static_cast<long>(std::llabs(C1)));
    double log_x = 0.0;
    if (excess > 0) {
      const double lx = log_abs(excess) - std::log(2.0 * static_cast<double>(std::llabs(V)));
      log_x = std::max(0.0, lx) - 1e-12;
    }
    rung.log_scale_min = log_x;
    double m_low = 0.0;
    if (w.is_gevrey()) {
      m_low = std::max(0.0, gevrey_associated_lower_bound_log(w.gevrey_order(), std::log(N) + log_x));
    } else if (log_x < 300.0) {
      try {
        m_low = associated_value(w, N * std::exp(log_x));
      } catch (const NoConvergence&) {
        m_low = 0.0;
      }
    }
    rung.log_C_lower = rung.log_bound + m_low;
    log_min = std::min(log_min, rung.log_C_lower);
    cert.rungs.push_back(rung);
  }
  cert.through = cf.max_convergent();
  cert.log_C_lower = log_min;
  cert.note = "ladder bound |K + alpha M'| >= 1/(q_n + q_{n+1}) for q_n <= |M'| < q_{n+1}";
  return cert;
}

const char* quantifier_name(Quantifier q) { return q == Quantifier::Roumieu ? "Roumieu" : "Beurling"; }

std::vector<Condition2Result> certify_condition2_many(const DenominatorModel& model, const GroupPair& gp,
                                                      const std::vector<FitRequest>& requests, Quantifier mode,
                                                      const std::vector<double>& cutoffs) {
  if (cutoffs.empty()) throw DomainError("no cutoffs");
  for (const auto& r : requests) {
    if (!(r.N > 0.0) || !std::isfinite(r.N)) throw DomainError("N must be a positive finite number");
  }
  const auto fits = fit_constants(model, gp, cutoffs, requests);
  std::vector<Condition2Result> out;
  for (std::size_t k = 0; k < requests.size(); ++k) {
    Condition2Result res;
    res.mode = mode;
    res.N = requests[k].N;
    res.weight = requests[k].w.describe();
    res.fits = fits[k];
    double lo = kInf, hi = -kInf;
    for (const auto& f : res.fits) {
      lo = std::min(lo, f.log_C);
      hi = std::max(hi, f.log_C);
    }
    res.stable = std::isfinite(lo) && std::isfinite(hi) && hi - lo <= std::log(2.0);
    res.C_N = std::exp(res.fits.back().log_C);
    res.ladder = ladder_certificate(model, gp, requests[k].w, requests[k].N);
    const bool ok = model.exact() && res.stable && res.C_N > 0.0 &&
                    (!res.ladder.available || std::isfinite(res.ladder.log_C_lower));
    res.verdict = ok ? "consistent" : "undecided";
    out.push_back(std::move(res));
  }
  return out;
}

Condition2Result certify_condition2(const DenominatorModel& model, const GroupPair& gp,
                                    const WeightSequence& w, double N, Quantifier mode,
                                    const std::vector<double>& cutoffs) {
  return certify_condition2_many(model, gp, {FitRequest{w, N}}, mode, cutoffs).front();
}

// ---------------------------------------------------------------- Liouville

std::vector<LiouvilleWitness> liouville_witnesses(const ContinuedFraction& cf, int n_max) {
  std::vector<LiouvilleWitness> out;
  for (int n = 0; n <= n_max; ++n) {
    LiouvilleWitness w;
    w.n = n;
    w.p = cf.p(n);
    w.q = cf.q(n);
    // alpha lies strictly between p_n/q_n and p_{n+1}/q_{n+1}, so
    // |p_n - alpha q_n| < |p_n - q_n p_{n+1}/q_{n+1}| = 1/q_{n+1}.
    const BigRational edge = abs(BigRational(w.p) - BigRational(w.q) * make_rational(cf.p(n + 1), cf.q(n + 1)));
    const BigRational expect = make_rational(1, cf.q(n + 1));
    if (edge != expect) throw DomainError("convergent determinant identity failed");
    w.bound = expect;
    BigInt qn_pow;
    mpz_pow_ui(qn_pow.get_mpz_t(), w.q.get_mpz_t(), static_cast<unsigned long>(n));
    w.holds_power = qn_pow < cf.q(n + 1);
    out.push_back(std::move(w));
  }
  return out;
}

SmoothAnalysis smooth_analysis(const DenominatorModel& model, const GroupPair& gp, int p_max) {
  SmoothAnalysis out;
  out.p_max = p_max;
  out.depth.assign(static_cast<std::size_t>(p_max + 1), -1);
  if (!model.exact()) {
    out.argument = "float coefficients: undecided";
    return out;
  }
  const long long L = model.L(), U = model.U(), V = model.V(), C0 = model.C0(), C1 = model.C1();
  if (!model.re_q0_zero()) {
    out.certified_lower = model.q0().re.abs_lower(model.cf());
    out.argument = "Re q0 != 0 bounds |sigma| below by |Re q0| at every scale";
    return out;
  }
  if (V == 0) {
    const auto cert = ladder_certificate(model, gp, WeightSequence::gevrey(1.0), 1.0);
    out.certified_lower = std::exp(cert.log_C_lower);
    out.argument = cert.note;
    return out;
  }
  out.applicable = true;
  const auto& cf = model.cf();
  const int J = 64;

  // Witness search at convergent n: M' = j q_n, K = -j p_n with integral,
  // parity-compatible weights.
  const BigInt bL(static_cast<long>(L)), bU(static_cast<long>(U)), bV(static_cast<long>(V));
  const BigInt bC0(static_cast<long>(C0)), bC1(static_cast<long>(C1));
  auto find_j = [&](const BigInt& p, const BigInt& q, BigInt& l2, BigInt& m2) -> int {
    for (int j = 1; j <= J; ++j) {
      const BigInt num_mu = BigInt(j) * q - bC1;
      if (num_mu % bV != 0) continue;
      BigInt mu2 = num_mu / bV;
      if (!parity_ok(gp.second, mu2)) continue;
      const BigInt num_l = BigInt(-j) * p - bU * mu2 - bC0;
      if (num_l % bL != 0) continue;
      BigInt lam2 = num_l / bL;
      if (!parity_ok(gp.first, lam2)) continue;
      l2 = lam2;
      m2 = mu2;
      return j;
    }
    return 0;
  };

  const double log10_2l = std::log10(2.0 * static_cast<double>(L));
  for (int n = 0; n < cf.max_convergent(); ++n) {
    SmoothWitness w;
    const int j = find_j(cf.p(n), cf.q(n), w.lambda2, w.mu2);
    if (j == 0) continue;
    w.n = n;
    w.j = j;
    w.log10_sigma_upper = std::log10(static_cast<double>(j)) - log_abs(cf.q(n + 1)) / kLog10 - log10_2l;
    const BigInt s = abs(w.lambda2) + abs(w.mu2) + 4;
    w.log10_scale_upper = log_abs(s) / kLog10 - std::log10(2.0);
    // Exact: |K + alpha M'| = j |alpha q_n - p_n| < j / q_{n+1}.
    const auto lw = liouville_witnesses(cf, n);
    w.exact_check = lw.back().bound == make_rational(1, cf.q(n + 1));
    out.witnesses.push_back(std::move(w));
  }

  if (!cf.is_factorial_tower()) {
    out.argument = "explicit witnesses only; no tail argument for a general continued fraction";
    return out;
  }

  // Residues of p_n, q_n modulo a modulus that decides the witness search.
  const long long mod = 4 * L * std::llabs(V) * 2;
  BigInt M(static_cast<long>(mod));
  const int n_res = 400;
  std::vector<int> has(static_cast<std::size_t>(n_res), 0);
  BigInt a = BigInt(10) % M;  // a_0 = 10^{1!}
  BigInt pm2 = 1, pm1 = a, qm2 = 0, qm1 = 1;  // p_{-1}, p_0, q_{-1}, q_0 (mod)
  std::map<std::tuple<long, long, long, long, long>, int> seen;
  int period_start = -1, period = 0;
  for (int n = 0; n < n_res; ++n) {
    if (n > 0) {
      BigInt next;
      mpz_powm_ui(next.get_mpz_t(), a.get_mpz_t(), static_cast<unsigned long>(n + 1), M.get_mpz_t());
      a = next;  // a_n = a_{n-1}^{n+1}
      BigInt p = (a * pm1 + pm2) % M, q = (a * qm1 + qm2) % M;
      pm2 = pm1;
      pm1 = p;
      qm2 = qm1;
      qm1 = q;
    }
    BigInt l2, m2;
    // Residues decide divisibility and parity, so reduced values suffice.
    BigInt pr = pm1, qr = qm1;
    has[static_cast<std::size_t>(n)] = find_j(pr, qr, l2, m2) != 0;
    const auto key = std::make_tuple(a.get_si(), pm2.get_si(), pm1.get_si(), qm2.get_si(), qm1.get_si());
    if (period_start < 0) {
      if (auto it = seen.find(key); it != seen.end()) {
        period_start = it->second;
        period = n - it->second;
      } else {
        seen.emplace(key, n);
      }
    }
  }
  bool recurs = false;
  if (period_start >= 0) {
    for (int n = period_start; n < period_start + period; ++n) recurs |= has[static_cast<std::size_t>(n)] != 0;
  }
  out.witness_family_recurs = recurs;

  // Symbolic bound for witness index n, using
  //   log10 q_n in [S_n, S_n + 0.005], S_n = sum_{i=1..n} (i+1)!,
  //   log10 q_{n+1} >= (n+2)! + log10 q_n, p_n <= 11 q_n.
  const double c_scale = (1.0 / std::llabs(V) + 11.0 / L + static_cast<double>(std::llabs(U)) / (L * std::llabs(V))) * J / 2.0 +
                         2.0 + (std::llabs(C1) / static_cast<double>(std::llabs(V)) + std::llabs(C0)) / 2.0;
  auto log10_ratio = [&](int n, int P) {
    double S = 0.0, f = 1.0;
    for (int i = 1; i <= n; ++i) {
      f *= (i + 1);
      S += f;
    }
    const double fn2 = f * (n + 2);
    const double lq_hi = S + 0.005, lq_lo = S;
    const double lq = (P - 1 >= 0) ? lq_hi : lq_lo;
    return std::log10(static_cast<double>(J)) - log10_2l - fn2 + (P - 1) * lq + P * std::log10(c_scale);
  };
  for (int P = 0; P <= p_max; ++P) {
    for (int n = 0; n < 40 && n < n_res; ++n) {
      if (!has[static_cast<std::size_t>(n)]) continue;
      if (log10_ratio(n, P) < -30.0) {
        out.depth[static_cast<std::size_t>(P)] = n;
        break;
      }
    }
  }
  bool all_depth = true;
  for (int P = 1; P <= p_max; ++P) all_depth &= out.depth[static_cast<std::size_t>(P)] >= 0;
  out.refuted = recurs && all_depth && !out.witnesses.empty();
  std::ostringstream os;
  os << "witnesses K=-j p_n, M'=j q_n exist for infinitely many n (residues mod " << mod
     << " are periodic from n=" << period_start << " with period " << period
     << "); for such n, log10(|sigma| scale^P) <= const + (P-1) log10 q_n - (n+2)! "
        "<= const + (n+1)! (2P - n - 4) -> -inf, so no bound C scale^-P holds";
  if (!recurs) os.str("witness family does not recur; smooth case undecided");
  out.argument = os.str();
  return out;
}

}  // namespace komatsu
