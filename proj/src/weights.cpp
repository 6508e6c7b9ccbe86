#include "komatsu/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "komatsu/error.hpp"

namespace komatsu {

namespace {

constexpr int kAssociatedIterationCap = 10'000'000;
constexpr int kBoundednessScanCap = 100'000;

double rel_tol(double a, double b) { return 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

WeightSequence WeightSequence::gevrey(double s) {
  if (!(s >= 1.0) || !std::isfinite(s)) throw DomainError("Gevrey order must satisfy s >= 1");
  WeightSequence w;
  w.order_ = s;
  const double c = std::pow(2.0, s);
  w.witness_ = StabilityWitness{c, c};
  return w;
}

WeightSequence WeightSequence::custom(std::vector<double> table) {
  if (table.empty()) throw InvalidSequence("custom weight table is empty");
  WeightSequence w;
  w.raw_table_ = table;
  w.table_.reserve(table.size());
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (!(table[k] > 0.0) || !std::isfinite(table[k])) {
      throw InvalidSequence("M_" + std::to_string(k) + " is not a positive finite number");
    }
    w.table_.push_back(std::log(table[k]));
  }
  return w;
}

std::optional<int> WeightSequence::kmax() const noexcept {
  if (is_gevrey()) return std::nullopt;
  return static_cast<int>(table_.size()) - 1;
}

double WeightSequence::log_value(int k) const {
  if (k < 0) throw IndexError("negative weight index");
  if (is_gevrey()) return order_ * std::lgamma(static_cast<double>(k) + 1.0);
  if (static_cast<std::size_t>(k) >= table_.size()) {
    throw IndexError("weight index " + std::to_string(k) + " beyond table (kmax=" +
                     std::to_string(table_.size() - 1) + ")");
  }
  return table_[static_cast<std::size_t>(k)];
}

double WeightSequence::value(int k) const { return std::exp(log_value(k)); }

double WeightSequence::log_ratio(int k) const {
  if (is_gevrey()) return order_ * std::log(static_cast<double>(k) + 1.0);
  return log_value(k + 1) - log_value(k);
}

WeightSequence WeightSequence::with_witness(StabilityWitness wit) const {
  if (!(wit.A >= 1.0) || !(wit.H > 0.0)) throw DomainError("witness needs A >= 1 and H > 0");
  WeightSequence copy = *this;
  copy.witness_ = wit;
  return copy;
}

std::string WeightSequence::describe() const {
  std::ostringstream os;
  if (is_gevrey()) {
    os << "gevrey(s=" << order_ << ")";
  } else {
    os << "custom(kmax=" << table_.size() - 1 << ")";
  }
  return os.str();
}

AssociatedFunctionQuery associated(const WeightSequence& w, double r) {
  if (std::isnan(r) || r < 0.0) throw DomainError("associated function needs r >= 0");
  AssociatedFunctionQuery out{r, 0.0, 0};
  if (r == 0.0) return out;
  const double log_r = std::log(r);
  const auto kmax = w.kmax();
  for (int k = 0; k < kAssociatedIterationCap; ++k) {
    // Terms stop increasing once M_{k+1}/M_k exceeds r; under (LC) the ratio
    // never decreases again, so the running maximum is the supremum.
    if (kmax && k >= *kmax) {
      throw NoConvergence("weight table exhausted before the stopping rule triggered at r=" +
                          std::to_string(r));
    }
    if (w.log_ratio(k) > log_r) return out;
    const int next = k + 1;
    const double term = next * log_r - w.log_value(next);
    if (term > out.value) {
      out.value = term;
      out.argmax = next;
    }
  }
  throw NoConvergence("associated function scan hit the iteration cap");
}

double associated_value(const WeightSequence& w, double r) { return associated(w, r).value; }

double associated_fast(const WeightSequence& w, double r) {
  if (!w.is_gevrey() || r <= 0.0) return associated_value(w, r);
  const double log_r = std::log(r);
  const double k_real = std::floor(std::exp(log_r / w.gevrey_order()));
  if (!(k_real < 1e9)) throw NoConvergence("associated function argument too large");
  const int k = static_cast<int>(k_real);
  double best = 0.0;
  for (int j = std::max(1, k - 1); j <= k + 1; ++j) best = std::max(best, j * log_r - w.log_value(j));
  return best;
}

double gevrey_associated_lower_bound_log(double order, double log_r) {
  const double log_x = log_r / order;
  if (log_x <= 0.0) return 0.0;
  if (log_x > 700.0) return std::numeric_limits<double>::infinity();
  const double x = std::exp(log_x);
  return std::max(0.0, order * (x - 2.0 - 0.5 * log_x));
}

bool AxiomReport::all_pass() const {
  return std::all_of(results.begin(), results.end(), [](const AxiomResult& r) { return r.pass; });
}

const AxiomResult& AxiomReport::get(const std::string& axiom) const {
  for (const auto& r : results) {
    if (r.axiom == axiom) return r;
  }
  throw IndexError("no axiom named " + axiom);
}

namespace {

// Log of the largest ratio in a scanned family together with a flag telling
// whether the family looks bounded: its maximum is reached in the first half
// of the scan rather than being pushed up at the tail.
struct ScanMax {
  double log_max = -std::numeric_limits<double>::infinity();
  bool bounded = false;
};

template <class F>
ScanMax scan_max(int n, F&& log_term) {
  ScanMax out;
  if (n <= 0) {
    out.bounded = true;
    return out;
  }
  double first_half = -std::numeric_limits<double>::infinity();
  double second_half = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double v = log_term(k);
    out.log_max = std::max(out.log_max, v);
    if (2 * k < n) {
      first_half = std::max(first_half, v);
    } else {
      second_half = std::max(second_half, v);
    }
  }
  out.bounded = second_half <= first_half + rel_tol(first_half, second_half);
  return out;
}

// C_l = sup_k k!/(l^k M_k), scanned until the terms decrease for good or the
// scan cap is hit. Returns nullopt if the terms are still growing at the end.
std::optional<double> m3_constant(const WeightSequence& w, double ell, int kmax) {
  const double log_ell = std::log(ell);
  const auto table = w.kmax();
  int limit = table ? *table : kBoundednessScanCap;
  double best = -std::numeric_limits<double>::infinity();
  int decreasing_run = 0;
  for (int k = 0; k <= limit; ++k) {
    const double term = std::lgamma(k + 1.0) - k * log_ell - w.log_value(k);
    best = std::max(best, term);
    if (k + 1 <= limit) {
      const double step = std::log(k + 1.0) - log_ell - w.log_ratio(k);
      decreasing_run = step <= 1e-15 ? decreasing_run + 1 : 0;
    }
    if (!table && k >= kmax && decreasing_run >= 10) return std::exp(best);
  }
  if (table) {
    const ScanMax sm = scan_max(limit + 1, [&](int k) {
      return std::lgamma(k + 1.0) - k * log_ell - w.log_value(k);
    });
    if (sm.bounded) return std::exp(sm.log_max);
  }
  return std::nullopt;
}

}  // namespace

AxiomReport check_axioms(const WeightSequence& w, int kmax, bool beurling) {
  if (kmax < 2) throw DomainError("check_axioms needs kmax >= 2");
  if (auto t = w.kmax(); t && *t < kmax) kmax = *t;
  AxiomReport rep;
  rep.kmax = kmax;
  rep.beurling = beurling;

  {
    AxiomResult r{"M.0"};
    const double lm0 = w.log_value(0);
    r.pass = lm0 == 0.0;
    r.margin = -std::abs(lm0);
    if (!r.pass) r.first_failure = 0;
    rep.results.push_back(r);
  }

  // (M.1) and (M.2): minimal A per H over the H grid, keep the smallest A*H.
  {
    AxiomResult m1{"M.1"}, m2{"M.2"};
    double best_product = std::numeric_limits<double>::infinity();
    StabilityWitness best{};
    double best_a1 = 0.0, best_a2 = 0.0;
    std::vector<double> h_grid(std::begin(kWitnessHGrid), std::end(kWitnessHGrid));
    if (w.witness()) h_grid.push_back(w.witness()->H);
    for (double H : h_grid) {
      const double log_h = std::log(H);
      const ScanMax s1 = scan_max(kmax, [&](int k) { return w.log_ratio(k) - k * log_h; });
      const ScanMax s2 = scan_max(kmax / 2 + 1, [&](int k) {
        return w.log_value(2 * k) - 2 * k * log_h - 2.0 * w.log_value(k);
      });
      if (!s1.bounded || !s2.bounded) continue;
      const double a1 = std::max(1.0, std::exp(s1.log_max));
      const double a2 = std::max(1.0, std::exp(s2.log_max));
      const double A = std::max(a1, a2);
      if (A * H < best_product * (1.0 - 1e-12)) {
        best_product = A * H;
        best = {A, H};
        best_a1 = a1;
        best_a2 = a2;
      }
    }
    const bool found = std::isfinite(best_product);
    m1.pass = m2.pass = found;
    if (found) {
      m1.witness = {{"A", best.A}, {"H", best.H}};
      m2.witness = {{"A", best.A}, {"H", best.H}};
      m1.margin = std::log(best.A) - std::log(best_a1);
      m2.margin = std::log(best.A) - std::log(best_a2);
    } else {
      m1.note = m2.note = "no candidate H gives a bounded ratio over the scan";
    }
    rep.results.push_back(m1);
    rep.results.push_back(m2);
  }

  // (M.3) / (M.3') sampled on the log-grid l = 2^j, j = -10..10.
  {
    AxiomResult m3{beurling ? "M.3'" : "M.3"};
    bool all_bounded = true;
    std::optional<std::pair<double, double>> smallest;
    for (int j = -10; j <= 10; ++j) {
      const double ell = std::ldexp(1.0, j);
      const auto c = m3_constant(w, ell, kmax);
      if (!c) {
        all_bounded = false;
        if (beurling && !m3.first_failure) m3.note = "unbounded at l=2^" + std::to_string(j);
        continue;
      }
      if (!smallest) smallest = std::make_pair(ell, *c);
    }
    if (beurling) {
      m3.pass = all_bounded;
      if (smallest) m3.witness = {{"l_min", smallest->first}, {"C_l", smallest->second}};
    } else {
      m3.pass = smallest.has_value();
      if (smallest) m3.witness = {{"l", smallest->first}, {"C", smallest->second}};
    }
    rep.results.push_back(m3);
  }

  {
    AxiomResult m4{"M.4"};
    m4.pass = true;
    m4.margin = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= kmax && m4.pass; ++r) {
      for (int s = 0; r + s <= kmax; ++s) {
        const double lhs = w.log_value(r) - std::lgamma(r + 1.0) + w.log_value(s) - std::lgamma(s + 1.0);
        const double rhs = w.log_value(r + s) - std::lgamma(r + s + 1.0);
        const double slack = rhs - lhs;
        m4.margin = std::min(m4.margin, slack);
        if (slack < -rel_tol(lhs, rhs)) {
          m4.pass = false;
          m4.first_failure = r + s;
          break;
        }
      }
    }
    rep.results.push_back(m4);
  }

  {
    AxiomResult lc{"LC"}, mono{"monotone"};
    lc.pass = mono.pass = true;
    lc.margin = mono.margin = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= kmax - 1; ++k) {
      const double lhs = 2.0 * w.log_value(k);
      const double rhs = w.log_value(k - 1) + w.log_value(k + 1);
      lc.margin = std::min(lc.margin, rhs - lhs);
      if (rhs - lhs < -rel_tol(lhs, rhs) && lc.pass) {
        lc.pass = false;
        lc.first_failure = k;
      }
    }
    for (int k = 0; k < kmax; ++k) {
      const double d = w.log_value(k + 1) - w.log_value(k);
      mono.margin = std::min(mono.margin, d);
      if (d < -rel_tol(w.log_value(k), w.log_value(k + 1)) && mono.pass) {
        mono.pass = false;
        mono.first_failure = k;
      }
    }
    rep.results.push_back(lc);
    rep.results.push_back(mono);
  }
  return rep;
}

namespace {

StabilityWitness require_witness(const WeightSequence& w, std::optional<StabilityWitness> given) {
  if (given) return *given;
  if (w.witness()) return *w.witness();
  throw MissingWitness("inequality needs stability constants (A, H)");
}

}  // namespace

InequalityCheck check_inequality_prop31(const WeightSequence& w, double r, double s,
                                        std::optional<StabilityWitness> witness) {
  if (!(r > 0.0) || !(s > 0.0)) throw DomainError("prop 3.1 needs r, s > 0");
  const StabilityWitness wit = require_witness(w, witness);
  InequalityCheck out;
  const double mr = associated_value(w, r);
  const double ms = associated_value(w, s);
  {
    const double lhs = -mr - ms;
    const double rhs = -associated_value(w, 0.5 * (r + s));
    out.slack_i = rhs - lhs;
    out.pass_i = out.slack_i >= -rel_tol(lhs, rhs);
  }
  {
    const double lhs = mr + ms;
    const double rhs = std::log(wit.A) + associated_value(w, wit.H * (r + s));
    out.slack_ii = rhs - lhs;
    out.pass_ii = out.slack_ii >= -rel_tol(lhs, rhs);
  }
  return out;
}

InequalityCheck check_inequality_prop32(const WeightSequence& w, double r, double s, int t,
                                        std::optional<StabilityWitness> witness) {
  if (!(r > 0.0) || !(s > 0.0) || t < 0) throw DomainError("prop 3.2 needs r, s > 0 and t >= 0");
  const StabilityWitness wit = require_witness(w, witness);
  InequalityCheck out;
  const double log_a = std::log(wit.A);
  const double log_h = std::log(wit.H);
  const double log_mt = w.log_value(t);
  {
    const double lhs = t * std::log(r) - associated_value(w, s * r);
    const double rhs = log_a + t * (log_h - std::log(s)) + log_mt - associated_value(w, s * r / wit.H);
    out.slack_i = rhs - lhs;
    out.pass_i = out.slack_i >= -rel_tol(lhs, rhs);
  }
  {
    const double lhs = t * std::log(r) + associated_value(w, s * r);
    const double rhs = log_a - t * std::log(s) + log_mt + associated_value(w, wit.H * s * r);
    out.slack_ii = rhs - lhs;
    out.pass_ii = out.slack_ii >= -rel_tol(lhs, rhs);
  }
  return out;
}

Bounds2xResult check_bounds_2x(const WeightSequence& w, double p, double q, double delta,
                               std::span<const double> grid,
                               std::optional<StabilityWitness> witness) {
  if (grid.empty()) throw DomainError("bounds check needs a nonempty grid");
  if (!(p > 0.0) || !(q > 0.0) || !(delta > 0.0)) throw DomainError("p, q, delta must be positive");
  const StabilityWitness wit = require_witness(w, witness);
  Bounds2xResult out;
  double best = -std::numeric_limits<double>::infinity();
  double last = 0.0;
  out.komine_pass = true;
  out.komine_min_slack = std::numeric_limits<double>::infinity();
  for (double x : grid) {
    if (!(x > 0.0)) throw DomainError("bounds grid must be positive");
    const double mqx = associated_value(w, q * x);
    const double lhs = p * std::log(x) - delta * mqx;
    if (lhs > best) {
      best = lhs;
      out.argmax_x = x;
    }
    last = lhs;
    const double k_lhs = -0.5 * mqx;
    const double k_rhs = 0.5 * std::log(wit.A) - associated_value(w, q * x / wit.H);
    const double slack = k_rhs - k_lhs;
    out.komine_min_slack = std::min(out.komine_min_slack, slack);
    if (slack < -rel_tol(k_lhs, k_rhs)) out.komine_pass = false;
  }
  out.fitted_C = std::exp(best);
  out.tail_decreasing = last < best || grid.size() == 1;
  return out;
}

}  // namespace komatsu
