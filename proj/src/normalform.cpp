#include "komatsu/normalform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "komatsu/error.hpp"
#include "komatsu/kernels.hpp"

namespace komatsu {

namespace {

constexpr double kPrimitiveTol = 1e-10;
constexpr double kQResonanceTol = 1e-9;
constexpr std::size_t kChunkBudget = std::size_t{1} << 22;  // complex values per chunk
constexpr double kWorkLimit = 4e9;      // x1 nodes times x2 nodes
constexpr double kStorageLimit = 6e7;   // x1 nodes times output modes

std::string mode_label(const Rep& rep, int row, int col) {
  if (rep.group == GroupKind::Torus) return "k=" + std::to_string(rep.index);
  return "l=" + HalfInt{rep.index}.str() + " m=" + HalfInt{twice_weight(rep, row)}.str() +
         " n=" + HalfInt{twice_weight(rep, col)}.str();
}

bool is_trivial(const Rep& rep) { return rep.index == 0; }

std::string pair_label(const Basis& b1, int i, const Basis& b2, int j) {
  const auto& e1 = b1.entry(i);
  const auto& e2 = b2.entry(j);
  return mode_label(b1.rep_of(i), e1.row, e1.col) + " | " + mode_label(b2.rep_of(j), e2.row, e2.col);
}

int default_q_extra(GroupKind g2) { return g2 == GroupKind::Torus ? 24 : 12; }

// Largest |mu| for an x2 band.
double mu_max(GroupKind g2, int band) { return g2 == GroupKind::Torus ? band : 0.5 * band; }

void check_mixed(const PartialField& u) {
  if (!u.grid || !u.spectral_second) throw ShapeError("expected a mixed field (x1 grid, x2 spectral)");
  if (u.values.rows() != u.grid->size() || u.values.cols() != u.basis.size()) {
    throw ShapeError("mixed field shape mismatch");
  }
}

PartialField pad_to(const PartialField& u, int band) {
  if (u.basis.band() == band) return u;
  return mixed_resize(u, Basis(u.basis.group(), band));
}

PartialField add(const PartialField& a, const PartialField& b, cplx cb = 1.0) {
  if (a.grid != b.grid) throw ShapeError("mixed fields live on different grids");
  const int band = std::max(a.basis.band(), b.basis.band());
  PartialField out = pad_to(a, band);
  const PartialField bb = pad_to(b, band);
  out.values += cb * bb.values;
  return out;
}

// x2 spectrum of a named function (band 1 suffices for every built-in).
const std::vector<cplx>& named_spectrum(NamedFn f, GroupKind g) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::vector<cplx>> cache;
  const auto key = std::make_pair(static_cast<int>(f), static_cast<int>(g));
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const GridPtr grid = shared_grid(g, 1);
  const Basis basis(g, 1);
  std::vector<cplx> vals(static_cast<std::size_t>(grid->size()));
  for (int x = 0; x < grid->size(); ++x) vals[static_cast<std::size_t>(x)] = eval_named(f, grid->point(x));
  std::vector<cplx> c(static_cast<std::size_t>(basis.size()));
  reference::analyze(*grid, basis, vals.data(), 1, c.data());
  for (auto& z : c) {
    if (std::abs(z) < 1e-15) z = 0.0;
  }
  return cache.emplace(key, std::move(c)).first->second;
}

}  // namespace

// ---------------------------------------------------------------- functions

const char* named_fn_name(NamedFn f) {
  switch (f) {
    case NamedFn::One: return "one";
    case NamedFn::SinT: return "sin_t";
    case NamedFn::CosT: return "cos_t";
    case NamedFn::Tr: return "tr";
    case NamedFn::H: return "h";
    case NamedFn::P1: return "p1";
    case NamedFn::P2: return "p2";
  }
  return "?";
}

NamedFn parse_named_fn(const std::string& name) {
  for (NamedFn f : {NamedFn::One, NamedFn::SinT, NamedFn::CosT, NamedFn::Tr, NamedFn::H, NamedFn::P1,
                    NamedFn::P2}) {
    if (name == named_fn_name(f)) return f;
  }
  throw ConfigError("unknown function '" + name + "' (one, sin_t, cos_t, tr, h, p1, p2)");
}

bool named_fn_allowed(NamedFn f, GroupKind g) {
  if (f == NamedFn::One) return true;
  if (f == NamedFn::SinT || f == NamedFn::CosT) return g == GroupKind::Torus;
  return g == GroupKind::SU2;
}

cplx eval_named(NamedFn f, const Point& x) {
  const double c = std::cos(0.5 * x.theta), s = std::sin(0.5 * x.theta);
  switch (f) {
    case NamedFn::One: return 1.0;
    case NamedFn::SinT: return std::sin(x.t);
    case NamedFn::CosT: return std::cos(x.t);
    case NamedFn::Tr: return 2.0 * c * std::cos(0.5 * (x.phi + x.psi));
    case NamedFn::H: return -c * std::sin(0.5 * (x.phi + x.psi));
    case NamedFn::P1: return c * std::polar(1.0, 0.5 * (x.phi + x.psi));
    case NamedFn::P2: return cplx(0.0, s) * std::polar(1.0, 0.5 * (x.phi - x.psi));
  }
  return 0.0;
}

bool Expr::depends_on_x2() const {
  return std::any_of(terms.begin(), terms.end(), [](const Term& t) { return t.f2 != NamedFn::One; });
}

bool Expr::depends_on_x1() const {
  return std::any_of(terms.begin(), terms.end(), [](const Term& t) { return t.f1 != NamedFn::One; });
}

ExactComplex Expr::mean() const {
  ExactComplex m;
  for (const auto& t : terms) {
    if (t.f1 == NamedFn::One && t.f2 == NamedFn::One) m = m + t.coef;
  }
  return m;
}

Expr Expr::minus_mean() const {
  Expr out;
  for (const auto& t : terms) {
    if (t.f1 != NamedFn::One || t.f2 != NamedFn::One) out.terms.push_back(t);
  }
  return out;
}

cplx Expr::eval(const Point& x1, const Point& x2, double alpha) const {
  cplx s = 0.0;
  for (const auto& t : terms) s += t.coef.to_complex(alpha) * eval_named(t.f1, x1) * eval_named(t.f2, x2);
  return s;
}

void Expr::validate(const GroupPair& gp) const {
  for (const auto& t : terms) {
    if (!named_fn_allowed(t.f1, gp.first) || !named_fn_allowed(t.f2, gp.second)) {
      throw ConfigError(std::string("function not defined on this group: ") + named_fn_name(t.f1) + "(x1)*" +
                        named_fn_name(t.f2) + "(x2)");
    }
  }
}

std::string Expr::str() const {
  if (terms.empty()) return "0";
  std::string s;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto& t = terms[k];
    if (k) s += " + ";
    s += "(" + t.coef.str() + ")";
    if (t.f1 != NamedFn::One) s += std::string("*") + named_fn_name(t.f1) + "(x1)";
    if (t.f2 != NamedFn::One) s += std::string("*") + named_fn_name(t.f2) + "(x2)";
  }
  return s;
}

Expr Expr::operator+(const Expr& o) const {
  Expr out = *this;
  out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
  return out;
}

Expr Expr::operator*(const ExactComplex& c) const {
  // (a + ib)(c + id) with a, b, c, d in Q(alpha) requires alpha^2; only
  // rational or purely real/imaginary scalings are closed.
  Expr out = *this;
  for (auto& t : out.terms) {
    const auto& a = t.coef.re;
    const auto& b = t.coef.im;
    const auto& cr = c.re;
    const auto& ci = c.im;
    auto mul = [](const AlphaAffine& x, const AlphaAffine& y) {
      if (x.v != 0 && y.v != 0) throw DomainError("product of two alpha-dependent coefficients");
      return AlphaAffine{x.u * y.u, x.u * y.v + x.v * y.u};
    };
    t.coef = ExactComplex{mul(a, cr) - mul(b, ci), mul(a, ci) + mul(b, cr)};
  }
  return out;
}

Expr constant_expr(const ExactComplex& c) {
  Expr e;
  e.terms.push_back(Term{c, NamedFn::One, NamedFn::One});
  return e;
}

AlphaAffine parse_alpha_affine(const std::string& text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  }
  if (s.empty()) throw ConfigError("empty coefficient");
  auto rational = [&](const std::string& tok) -> BigRational {
    if (tok.empty()) return 1;
    const auto dot = tok.find('.');
    if (dot != std::string::npos) {
      if (tok.find('/') != std::string::npos || tok.find_first_of("eE") != std::string::npos) {
        throw ConfigError("bad number '" + tok + "'");
      }
      const std::string digits = tok.substr(0, dot) + tok.substr(dot + 1);
      BigInt num, den;
      if (num.set_str(digits, 10) != 0) throw ConfigError("bad number '" + tok + "'");
      mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(tok.size() - dot - 1));
      return make_rational(num, den);
    }
    BigRational q;
    if (q.set_str(tok, 10) != 0) throw ConfigError("bad number '" + tok + "'");
    if (q.get_den() == 0) throw ConfigError("zero denominator in '" + tok + "'");
    q.canonicalize();
    return q;
  };
  AlphaAffine out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    int sign = 1;
    while (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      if (s[pos] == '-') sign = -sign;
      ++pos;
    }
    std::size_t end = pos;
    while (end < s.size() && s[end] != '+' && s[end] != '-') ++end;
    std::string tok = s.substr(pos, end - pos);
    if (tok.empty()) throw ConfigError("bad coefficient '" + text + "'");
    pos = end;
    bool is_alpha = false;
    if (tok.size() >= 5 && tok.compare(tok.size() - 5, 5, "alpha") == 0) {
      is_alpha = true;
      tok.resize(tok.size() - 5);
      if (!tok.empty() && tok.back() == '*') tok.pop_back();
    }
    const BigRational q = rational(tok) * sign;
    if (is_alpha) {
      out.v += q;
    } else {
      out.u += q;
    }
  }
  return out;
}

double alpha_convergent(int n) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  const auto cf = ContinuedFraction::factorial_tower(std::max(n, 1));
  const double v = make_rational(cf.p(n), cf.q(n)).get_d();
  cache.emplace(n, v);
  return v;
}

// ---------------------------------------------------------------- G1 functions

namespace {

void finish_coefficient(CoefficientFunction& c) {
  cplx m = 0.0;
  double imax = 0.0;
  for (int x = 0; x < c.grid->size(); ++x) {
    m += c.grid->weight(x) * c.values[static_cast<std::size_t>(x)];
    imax = std::max(imax, std::abs(c.values[static_cast<std::size_t>(x)].imag()));
  }
  c.mean = m;
  c.real = imax < 1e-12;
}

}  // namespace

CoefficientFunction CoefficientFunction::from_expr(GridPtr grid, const Expr& e, double alpha) {
  if (e.depends_on_x2()) throw ConfigError("a coefficient on G1 cannot depend on x2");
  CoefficientFunction c;
  c.grid = std::move(grid);
  c.values.resize(static_cast<std::size_t>(c.grid->size()));
  for (int x = 0; x < c.grid->size(); ++x) c.values[static_cast<std::size_t>(x)] = e.eval(c.grid->point(x), {}, alpha);
  finish_coefficient(c);
  return c;
}

CoefficientFunction CoefficientFunction::from_samples(GridPtr grid, std::vector<cplx> values) {
  if (!grid || static_cast<int>(values.size()) != grid->size()) throw ShapeError("samples do not match the grid");
  CoefficientFunction c;
  c.grid = std::move(grid);
  c.values = std::move(values);
  finish_coefficient(c);
  return c;
}

std::vector<cplx> solve_primitive_G1(const CoefficientFunction& a) {
  if (!a.grid) throw ShapeError("coefficient without grid");
  const GroupGrid& grid = *a.grid;
  const Basis basis = grid.basis();
  std::vector<cplx> c(static_cast<std::size_t>(basis.size()));
  parallel::analyze(grid, basis, a.values.data(), 1, c.data());
  double norm2 = 0.0;
  for (int i = 0; i < basis.size(); ++i) norm2 += dim(basis.rep_of(i)) * std::norm(c[static_cast<std::size_t>(i)]);
  const double tol = kPrimitiveTol * std::sqrt(norm2);
  std::vector<std::string> bad;
  for (int i = 0; i < basis.size(); ++i) {
    auto& z = c[static_cast<std::size_t>(i)];
    const Rep& rep = basis.rep_of(i);
    const auto& e = basis.entry(i);
    const int l2 = twice_weight(rep, e.row);
    if (is_trivial(rep)) {
      z = 0.0;
    } else if (l2 == 0) {
      if (std::abs(z) >= tol && std::abs(z) > 0.0) bad.push_back(mode_label(rep, e.row, e.col));
      z = 0.0;
    } else {
      z /= cplx(0.0, 0.5 * l2);
    }
  }
  if (!bad.empty()) {
    throw NotSolvable("a - a0 has content on modes with lambda_m = 0; no primitive A exists", bad);
  }
  std::vector<cplx> A(static_cast<std::size_t>(grid.size()));
  parallel::synthesize(grid, basis, c.data(), 1, A.data());
  return A;
}

double primitive_residual(const CoefficientFunction& a, std::span<const cplx> A) {
  if (static_cast<int>(A.size()) != a.grid->size()) throw ShapeError("primitive does not match the grid");
  const auto XA = vector_field_apply(*a.grid, A);
  double s = 0.0;
  for (int x = 0; x < a.grid->size(); ++x) {
    const auto k = static_cast<std::size_t>(x);
    s += a.grid->weight(x) * std::norm(XA[k] - (a.values[k] - a.mean));
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------- mixed form

double mixed_norm(const PartialField& u) {
  check_mixed(u);
  double s = 0.0;
  for (int i = 0; i < u.values.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < u.values.cols(); ++j) row += dim(u.basis.rep_of(j)) * std::norm(u.values(i, j));
    s += u.grid->weight(i) * row;
  }
  return std::sqrt(s);
}

PartialField mixed_zero(GridPtr g1, const Basis& b2) {
  PartialField u;
  u.grid = std::move(g1);
  u.basis = b2;
  u.spectral_second = true;
  u.values = CMatrix::Zero(u.grid->size(), b2.size());
  return u;
}

PartialField mixed_resize(const PartialField& u, const Basis& b2) {
  check_mixed(u);
  if (b2.group() != u.basis.group()) throw ShapeError("x2 group mismatch");
  PartialField out = mixed_zero(u.grid, b2);
  const int c = std::min(u.basis.size(), b2.size());
  out.values.leftCols(c) = u.values.leftCols(c);
  return out;
}

PartialField mixed_x1_field(const PartialField& u) {
  check_mixed(u);
  PartialField out = mixed_zero(u.grid, u.basis);
  const GroupGrid& g = *u.grid;
  const Axis axis = g.field_axis();
  const RMatrix& d = g.derivative_matrix(axis);
  const auto lines = g.lines(axis);
  const int nl = static_cast<int>(lines.starts.size());
#pragma omp parallel for schedule(static)
  for (int li = 0; li < nl; ++li) {
    const int s0 = lines.starts[static_cast<std::size_t>(li)];
    for (int a = 0; a < lines.length; ++a) {
      auto dst = out.values.row(s0 + a * lines.stride);
      for (int b = 0; b < lines.length; ++b) {
        const double c = d(a, b);
        if (c != 0.0) dst += c * u.values.row(s0 + b * lines.stride);
      }
    }
  }
  return out;
}

PartialField mixed_x2_field(const PartialField& u) {
  check_mixed(u);
  PartialField out = u;
  for (int j = 0; j < u.basis.size(); ++j) {
    out.values.col(j) *= cplx(0.0, weight(u.basis.rep_of(j), u.basis.entry(j).row));
  }
  return out;
}

PartialField mixed_scale_x1(const PartialField& u, std::span<const cplx> f) {
  check_mixed(u);
  if (static_cast<int>(f.size()) != u.grid->size()) throw ShapeError("x1 factor does not match the grid");
  PartialField out = u;
  for (int i = 0; i < u.grid->size(); ++i) out.values.row(i) *= f[static_cast<std::size_t>(i)];
  return out;
}

PartialField mixed_from_expr(const Expr& e, GridPtr g1, GroupKind g2, double alpha) {
  const int band = e.depends_on_x2() ? 1 : 0;
  PartialField out = mixed_zero(g1, Basis(g2, band));
  const int n1 = out.grid->size();
  std::vector<Point> pts(static_cast<std::size_t>(n1));
  for (int i = 0; i < n1; ++i) pts[static_cast<std::size_t>(i)] = out.grid->point(i);
  for (const auto& t : e.terms) {
    const cplx c = t.coef.to_complex(alpha);
    const auto& spec = named_spectrum(t.f2, g2);
    for (int j = 0; j < out.basis.size(); ++j) {
      const cplx s = spec[static_cast<std::size_t>(j)];
      if (s == 0.0) continue;
      for (int i = 0; i < n1; ++i) out.values(i, j) += c * s * eval_named(t.f1, pts[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

PartialField mixed_multiply(const PartialField& u, const PartialField& f, PointwiseOp op, int band_out) {
  check_mixed(u);
  check_mixed(f);
  if (u.grid != f.grid) throw ShapeError("factor lives on a different x1 grid");
  const GroupKind g2 = u.basis.group();
  if (f.basis.group() != g2) throw ShapeError("x2 group mismatch");
  const int pad = op == PointwiseOp::Identity ? 0 : (g2 == GroupKind::Torus ? 24 : 8);
  const int quad_band = std::max(u.basis.band() + f.basis.band(), band_out) + pad;
  const GridPtr grid2 = shared_grid(g2, quad_band);
  const Basis out_basis(g2, band_out);
  PartialField out = mixed_zero(u.grid, out_basis);
  const int n1 = u.grid->size();
  const int n2 = grid2->size();
  const double work = static_cast<double>(n1) * n2;
  const double storage = static_cast<double>(n1) * out_basis.size();
  if (work > kWorkLimit || storage > kStorageLimit) {
    throw GridTooLarge("pointwise product needs " + std::to_string(n1) + " x " + std::to_string(n2) +
                       " nodes and " + std::to_string(out_basis.size()) + " output modes per row");
  }
  const int nb = static_cast<int>(std::clamp<std::size_t>(kChunkBudget / static_cast<std::size_t>(n2), 1, 256));
  const int cu = u.basis.size(), cf = f.basis.size(), co = out_basis.size();
  CMatrix in_u, in_f, vals_u, vals_f, res;
  for (int r0 = 0; r0 < n1; r0 += nb) {
    const int b = std::min(nb, n1 - r0);
    in_u = u.values.block(r0, 0, b, cu).transpose();
    in_f = f.values.block(r0, 0, b, cf).transpose();
    vals_u.resize(n2, b);
    vals_f.resize(n2, b);
    parallel::synthesize(*grid2, u.basis, in_u.data(), b, vals_u.data());
    parallel::synthesize(*grid2, f.basis, in_f.data(), b, vals_f.data());
    if (op == PointwiseOp::Exp) {
      vals_f = vals_f.array().exp().matrix();
    } else if (op == PointwiseOp::ExpNeg) {
      vals_f = (-vals_f.array()).exp().matrix();
    }
    vals_u.array() *= vals_f.array();
    res.resize(co, b);
    parallel::analyze(*grid2, out_basis, vals_u.data(), b, res.data());
    out.values.block(r0, 0, b, co) = res.transpose();
  }
  return out;
}

GridFunction mixed_to_grid(const PartialField& u, GridPtr g2) {
  check_mixed(u);
  return partial_inverse(u, std::move(g2));
}

PartialField psi_apply(std::span<const cplx> A, const PartialField& u, int sign) {
  check_mixed(u);
  if (static_cast<int>(A.size()) != u.grid->size()) throw ShapeError("primitive does not match the x1 grid");
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  PartialField out = u;
  const int n1 = u.grid->size();
  for (int j = 0; j < u.basis.size(); ++j) {
    const double mu = weight(u.basis.rep_of(j), u.basis.entry(j).row);
    if (mu == 0.0) continue;
    const cplx k(0.0, sign * mu);
    for (int i = 0; i < n1; ++i) out.values(i, j) *= std::exp(k * A[static_cast<std::size_t>(i)]);
  }
  return out;
}

GridFunction exp_conjugate(const GridFunction& Q, const GridFunction& u, int sign) {
  if (!Q.same_grids(u) || Q.values.rows() != u.values.rows() || Q.values.cols() != u.values.cols()) {
    throw ShapeError("Q and u live on different grids");
  }
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  GridFunction out = u;
  out.values.array() *= (static_cast<double>(sign) * Q.values.array()).exp();
  return out;
}

// ---------------------------------------------------------------- operators

const std::vector<cplx>& OperatorSpec::A() const {
  if (!a.primitive) throw MissingPrimitive("no primitive A for a: " + primitive_note);
  return *a.primitive;
}

namespace {

OperatorSpec build(std::string name, GroupPair gp, Expr a_expr, std::optional<CoefficientFunction> a_samples,
                   Expr q, Resolution res, int convergent) {
  OperatorSpec spec;
  spec.name = std::move(name);
  spec.groups = gp;
  spec.a_expr = std::move(a_expr);
  spec.q_expr = std::move(q);
  spec.convergent = convergent;
  spec.alpha = alpha_convergent(convergent);
  spec.res = res;
  if (res.band1 < 0 || res.band2 < 0) throw ConfigError("bands must be nonnegative");
  if (spec.res.q_extra < 0) spec.res.q_extra = default_q_extra(gp.second);
  spec.a_expr.validate(gp);
  spec.q_expr.validate(gp);
  if (spec.a_expr.depends_on_x2()) throw ConfigError("a must depend on x1 only");

  spec.g1 = shared_grid(gp.first, res.band1);
  spec.g2 = shared_grid(gp.second, res.band2);
  spec.q0_exact = spec.q_expr.mean();
  spec.q0 = spec.q0_exact.to_complex(spec.alpha);

  if (a_samples) {
    spec.exact = false;
    spec.a = std::move(*a_samples);
    spec.g1f = spec.a.grid;
    spec.a0 = spec.a.mean;
  } else {
    spec.a0_exact = spec.a_expr.mean();
    if (!spec.a0_exact.im.is_zero()) throw ConfigError("a must be real-valued");
    spec.a0 = spec.a0_exact.to_complex(spec.alpha);
    int fine = res.fine_band1;
    if (fine < 0) {
      // Resolve exp(i mu A) u: Bessel tails of exp(i z cos) vanish past ~1.5 z + 14.
      const auto probe_grid = shared_grid(gp.first, std::max(res.band1, 2));
      auto probe = CoefficientFunction::from_expr(probe_grid, spec.a_expr, spec.alpha);
      double amax = 0.0;
      try {
        for (const cplx& v : solve_primitive_G1(probe)) amax = std::max(amax, std::abs(v));
      } catch (const NotSolvable&) {
        amax = 0.0;
      }
      const int x2_band = res.band2 + (spec.q_constant() ? 0 : spec.res.q_extra + 1);
      const double z = mu_max(gp.second, x2_band) * amax;
      const int K = static_cast<int>(std::ceil(1.5 * z)) + 14;
      fine = res.band1 + K;
      if (gp.first == GroupKind::Torus) fine = std::max(fine, 48);
    }
    spec.g1f = shared_grid(gp.first, std::max(fine, res.band1));
    spec.a = CoefficientFunction::from_expr(spec.g1f, spec.a_expr, spec.alpha);
  }
  if (!spec.a.real) throw ConfigError("a must be real-valued");

  try {
    spec.a.primitive = solve_primitive_G1(spec.a);
    spec.A_residual = primitive_residual(spec.a, *spec.a.primitive);
  } catch (const NotSolvable& e) {
    std::ostringstream os;
    os << e.what() << " (";
    for (std::size_t k = 0; k < e.modes().size() && k < 8; ++k) os << (k ? "; " : "") << e.modes()[k];
    os << ")";
    spec.primitive_note = os.str();
  }
  if (spec.a.primitive && !spec.q_constant()) {
    try {
      auto qs = solve_Q(spec, spec.q_expr);
      spec.Q = std::move(qs.Q);
      spec.Q_residual = qs.residual;
    } catch (const NotSolvable& e) {
      spec.primitive_note = std::string(e.what());
    }
  }
  return spec;
}

}  // namespace

OperatorSpec make_operator(std::string name, GroupPair gp, Expr a, Expr q, Resolution res, int convergent) {
  return build(std::move(name), gp, std::move(a), std::nullopt, std::move(q), res, convergent);
}

OperatorSpec make_operator_sampled(std::string name, GroupPair gp, CoefficientFunction a, Expr q,
                                   Resolution res, int convergent) {
  if (!a.grid || a.grid->group() != gp.first) throw ShapeError("samples must live on a G1 grid");
  return build(std::move(name), gp, Expr{}, std::move(a), std::move(q), res, convergent);
}

DenominatorModel normal_form_model(const OperatorSpec& spec, bool with_q0) {
  if (!spec.exact) return DenominatorModel::from_float(spec.a0.real(), with_q0 ? spec.q0 : cplx{});
  return DenominatorModel(spec.a0_exact.re, with_q0 ? spec.q0_exact : ExactComplex{},
                          ContinuedFraction::factorial_tower());
}

GridFunction apply_operator(const OperatorSpec& spec, const GridFunction& u) {
  if (!u.grid1 || !u.grid2 || u.grid1->group() != spec.groups.first || u.grid2->group() != spec.groups.second) {
    throw ShapeError("grid function does not live on the operator's groups");
  }
  const GridFunction x1u = derivative(u, 1, u.grid1->field_axis());
  const GridFunction x2u = derivative(u, 2, u.grid2->field_axis());
  std::vector<cplx> a(static_cast<std::size_t>(u.grid1->size()));
  if (!spec.a_expr.empty() || spec.exact) {
    for (int i = 0; i < u.grid1->size(); ++i) a[static_cast<std::size_t>(i)] = spec.a_expr.eval(u.grid1->point(i), {}, spec.alpha);
  } else {
    if (u.grid1 != spec.a.grid) throw ShapeError("sampled coefficient lives on a different grid");
    a = spec.a.values;
  }
  GridFunction out(u.grid1, u.grid2);
  const int n2 = u.grid2->size();
  std::vector<Point> p2(static_cast<std::size_t>(n2));
  for (int j = 0; j < n2; ++j) p2[static_cast<std::size_t>(j)] = u.grid2->point(j);
  const bool qc = spec.q_constant();
  for (int i = 0; i < u.grid1->size(); ++i) {
    const Point p1 = u.grid1->point(i);
    for (int j = 0; j < n2; ++j) {
      const cplx q = qc ? spec.q0 : spec.q_expr.eval(p1, p2[static_cast<std::size_t>(j)], spec.alpha);
      out.values(i, j) = x1u.values(i, j) + a[static_cast<std::size_t>(i)] * x2u.values(i, j) + q * u.values(i, j);
    }
  }
  return out;
}

PartialField apply_operator_mixed(const OperatorSpec& spec, const PartialField& u) {
  check_mixed(u);
  if (u.grid->group() != spec.groups.first || u.basis.group() != spec.groups.second) {
    throw ShapeError("mixed field does not live on the operator's groups");
  }
  std::vector<cplx> a;
  if (u.grid == spec.a.grid) {
    a = spec.a.values;
  } else {
    if (spec.a_expr.empty()) throw ShapeError("sampled coefficient lives on a different grid");
    a.resize(static_cast<std::size_t>(u.grid->size()));
    for (int i = 0; i < u.grid->size(); ++i) a[static_cast<std::size_t>(i)] = spec.a_expr.eval(u.grid->point(i), {}, spec.alpha);
  }
  PartialField out = add(mixed_x1_field(u), mixed_scale_x1(mixed_x2_field(u), a));
  if (spec.q_constant()) {
    out.values += spec.q0 * u.values;
    return out;
  }
  const PartialField q = mixed_from_expr(spec.q_expr, u.grid, spec.groups.second, spec.alpha);
  const PartialField qu = mixed_multiply(u, q, PointwiseOp::Identity, u.basis.band() + q.basis.band());
  return add(out, qu);
}

PartialField apply_normal_form_mixed(cplx a0, cplx q0, const PartialField& u) {
  PartialField out = add(mixed_x1_field(u), mixed_x2_field(u), a0);
  out.values += q0 * u.values;
  return out;
}

PartialField exp_q_mixed(const OperatorSpec& spec, const PartialField& u, int sign) {
  if (!spec.Q) throw MissingPrimitive("no primitive Q for q: " + spec.primitive_note);
  if (u.grid != spec.g1f) throw ShapeError("exp(Q) acts on the fine x1 grid");
  return mixed_multiply(u, *spec.Q, sign > 0 ? PointwiseOp::Exp : PointwiseOp::ExpNeg,
                        u.basis.band() + spec.res.q_extra);
}

double conjugation_residual(const OperatorSpec& spec, const Spectrum& u) {
  const auto& A = spec.A();
  const bool withQ = !spec.q_constant();
  if (withQ && !spec.Q) throw MissingPrimitive("no primitive Q for q: " + spec.primitive_note);
  if (u.basis1.group() != spec.groups.first || u.basis2.group() != spec.groups.second) {
    throw ShapeError("spectrum does not live on the operator's groups");
  }
  const PartialField um = spectrum_to_partial(u, spec.g1f);
  const double unorm = mixed_norm(um);
  if (unorm == 0.0) return 0.0;
  // Common x2 band for both sides so that the projections agree.
  const int qb = withQ ? 1 : 0;
  const int band_out = u.basis2.band() + qb + (withQ ? spec.res.q_extra : 0);

  PartialField lhs = apply_operator_mixed(spec, um);
  if (withQ) lhs = mixed_multiply(lhs, *spec.Q, PointwiseOp::Exp, band_out);
  lhs = psi_apply(A, lhs, +1);

  PartialField w = withQ ? mixed_multiply(um, *spec.Q, PointwiseOp::Exp, band_out) : um;
  w = psi_apply(A, w, +1);
  const PartialField rhs = apply_normal_form_mixed(spec.a0, spec.q0, w);

  const PartialField d = add(lhs, rhs, -1.0);
  return mixed_norm(d) / unorm;
}

double conjugation_residual(const OperatorSpec& spec, const GridFunction& u) {
  return conjugation_residual(spec, forward_full(u));
}

QSolve solve_Q(const OperatorSpec& spec, const Expr& q) {
  const auto& A = spec.A();
  const Expr f = q.minus_mean();
  QSolve out;
  const GroupKind g2 = spec.groups.second;
  if (f.empty()) {
    out.Q = mixed_zero(spec.g1f, Basis(g2, 0));
    return out;
  }
  const PartialField fm = mixed_from_expr(f, spec.g1f, g2, spec.alpha);
  const double qnorm = std::max(mixed_norm(mixed_from_expr(q, spec.g1f, g2, spec.alpha)), 1e-300);
  const PartialField v = psi_apply(A, fm, +1);
  Spectrum V = partial_to_full(v);
  const DenominatorModel model = normal_form_model(spec, false);
  const double a0 = spec.a0.real();
  std::vector<std::string> bad;
  for (int i = 0; i < V.coef.rows(); ++i) {
    const auto& e1 = V.basis1.entry(i);
    const int l2 = twice_weight(V.basis1.rep_of(i), e1.row);
    for (int j = 0; j < V.coef.cols(); ++j) {
      const int m2 = twice_weight(V.basis2.rep_of(j), V.basis2.entry(j).row);
      cplx& z = V.coef(i, j);
      if (model.resonant(l2, m2)) {
        if (std::abs(z) >= kQResonanceTol * qnorm) bad.push_back(pair_label(V.basis1, i, V.basis2, j));
        z = 0.0;
      } else {
        z /= cplx(0.0, 0.5 * l2 + a0 * 0.5 * m2);
      }
    }
  }
  if (!bad.empty()) throw NotSolvable("Psi_a (q - q0) has resonant content; no primitive Q exists", bad);
  out.Q = psi_apply(A, spectrum_to_partial(V, spec.g1f), -1);
  PartialField lhs = add(mixed_x1_field(out.Q), mixed_scale_x1(mixed_x2_field(out.Q), spec.a.values));
  const PartialField d = add(lhs, fm, -1.0);
  out.residual = mixed_norm(d) / std::max(mixed_norm(fm), 1e-300);
  return out;
}

Spectrum random_spectrum(GroupKind g1, int band1, GroupKind g2, int band2, unsigned long long seed) {
  Spectrum s(Basis(g1, band1), Basis(g2, band2));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(2.0));
  for (int i = 0; i < s.coef.rows(); ++i) {
    for (int j = 0; j < s.coef.cols(); ++j) {
      const double re = nd(rng);
      const double im = nd(rng);
      s.coef(i, j) = cplx(re, im);
    }
  }
  return s;
}

}  // namespace komatsu
