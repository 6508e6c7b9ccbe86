#pragma once

// Reduction of L_aq = X1 + a(x1) X2 + q(x1, x2) to the constant-coefficient
// operator L_{a0 q0} = X1 + a0 X2 + q0.
//
// The canonical internal format is the mixed form (PartialField with
// spectral_second): x1 on a grid, x2 spectral. In that format X2 is the
// diagonal i mu_r and Psi_a multiplies row r by exp(i mu_r A(x1)).
// Mixed fields live on a fine x1 grid so that derivatives of the
// non-band-limited products exp(i mu A) u are resolved.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "komatsu/diophantine.hpp"
#include "komatsu/transform.hpp"

namespace komatsu {

// Built-in analytic functions. T1: sin_t, cos_t. SU(2) (Euler angles):
//   tr = 2 cos(theta/2) cos((phi+psi)/2)
//   h  = -cos(theta/2) sin((phi+psi)/2)       (so d/dpsi tr = h)
//   p1 = cos(theta/2) e^{i(phi+psi)/2}
//   p2 = i sin(theta/2) e^{i(phi-psi)/2}
enum class NamedFn { One, SinT, CosT, Tr, H, P1, P2 };

const char* named_fn_name(NamedFn f);
NamedFn parse_named_fn(const std::string& name);
bool named_fn_allowed(NamedFn f, GroupKind g);
cplx eval_named(NamedFn f, const Point& x);

// c * f1(x1) * f2(x2)
struct Term {
  ExactComplex coef;
  NamedFn f1 = NamedFn::One;
  NamedFn f2 = NamedFn::One;
};

// Finite sum of terms with coefficients in Q(alpha) + i Q(alpha).
struct Expr {
  std::vector<Term> terms;

  bool empty() const { return terms.empty(); }
  bool depends_on_x2() const;
  bool depends_on_x1() const;
  // Every named function other than One has zero mean.
  ExactComplex mean() const;
  Expr minus_mean() const;
  cplx eval(const Point& x1, const Point& x2, double alpha) const;
  void validate(const GroupPair& gp) const;  // ConfigError
  std::string str() const;

  Expr operator+(const Expr& o) const;
  Expr operator*(const ExactComplex& c) const;
};

Expr constant_expr(const ExactComplex& c);
// Parses "u + v*alpha" style rationals: "1/2", "-alpha", "3/2 - 2*alpha".
AlphaAffine parse_alpha_affine(const std::string& text);

// Numeric alpha from convergent n of the factorial tower.
double alpha_convergent(int n);

// A function on G1.
struct CoefficientFunction {
  GridPtr grid;
  std::vector<cplx> values;
  cplx mean{};  // quadrature mean
  std::optional<std::vector<cplx>> primitive;
  bool real = true;

  static CoefficientFunction from_expr(GridPtr grid, const Expr& e, double alpha);
  static CoefficientFunction from_samples(GridPtr grid, std::vector<cplx> values);
};

// X1 A = a - a0 by Fourier division; A has zero mean. NotSolvable lists the
// modes with lambda_m = 0 carrying coefficients >= 1e-10 ||a||.
std::vector<cplx> solve_primitive_G1(const CoefficientFunction& a);
// || X1 A - (a - a0) ||_grid.
double primitive_residual(const CoefficientFunction& a, std::span<const cplx> A);

// Mixed-form primitives.
double mixed_norm(const PartialField& u);
PartialField mixed_zero(GridPtr g1, const Basis& b2);
// Pad or truncate the x2 basis (bases of one group are nested).
PartialField mixed_resize(const PartialField& u, const Basis& b2);
PartialField mixed_x1_field(const PartialField& u);
PartialField mixed_x2_field(const PartialField& u);
PartialField mixed_scale_x1(const PartialField& u, std::span<const cplx> f);
PartialField mixed_from_expr(const Expr& e, GridPtr g1, GroupKind g2, double alpha);
// Pointwise product f * u projected onto Basis(G2, band_out); f is a mixed
// field on the same x1 grid, transformed pointwise by `op` on the x2 grid.
enum class PointwiseOp { Identity, Exp, ExpNeg };
PartialField mixed_multiply(const PartialField& u, const PartialField& f, PointwiseOp op, int band_out);
// Sample a mixed field on the x2 grid.
GridFunction mixed_to_grid(const PartialField& u, GridPtr g2);

// Row r of every eta block times exp(sign i mu_r A(x1)).
PartialField psi_apply(std::span<const cplx> A, const PartialField& u, int sign);

// Pointwise multiplication by exp(sign Q).
GridFunction exp_conjugate(const GridFunction& Q, const GridFunction& u, int sign);

struct Resolution {
  int band1 = 4;
  int band2 = 4;
  int fine_band1 = -1;  // x1 band of the mixed grid; -1 picks it from A
  int q_extra = -1;     // x2 band added when multiplying by exp(+-Q); -1 picks a default
};

struct OperatorSpec {
  std::string name;
  GroupPair groups{GroupKind::Torus, GroupKind::SU2};
  Expr a_expr;  // may be empty when `a` comes from samples
  Expr q_expr;  // empty means q = 0
  int convergent = 2;
  double alpha = 0.0;
  bool exact = true;  // a0, q0 known in Q(alpha)
  ExactComplex a0_exact, q0_exact;
  cplx a0{}, q0{};
  Resolution res;
  GridPtr g1, g2;  // base grids at band1, band2
  GridPtr g1f;     // fine x1 grid
  CoefficientFunction a;  // on g1f, primitive when solvable
  std::optional<PartialField> Q;  // on g1f
  double A_residual = 0.0;
  double Q_residual = 0.0;
  std::string primitive_note;

  bool has_q() const { return !q_expr.empty(); }
  bool q_constant() const { return q_expr.empty() || !(q_expr.depends_on_x1() || q_expr.depends_on_x2()); }
  const std::vector<cplx>& A() const;  // MissingPrimitive
};

// Builds grids, samples a, solves for A and (when q is not constant) Q.
// Primitive failures are recorded in primitive_note.
OperatorSpec make_operator(std::string name, GroupPair gp, Expr a, Expr q, Resolution res = {},
                           int convergent = 2);
// a given by samples on a G1 grid (a0 known only in floating point).
OperatorSpec make_operator_sampled(std::string name, GroupPair gp, CoefficientFunction a, Expr q,
                                   Resolution res = {}, int convergent = 2);

// Exact resonance decisions for sigma = i(lambda + a0 mu) + q0 (float model
// when a0, q0 are not exact).
DenominatorModel normal_form_model(const OperatorSpec& spec, bool with_q0 = true);

// X1 u + a X2 u + q u on grids.
GridFunction apply_operator(const OperatorSpec& spec, const GridFunction& u);
// Same on a mixed field; the x2 band grows by the x2 band of q.
PartialField apply_operator_mixed(const OperatorSpec& spec, const PartialField& u);
// X1 + a0 X2 + q0 on a mixed field.
PartialField apply_normal_form_mixed(cplx a0, cplx q0, const PartialField& u);

// exp(sign Q) u for the spec's Q, output x2 band = input band + q_extra.
PartialField exp_q_mixed(const OperatorSpec& spec, const PartialField& u, int sign);

// || Psi_a e^Q L_aq u - L_{a0 q0} Psi_a e^Q u || / ||u||, both sides computed
// independently on the fine mixed grid.
double conjugation_residual(const OperatorSpec& spec, const Spectrum& u);
double conjugation_residual(const OperatorSpec& spec, const GridFunction& u);

struct QSolve {
  PartialField Q;  // zero mean
  double residual = 0.0;  // || (X1 + a X2) Q - (q - q0) || / ||q - q0||
};

// Psi_a (q - q0), division by i(lambda + a0 mu), Psi_{-a}. NotSolvable when
// resonant coefficients exceed 1e-9 ||q||.
QSolve solve_Q(const OperatorSpec& spec, const Expr& q);

// Random band-limited spectrum with unit-variance complex entries.
Spectrum random_spectrum(GroupKind g1, int band1, GroupKind g2, int band2, unsigned long long seed);

}  // namespace komatsu
