#include "komatsu/examples.hpp"

#include "komatsu/error.hpp"

namespace komatsu {

namespace {

constexpr double kLoadTol = 1e-7;

ExactComplex rational(long p, long q = 1) { return {AlphaAffine::rational(make_rational(BigInt(p), BigInt(q))), {}}; }
ExactComplex alpha() { return {AlphaAffine::alpha(), {}}; }
ExactComplex imag(AlphaAffine v) { return {{}, v}; }

Expr term(ExactComplex c, NamedFn f1, NamedFn f2 = NamedFn::One) {
  Expr e;
  e.terms.push_back(Term{std::move(c), f1, f2});
  return e;
}

// sin t + alpha
Expr a_torus() { return term(rational(1), NamedFn::SinT) + term(alpha(), NamedFn::One); }
// h(x1) + alpha
Expr a_sphere() { return term(rational(1), NamedFn::H) + term(alpha(), NamedFn::One); }

}  // namespace

const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names{"t1s3_La", "t1s3_Laq_half_i", "t1s3_Laq_alpha_i", "s3s3_Lh",
                                              "s3s3_Lhq"};
  return names;
}

ExampleDef example_def(const std::string& name) {
  const GroupPair ts{GroupKind::Torus, GroupKind::SU2};
  const GroupPair ss{GroupKind::SU2, GroupKind::SU2};
  // cos t + (sin t + alpha) h(x2)
  const Expr q_torus = term(rational(1), NamedFn::CosT) + term(rational(1), NamedFn::SinT, NamedFn::H) +
                       term(alpha(), NamedFn::One, NamedFn::H);
  if (name == "t1s3_La") return {name, ts, a_torus(), {}, "X1 + (sin t + alpha) X2 on T1 x S3"};
  if (name == "t1s3_Laq_half_i") {
    return {name, ts, a_torus(), q_torus + constant_expr(imag(AlphaAffine::rational(make_rational(1, 2)))),
            "X1 + (sin t + alpha) X2 + cos t + (sin t + alpha) h + i/2 on T1 x S3"};
  }
  if (name == "t1s3_Laq_alpha_i") {
    return {name, ts, a_torus(), q_torus + constant_expr(imag(AlphaAffine::alpha())),
            "X1 + (sin t + alpha) X2 + cos t + (sin t + alpha) h + alpha i on T1 x S3"};
  }
  if (name == "s3s3_Lh") return {name, ss, a_sphere(), {}, "X1 + (h(x1) + alpha) X2 on S3 x S3"};
  if (name == "s3s3_Lhq") {
    const Expr q = term(rational(1), NamedFn::P1) + term(rational(1), NamedFn::H, NamedFn::P2) +
                   term(alpha(), NamedFn::One, NamedFn::P2) +
                   constant_expr(imag(AlphaAffine::rational(make_rational(1, 2))));
    return {name, ss, a_sphere(), q, "X1 + (h(x1) + alpha) X2 + p1(x1) + (h(x1) + alpha) p2(x2) + i/2 on S3 x S3"};
  }
  throw ConfigError("unknown example '" + name + "'");
}

OperatorSpec make_example(const std::string& name, Resolution res, int convergent) {
  const ExampleDef def = example_def(name);
  OperatorSpec spec = make_operator(def.name, def.groups, def.a, def.q, res, convergent);
  if (!spec.a.primitive) throw ResolutionError(name + ": no primitive A: " + spec.primitive_note);
  if (spec.A_residual >= kLoadTol) throw ResolutionError(name + ": primitive A identity fails");
  if (!spec.q_constant()) {
    if (!spec.Q) throw ResolutionError(name + ": no primitive Q: " + spec.primitive_note);
    if (spec.Q_residual >= kLoadTol) throw ResolutionError(name + ": primitive Q identity fails");
  }
  return spec;
}

}  // namespace komatsu
