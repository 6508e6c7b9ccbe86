#include "komatsu/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "komatsu/error.hpp"

namespace komatsu {

namespace {

constexpr double kFullGridLimit = 4e6;

std::string entry_label(const Basis& b, int i) {
  const Rep& rep = b.rep_of(i);
  const auto& e = b.entry(i);
  if (rep.group == GroupKind::Torus) return "k=" + std::to_string(rep.index);
  return "l=" + HalfInt{rep.index}.str() + " m=" + HalfInt{twice_weight(rep, e.row)}.str() +
         " n=" + HalfInt{twice_weight(rep, e.col)}.str();
}

std::string pair_label(const Spectrum& s, int i, int j) {
  return entry_label(s.basis1, i) + " | " + entry_label(s.basis2, j);
}

PartialField padded(const PartialField& u, int band) {
  if (u.basis.band() >= band) return u;
  return mixed_resize(u, Basis(u.basis.group(), band));
}

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

NormalForm normal_form(const OperatorSpec& spec) {
  return NormalForm{normal_form_model(spec, true), spec.a0, spec.q0};
}

NormalForm normal_form(const AlphaAffine& a0, const ExactComplex& q0, int convergent) {
  const double alpha = alpha_convergent(convergent);
  return NormalForm{DenominatorModel(a0, q0, ContinuedFraction::factorial_tower()), a0.to_double(alpha),
                    q0.to_complex(alpha)};
}

Projection project_K(const NormalForm& nf, const Spectrum& f, double tol) {
  Projection p;
  p.spectrum = f;
  Spectrum removed(f.basis1, f.basis2);
  for (int i = 0; i < f.coef.rows(); ++i) {
    const int l2 = twice_weight(f.basis1.rep_of(i), f.basis1.entry(i).row);
    for (int j = 0; j < f.coef.cols(); ++j) {
      const int m2 = twice_weight(f.basis2.rep_of(j), f.basis2.entry(j).row);
      if (!nf.model.resonant(l2, m2)) continue;
      ++p.resonant_support;
      const cplx c = f.coef(i, j);
      if (c == 0.0) continue;
      if (std::abs(c) >= tol) p.modes.push_back(pair_label(f, i, j));
      removed.coef(i, j) = c;
      p.spectrum.coef(i, j) = 0.0;
    }
  }
  p.removed_mass = plancherel_norm(removed);
  return p;
}

std::pair<Spectrum, SolveReport> solve_constant(const NormalForm& nf, const Spectrum& f, double rel_tol) {
  SolveReport rep;
  rep.exact_model = nf.model.exact();
  rep.threshold = rel_tol * plancherel_norm(f);
  Projection p = project_K(nf, f, rep.threshold);
  rep.resonant_support = p.resonant_support;
  rep.removed_mass = p.removed_mass;
  if (!p.modes.empty()) throw NotInK("f has resonant content; it does not belong to K", p.modes);

  Spectrum u(f.basis1, f.basis2);
  const double fmax = max_abs(f.coef);
  const double support_floor = 1e-15 * fmax;
  double dmin = std::numeric_limits<double>::infinity();
  double dcert = dmin;
  for (int i = 0; i < f.coef.rows(); ++i) {
    const int l2 = twice_weight(f.basis1.rep_of(i), f.basis1.entry(i).row);
    for (int j = 0; j < f.coef.cols(); ++j) {
      const cplx c = p.spectrum.coef(i, j);
      if (c == 0.0) continue;
      const int m2 = twice_weight(f.basis2.rep_of(j), f.basis2.entry(j).row);
      const cplx s = nf.sigma(l2, m2);
      u.coef(i, j) = c / s;
      if (std::abs(c) > support_floor) {
        dmin = std::min(dmin, std::abs(s));
        dcert = std::min(dcert, nf.model.evaluate(l2, m2).lower);
      }
    }
  }
  rep.min_denominator = std::isfinite(dmin) ? dmin : 0.0;
  rep.min_denominator_certified = std::isfinite(dcert) ? dcert : 0.0;
  rep.amplification = fmax > 0.0 ? max_abs(u.coef) / fmax : 0.0;

  // Multiply back.
  Spectrum back(f.basis1, f.basis2);
  for (int i = 0; i < f.coef.rows(); ++i) {
    const int l2 = twice_weight(f.basis1.rep_of(i), f.basis1.entry(i).row);
    for (int j = 0; j < f.coef.cols(); ++j) {
      const int m2 = twice_weight(f.basis2.rep_of(j), f.basis2.entry(j).row);
      back.coef(i, j) = nf.sigma(l2, m2) * u.coef(i, j) - p.spectrum.coef(i, j);
    }
  }
  const double pn = plancherel_norm(p.spectrum);
  rep.residual = pn > 0.0 ? plancherel_norm(back) / pn : 0.0;
  return {std::move(u), rep};
}

Spectrum transformed_rhs(const OperatorSpec& spec, const Spectrum& f) {
  const auto& A = spec.A();
  const bool withQ = !spec.q_constant();
  if (withQ && !spec.Q) throw MissingPrimitive("no primitive Q for q: " + spec.primitive_note);
  if (f.basis1.group() != spec.groups.first || f.basis2.group() != spec.groups.second) {
    throw ShapeError("right-hand side does not live on the operator's groups");
  }
  PartialField w = spectrum_to_partial(f, spec.g1f);
  if (withQ) w = exp_q_mixed(spec, w, +1);
  return partial_to_full(psi_apply(A, w, +1));
}

VariableSolve solve_variable(const OperatorSpec& spec, const Spectrum& f, double rel_tol) {
  const auto& A = spec.A();
  const bool withQ = !spec.q_constant();
  const Spectrum G = transformed_rhs(spec, f);
  const NormalForm nf = normal_form(spec);

  const double fnorm = plancherel_norm(f);
  const double tol = rel_tol * fnorm;
  Projection p = project_K(nf, G, tol);
  if (!p.modes.empty()) {
    throw NotInJ("Psi_a e^Q f has resonant content; f does not belong to J", p.modes, p.removed_mass);
  }
  VariableSolve out;
  auto [U, rep] = solve_constant(nf, p.spectrum, rel_tol);
  rep.removed_mass = p.removed_mass;
  rep.resonant_support = p.resonant_support;
  rep.threshold = tol;
  const double gmax = max_abs(G.coef);
  rep.amplification = gmax > 0.0 ? max_abs(U.coef) / gmax : 0.0;

  PartialField u = psi_apply(A, spectrum_to_partial(U, spec.g1f), -1);
  if (withQ) u = exp_q_mixed(spec, u, -1);
  rep.residual = residual_mixed(spec, u, f);
  out.u = std::move(u);
  out.normal = std::move(U);
  out.report = std::move(rep);
  return out;
}

VariableSolve solve_variable(const OperatorSpec& spec, const GridFunction& f, double rel_tol) {
  return solve_variable(spec, forward_full(f), rel_tol);
}

Spectrum manufactured_rhs(const OperatorSpec& spec, const Spectrum& u0) {
  const GridPtr g1 = shared_grid(spec.groups.first, u0.basis1.band() + 2);
  const GridPtr g2 = shared_grid(spec.groups.second, u0.basis2.band() + 2);
  if (static_cast<double>(g1->size()) * g2->size() <= kFullGridLimit) {
    return forward_full(apply_operator(spec, inverse(u0, g1, g2)));
  }
  return partial_to_full(apply_operator_mixed(spec, spectrum_to_partial(u0, g1)));
}

double residual(const OperatorSpec& spec, const GridFunction& u, const GridFunction& f) {
  if (!u.same_grids(f)) throw ShapeError("u and f live on different grids");
  const double fn = grid_norm(f);
  if (fn == 0.0) throw DomainError("zero right-hand side");
  return grid_inner_norm_diff(apply_operator(spec, u), f) / fn;
}

double residual_mixed(const OperatorSpec& spec, const PartialField& u, const Spectrum& f) {
  const PartialField Lu = apply_operator_mixed(spec, u);
  const PartialField fm = spectrum_to_partial(f, u.grid);
  const double fn = mixed_norm(fm);
  if (fn == 0.0) throw DomainError("zero right-hand side");
  const int band = std::max(Lu.basis.band(), fm.basis.band());
  PartialField d = padded(Lu, band);
  d.values -= padded(fm, band).values;
  return mixed_norm(d) / fn;
}

// ---------------------------------------------------------------- verdicts

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::Refuted: return "refuted";
    case Verdict::Undecided: return "undecided";
  }
  return "?";
}

const PropertyEntry* PropertyVerdict::find(const std::string& property, const std::string& weight) const {
  for (const auto& p : properties) {
    if (p.property == property && (weight.empty() || p.weight == weight)) return &p;
  }
  return nullptr;
}

namespace {

std::vector<std::string> resonance_witnesses(const ResonanceInventory& inv, const GroupPair& gp) {
  std::vector<std::string> out;
  out.push_back(inv.structure);
  for (const auto& t : inv.examples) out.push_back(t.str(gp));
  return out;
}

std::vector<std::string> liouville_strings(const SmoothAnalysis& s) {
  std::vector<std::string> out;
  for (const auto& w : s.witnesses) {
    std::ostringstream os;
    os << "n=" << w.n << " j=" << w.j << " lambda2=" << to_string(w.lambda2) << " mu2=" << to_string(w.mu2)
       << " log10|sigma|<=" << fmt(w.log10_sigma_upper) << " log10(scale)<=" << fmt(w.log10_scale_upper)
       << (w.exact_check ? " (exact)" : "");
    out.push_back(os.str());
  }
  return out;
}

}  // namespace

PropertyVerdict analyze_normal_form(const std::string& name, const GroupPair& gp, const DenominatorModel& model,
                                    const AnalyzeOptions& opts) {
  PropertyVerdict v;
  v.name = name;
  v.groups = gp;
  v.exact = model.exact();
  if (model.exact()) {
    v.a0 = model.a0().str();
    v.q0 = model.q0().str();
  }
  const double top = opts.cutoffs.empty() ? 0.0 : *std::max_element(opts.cutoffs.begin(), opts.cutoffs.end());
  v.resonance = resonance_set(model, gp, opts.resonance_cutoff);
  v.smooth = smooth_analysis(model, gp, opts.p_max);
  const bool infinite = v.exact && !v.resonance.finite;

  std::vector<WeightSequence> weights = opts.weights;
  if (weights.empty()) weights = {WeightSequence::gevrey(1.0), WeightSequence::gevrey(2.0)};

  for (const auto& w : weights) {
    std::vector<FitRequest> reqs;
    for (double N : opts.N_grid) reqs.push_back(FitRequest{w, N});
    const auto roumieu = certify_condition2_many(model, gp, reqs, Quantifier::Roumieu, opts.cutoffs);
    std::vector<std::pair<double, double>> constants;
    bool all = !roumieu.empty(), any = false;
    for (const auto& r : roumieu) {
      constants.emplace_back(r.N, r.C_N);
      const bool ok = r.verdict == "consistent";
      all = all && ok;
      any = any || ok;
    }
    for (auto r : roumieu) {
      v.condition2.push_back(r);
      r.mode = Quantifier::Beurling;
      v.condition2.push_back(std::move(r));
    }

    const std::string wname = w.describe();
    for (const Quantifier qm : {Quantifier::Roumieu, Quantifier::Beurling}) {
      const bool cond2 = qm == Quantifier::Roumieu ? all : any;
      const std::string qs = qm == Quantifier::Roumieu ? "Roumieu" : "Beurling";
      const std::string qual = qm == Quantifier::Roumieu ? "for every N in the grid" : "for some N in the grid";

      PropertyEntry gh{"GH-" + qs, wname};
      gh.cutoff = top;
      gh.constants = constants;
      if (!v.exact) {
        gh.reason = "coefficients known only in floating point";
      } else if (infinite) {
        gh.verdict = Verdict::Refuted;
        gh.reason = "the resonant set is infinite";
        gh.witnesses = resonance_witnesses(v.resonance, gp);
      } else if (cond2) {
        gh.verdict = Verdict::Consistent;
        gh.reason = "resonant set finite (" + std::to_string(v.resonance.count) +
                    " tuples) and C_N > 0 " + qual + " up to cutoff " + fmt(top);
      } else {
        gh.reason = "the lower bound could not be certified " + qual;
      }
      v.properties.push_back(std::move(gh));

      PropertyEntry gs{"GS-" + qs, wname};
      gs.cutoff = top;
      gs.constants = constants;
      if (cond2) {
        gs.verdict = Verdict::Consistent;
        gs.reason = "C_N > 0 " + qual + " up to cutoff " + fmt(top);
      } else {
        gs.reason = v.exact ? "the lower bound could not be certified " + qual
                            : "coefficients known only in floating point";
      }
      v.properties.push_back(std::move(gs));
    }
  }

  PropertyEntry ghs{"GH-smooth", "smooth"};
  PropertyEntry gss{"GS-smooth", "smooth"};
  ghs.cutoff = gss.cutoff = opts.resonance_cutoff;
  if (v.smooth.refuted) {
    gss.verdict = Verdict::Refuted;
    gss.reason = "no polynomial lower bound with exponent <= " + std::to_string(opts.p_max) + ": " + v.smooth.argument;
    gss.witnesses = liouville_strings(v.smooth);
  } else if (v.smooth.certified_lower) {
    gss.verdict = Verdict::Consistent;
    gss.reason = "|sigma| >= " + fmt(*v.smooth.certified_lower) + " off the resonant set: " + v.smooth.argument;
  } else {
    gss.reason = v.smooth.argument.empty() ? "no decision" : v.smooth.argument;
  }
  if (infinite) {
    ghs.verdict = Verdict::Refuted;
    ghs.reason = "the resonant set is infinite";
    ghs.witnesses = resonance_witnesses(v.resonance, gp);
  } else if (v.smooth.refuted) {
    ghs.verdict = Verdict::Refuted;
    ghs.reason = gss.reason;
    ghs.witnesses = gss.witnesses;
  } else if (v.exact && v.smooth.certified_lower) {
    ghs.verdict = Verdict::Consistent;
    ghs.reason = "resonant set finite and " + gss.reason;
  } else {
    ghs.reason = gss.reason;
  }
  v.properties.push_back(std::move(ghs));
  v.properties.push_back(std::move(gss));
  return v;
}

PropertyVerdict analyze(const OperatorSpec& spec, const AnalyzeOptions& opts) {
  const bool missing = !spec.a.primitive || (!spec.q_constant() && !spec.Q);
  if (missing) {
    PropertyVerdict v;
    v.name = spec.name;
    v.groups = spec.groups;
    v.exact = spec.exact;
    v.normal_form_available = false;
    v.note = spec.primitive_note;
    std::vector<WeightSequence> weights = opts.weights;
    if (weights.empty()) weights = {WeightSequence::gevrey(1.0), WeightSequence::gevrey(2.0)};
    for (const auto& w : weights) {
      for (const char* p : {"GH-Roumieu", "GS-Roumieu", "GH-Beurling", "GS-Beurling"}) {
        v.properties.push_back(PropertyEntry{p, w.describe(), Verdict::Undecided, "undecided (no normal form)"});
      }
    }
    for (const char* p : {"GH-smooth", "GS-smooth"}) {
      v.properties.push_back(PropertyEntry{p, "smooth", Verdict::Undecided, "undecided (no normal form)"});
    }
    return v;
  }
  PropertyVerdict v = analyze_normal_form(spec.name, spec.groups, normal_form_model(spec, true), opts);
  if (!spec.exact) {
    v.a0 = fmt(spec.a0.real());
    v.q0 = fmt(spec.q0.real()) + " + " + fmt(spec.q0.imag()) + "i";
  }
  return v;
}

}  // namespace komatsu
