#include "komatsu/serialize.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "komatsu/error.hpp"

namespace komatsu {

Json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace {

Json cnum(cplx z) { return Json::array({num(z.real()), num(z.imag())}); }

Json tuples(const std::vector<Tuple>& ts, const GroupPair& gp) {
  Json a = Json::array();
  for (const auto& t : ts) a.push_back(to_json(t, gp));
  return a;
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

std::vector<double> doubles(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(what + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

int row_of_weight(const Rep& rep, int twice_w) {
  for (int a = 0; a < dim(rep); ++a) {
    if (twice_weight(rep, a) == twice_w) return a;
  }
  throw IndexError("weight " + HalfInt{twice_w}.str() + " not in " + rep.str());
}

Rep rep_from_twice(GroupKind g, int twice) {
  if (g == GroupKind::Torus) {
    if (twice % 2 != 0) throw ConfigError("odd doubled torus frequency");
    return Rep::torus(twice / 2);
  }
  return Rep::su2_twice(twice);
}

int rep_twice(const Rep& rep) { return rep.group == GroupKind::Torus ? 2 * rep.index : rep.index; }

}  // namespace

Json to_json(const WeightSequence& w) {
  Json j;
  j["describe"] = w.describe();
  if (w.is_gevrey()) {
    j["kind"] = "gevrey";
    j["s"] = num(w.gevrey_order());
  } else {
    j["kind"] = "custom";
    j["kmax"] = *w.kmax();
  }
  return j;
}

Json to_json(const AxiomReport& r) {
  Json j;
  j["kmax"] = r.kmax;
  j["beurling"] = r.beurling;
  j["all_pass"] = r.all_pass();
  Json res = Json::array();
  for (const auto& a : r.results) {
    Json e;
    e["axiom"] = a.axiom;
    e["pass"] = a.pass;
    e["margin"] = num(a.margin);
    Json w = Json::object();
    for (const auto& [k, v] : a.witness) w[k] = num(v);
    e["witness"] = w;
    e["first_failure"] = a.first_failure ? Json(*a.first_failure) : Json(nullptr);
    e["note"] = a.note;
    res.push_back(e);
  }
  j["results"] = res;
  return j;
}

Json to_json(const AssociatedFunctionQuery& q) {
  return Json{{"r", num(q.r)}, {"value", num(q.value)}, {"argmax", q.argmax}};
}

Json to_json(const InequalityCheck& c) {
  return Json{{"pass_i", c.pass_i}, {"pass_ii", c.pass_ii}, {"slack_i", num(c.slack_i)}, {"slack_ii", num(c.slack_ii)}};
}

Json to_json(const Tuple& t, const GroupPair& gp) {
  return Json{{"lambda2", t.lambda2}, {"mu2", t.mu2}, {"rep1_twice", t.rep1}, {"rep2_twice", t.rep2},
              {"scale", num(t.scale)}, {"text", t.str(gp)}};
}

Json to_json(const ResonanceInventory& r, const GroupPair& gp) {
  Json j;
  j["cutoff"] = num(r.cutoff);
  j["exact"] = r.exact;
  j["finite"] = r.finite;
  j["structure"] = r.structure;
  j["count"] = r.count;
  Json pairs = Json::array();
  for (const auto& [l, m] : r.weight_pairs) pairs.push_back(Json::array({std::to_string(l), std::to_string(m)}));
  j["weight_pairs"] = pairs;
  j["weight_pairs_complete"] = r.weight_pairs_complete;
  j["examples"] = tuples(r.examples, gp);
  return j;
}

Json to_json(const ScanResult& s, const GroupPair& gp) {
  Json j;
  j["cutoff"] = num(s.cutoff);
  j["exact"] = s.exact;
  j["pairs"] = s.pairs;
  j["resonant_pairs"] = s.resonant_pairs;
  Json sh = Json::array();
  for (const auto& m : s.shells) {
    sh.push_back(Json{{"shell", m.shell},
                      {"min_lower", num(m.min_lower)},
                      {"min_approx", num(m.min_approx)},
                      {"argmin", to_json(m.argmin, gp)},
                      {"pairs", m.pairs}});
  }
  j["shells"] = sh;
  return j;
}

Json to_json(const LadderCertificate& c) {
  Json j;
  j["available"] = c.available;
  j["all_scales"] = c.all_scales;
  j["through"] = c.through;
  j["log_C_lower"] = num(c.log_C_lower);
  j["note"] = c.note;
  Json rungs = Json::array();
  for (const auto& r : c.rungs) {
    rungs.push_back(Json{{"n", r.n},
                         {"q_lo", r.q_lo},
                         {"q_hi", r.q_hi},
                         {"log_bound", num(r.log_bound)},
                         {"log_scale_min", num(r.log_scale_min)},
                         {"log_C_lower", num(r.log_C_lower)}});
  }
  j["rungs"] = rungs;
  return j;
}

Json to_json(const Condition2Result& r, const GroupPair& gp) {
  Json j;
  j["quantifier"] = quantifier_name(r.mode);
  j["N"] = num(r.N);
  j["weight"] = r.weight;
  j["stable"] = r.stable;
  j["verdict"] = r.verdict;
  j["C_N"] = num(r.C_N);
  Json fits = Json::array();
  for (const auto& f : r.fits) {
    fits.push_back(Json{{"cutoff", num(f.cutoff)}, {"log_C", num(f.log_C)}, {"argmin", to_json(f.argmin, gp)}});
  }
  j["fits"] = fits;
  j["ladder"] = to_json(r.ladder);
  return j;
}

Json to_json(const LiouvilleWitness& w) {
  return Json{{"n", w.n}, {"p", to_string(w.p)}, {"q", to_string(w.q)}, {"bound", to_string(w.bound)},
              {"holds_power", w.holds_power}};
}

Json to_json(const SmoothAnalysis& s) {
  Json j;
  j["applicable"] = s.applicable;
  j["refuted"] = s.refuted;
  j["p_max"] = s.p_max;
  j["depth"] = s.depth;
  j["witness_family_recurs"] = s.witness_family_recurs;
  j["certified_lower"] = s.certified_lower ? num(*s.certified_lower) : Json(nullptr);
  j["argument"] = s.argument;
  Json ws = Json::array();
  for (const auto& w : s.witnesses) {
    ws.push_back(Json{{"n", w.n},
                      {"j", w.j},
                      {"lambda2", to_string(w.lambda2)},
                      {"mu2", to_string(w.mu2)},
                      {"log10_sigma_upper", num(w.log10_sigma_upper)},
                      {"log10_scale_upper", num(w.log10_scale_upper)},
                      {"exact_check", w.exact_check}});
  }
  j["witnesses"] = ws;
  return j;
}

Json to_json(const PropertyEntry& p) {
  Json j;
  j["property"] = p.property;
  j["weight"] = p.weight;
  j["verdict"] = verdict_name(p.verdict);
  j["reason"] = p.reason;
  j["witnesses"] = p.witnesses;
  Json c = Json::array();
  for (const auto& [N, C] : p.constants) c.push_back(Json{{"N", num(N)}, {"C_N", num(C)}});
  j["constants"] = c;
  j["cutoff"] = num(p.cutoff);
  return j;
}

Json to_json(const PropertyVerdict& v) {
  Json j;
  j["name"] = v.name;
  j["groups"] = group_pair_name(v.groups);
  j["a0"] = v.a0;
  j["q0"] = v.q0;
  j["exact"] = v.exact;
  j["normal_form_available"] = v.normal_form_available;
  j["note"] = v.note;
  Json props = Json::array();
  for (const auto& p : v.properties) props.push_back(to_json(p));
  j["properties"] = props;
  if (v.normal_form_available) {
    j["resonance"] = to_json(v.resonance, v.groups);
    Json c2 = Json::array();
    for (const auto& r : v.condition2) c2.push_back(to_json(r, v.groups));
    j["condition2"] = c2;
    j["smooth"] = to_json(v.smooth);
  }
  return j;
}

Json to_json(const SolveReport& r) {
  Json j;
  j["residual"] = num(r.residual);
  j["resonant_modes"] = r.resonant_modes;
  j["resonant_support"] = r.resonant_support;
  j["removed_mass"] = num(r.removed_mass);
  j["min_denominator"] = num(r.min_denominator);
  j["min_denominator_certified"] = num(r.min_denominator_certified);
  j["amplification"] = num(r.amplification);
  j["threshold"] = num(r.threshold);
  j["exact_model"] = r.exact_model;
  return j;
}

Json to_json(const ClassReport& r) {
  Json j;
  j["mode"] = class_mode_name(r.mode);
  j["weight"] = r.weight;
  Json cut = Json::array();
  for (double c : r.cutoffs) cut.push_back(num(c));
  j["cutoffs"] = cut;
  j["retained"] = r.retained;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json lc = Json::array();
    for (double v : row.log_c) lc.push_back(num(v));
    rows.push_back(Json{{"N", num(row.N)}, {"log_c", lc}, {"bounded", row.bounded}});
  }
  j["rows"] = rows;
  j["consistent"] = r.consistent;
  j["verdict"] = r.verdict;
  j["critical_N"] = r.critical_N ? num(*r.critical_N) : Json(nullptr);
  j["fitted_rate"] = r.fitted_rate ? num(*r.fitted_rate) : Json(nullptr);
  j["tolerance_log"] = num(r.tolerance_log);
  return j;
}

Json to_json(const AlphaAffine& a) { return a.str(); }

Json to_json(const ExactComplex& c) { return Json{{"re", c.re.str()}, {"im", c.im.str()}}; }

Json to_json(const Expr& e) {
  Json a = Json::array();
  for (const auto& t : e.terms) {
    a.push_back(Json{{"coef", to_json(t.coef)}, {"x1", named_fn_name(t.f1)}, {"x2", named_fn_name(t.f2)}});
  }
  return a;
}

Json to_json(const OperatorSpec& s) {
  Json j;
  j["name"] = s.name;
  j["groups"] = group_pair_name(s.groups);
  j["a"] = s.a_expr.empty() && !s.exact ? Json("samples") : to_json(s.a_expr);
  j["q"] = to_json(s.q_expr);
  j["convergent"] = s.convergent;
  j["alpha"] = num(s.alpha);
  j["exact"] = s.exact;
  if (s.exact) {
    j["a0_exact"] = to_json(s.a0_exact);
    j["q0_exact"] = to_json(s.q0_exact);
  }
  j["a0"] = cnum(s.a0);
  j["q0"] = cnum(s.q0);
  j["resolution"] = Json{{"band1", s.res.band1},
                         {"band2", s.res.band2},
                         {"fine_band1", s.g1f ? s.g1f->band() : s.res.fine_band1},
                         {"q_extra", s.res.q_extra}};
  j["primitive_A"] = s.a.primitive.has_value();
  j["primitive_Q"] = s.Q.has_value();
  j["A_residual"] = num(s.A_residual);
  j["Q_residual"] = num(s.Q_residual);
  j["primitive_note"] = s.primitive_note;
  return j;
}

ExactComplex exact_complex_from_json(const Json& j) {
  if (j.is_string()) return ExactComplex{parse_alpha_affine(j.get<std::string>()), {}};
  if (j.is_number_integer()) return ExactComplex{AlphaAffine::rational(BigRational(j.get<long>())), {}};
  if (j.is_object()) {
    check_keys(j, {"re", "im"}, "coefficient");
    ExactComplex c;
    for (const char* part : {"re", "im"}) {
      if (!j.contains(part)) continue;
      const Json& v = j.at(part);
      AlphaAffine x;
      if (v.is_string()) {
        x = parse_alpha_affine(v.get<std::string>());
      } else if (v.is_number_integer()) {
        x = AlphaAffine::rational(BigRational(v.get<long>()));
      } else {
        throw ConfigError("coefficient parts must be strings such as \"1/2 + alpha\" or integers");
      }
      (std::string(part) == "re" ? c.re : c.im) = x;
    }
    return c;
  }
  throw ConfigError("coefficient must be a string, an integer or {\"re\", \"im\"}");
}

Expr expr_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("an expression is an array of terms");
  Expr e;
  for (const auto& t : j) {
    check_keys(t, {"coef", "x1", "x2"}, "term");
    Term term;
    term.coef = t.contains("coef") ? exact_complex_from_json(t.at("coef"))
                                   : ExactComplex{AlphaAffine::rational(1), {}};
    term.f1 = parse_named_fn(t.value("x1", std::string("one")));
    term.f2 = parse_named_fn(t.value("x2", std::string("one")));
    e.terms.push_back(std::move(term));
  }
  return e;
}

namespace {

Resolution resolution_from_json(const Json& j) {
  check_keys(j, {"band1", "band2", "fine_band1", "q_extra"}, "resolution");
  Resolution r;
  r.band1 = j.value("band1", r.band1);
  r.band2 = j.value("band2", r.band2);
  r.fine_band1 = j.value("fine_band1", r.fine_band1);
  r.q_extra = j.value("q_extra", r.q_extra);
  return r;
}

}  // namespace

OperatorFile operator_file_from_json(const Json& j) {
  check_keys(j, {"schema", "name", "groups", "a", "q", "resolution"}, "operator");
  if (j.value("schema", kSchemaVersion) != kSchemaVersion) throw ConfigError("unsupported schema version");
  OperatorFile f;
  f.name = j.value("name", std::string("custom"));
  if (!j.contains("groups")) throw ConfigError("operator: missing 'groups'");
  f.groups = parse_group_pair(j.at("groups").get<std::string>());
  if (!j.contains("a")) throw ConfigError("operator: missing 'a'");
  const Json& a = j.at("a");
  if (a.is_object()) {
    check_keys(a, {"samples"}, "a");
    const Json& s = a.at("samples");
    check_keys(s, {"band", "values"}, "samples");
    std::vector<cplx> vals;
    for (const auto& v : s.at("values")) {
      if (v.is_number()) {
        vals.emplace_back(v.get<double>(), 0.0);
      } else if (v.is_array() && v.size() == 2) {
        vals.emplace_back(v[0].get<double>(), v[1].get<double>());
      } else {
        throw ConfigError("samples: values must be numbers or [re, im] pairs");
      }
    }
    f.a_samples = std::make_pair(s.at("band").get<int>(), std::move(vals));
  } else {
    f.a = expr_from_json(a);
  }
  if (j.contains("q")) f.q = expr_from_json(j.at("q"));
  if (j.contains("resolution")) f.res = resolution_from_json(j.at("resolution"));
  return f;
}

OperatorSpec build_operator(const OperatorFile& f, int convergent) {
  if (f.a_samples) {
    auto cf = CoefficientFunction::from_samples(shared_grid(f.groups.first, f.a_samples->first), f.a_samples->second);
    return make_operator_sampled(f.name, f.groups, std::move(cf), f.q, f.res, convergent);
  }
  return make_operator(f.name, f.groups, f.a, f.q, f.res, convergent);
}

Json to_json(const OperatorFile& f) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["name"] = f.name;
  j["groups"] = group_pair_name(f.groups);
  if (f.a_samples) {
    Json vals = Json::array();
    for (const auto& v : f.a_samples->second) vals.push_back(cnum(v));
    j["a"] = Json{{"samples", Json{{"band", f.a_samples->first}, {"values", vals}}}};
  } else {
    j["a"] = to_json(f.a);
  }
  j["q"] = to_json(f.q);
  j["resolution"] = Json{{"band1", f.res.band1},
                         {"band2", f.res.band2},
                         {"fine_band1", f.res.fine_band1},
                         {"q_extra", f.res.q_extra}};
  return j;
}

WeightSequence weight_from_json(const Json& j) {
  check_keys(j, {"gevrey", "custom"}, "weight");
  if (j.contains("gevrey") == j.contains("custom")) throw ConfigError("weight: give exactly one of gevrey, custom");
  if (j.contains("gevrey")) return WeightSequence::gevrey(j.at("gevrey").get<double>());
  return WeightSequence::custom(doubles(j.at("custom"), "custom weight"));
}

JobConfig job_config_from_json(const Json& j) {
  check_keys(j,
             {"schema", "example", "spec", "weights", "cutoffs", "N_grid", "resonance_cutoff", "convergent",
              "resolution", "p_max"},
             "job");
  if (j.value("schema", kSchemaVersion) != kSchemaVersion) throw ConfigError("unsupported schema version");
  JobConfig c;
  if (j.contains("example")) c.example = j.at("example").get<std::string>();
  if (j.contains("spec")) c.spec = operator_file_from_json(j.at("spec"));
  if (c.example && c.spec) throw ConfigError("job: give either 'example' or 'spec'");
  if (j.contains("weights")) {
    for (const auto& w : j.at("weights")) c.analyze.weights.push_back(weight_from_json(w));
  }
  if (j.contains("cutoffs")) c.analyze.cutoffs = doubles(j.at("cutoffs"), "cutoffs");
  if (j.contains("N_grid")) c.analyze.N_grid = doubles(j.at("N_grid"), "N_grid");
  if (j.contains("resonance_cutoff")) c.analyze.resonance_cutoff = j.at("resonance_cutoff").get<double>();
  if (j.contains("p_max")) c.analyze.p_max = j.at("p_max").get<int>();
  if (j.contains("convergent")) c.convergent = j.at("convergent").get<int>();
  if (j.contains("resolution")) c.res = resolution_from_json(j.at("resolution"));
  if (c.analyze.cutoffs.empty() || c.analyze.N_grid.empty()) throw ConfigError("job: empty cutoffs or N_grid");
  return c;
}

std::string spectrum_csv(const Spectrum& s) {
  std::ostringstream os;
  os.precision(17);
  os << "xi,m,n,eta,r,s,re,im\n";
  for (int i = 0; i < s.coef.rows(); ++i) {
    const Rep& r1 = s.basis1.rep_of(i);
    const auto& e1 = s.basis1.entry(i);
    const std::string a = (r1.group == GroupKind::Torus ? std::to_string(r1.index) : HalfInt{r1.index}.str()) + "," +
                          HalfInt{twice_weight(r1, e1.row)}.str() + "," + HalfInt{twice_weight(r1, e1.col)}.str();
    for (int j = 0; j < s.coef.cols(); ++j) {
      const cplx c = s.coef(i, j);
      if (c == 0.0) continue;
      const Rep& r2 = s.basis2.rep_of(j);
      const auto& e2 = s.basis2.entry(j);
      os << a << "," << (r2.group == GroupKind::Torus ? std::to_string(r2.index) : HalfInt{r2.index}.str()) << ","
         << HalfInt{twice_weight(r2, e2.row)}.str() << "," << HalfInt{twice_weight(r2, e2.col)}.str() << ","
         << c.real() << "," << c.imag() << "\n";
    }
  }
  return os.str();
}

namespace {

int parse_twice(const std::string& tok) {
  const auto slash = tok.find('/');
  try {
    if (slash == std::string::npos) return 2 * std::stoi(tok);
    if (tok.substr(slash + 1) != "2") throw ConfigError("bad half-integer '" + tok + "'");
    return std::stoi(tok.substr(0, slash));
  } catch (const std::logic_error&) {
    throw ConfigError("bad number '" + tok + "'");
  }
}

}  // namespace

Spectrum spectrum_from_csv(const std::string& text, GroupKind g1, GroupKind g2) {
  struct Row {
    int xi, m, n, eta, r, s;
    cplx c;
  };
  std::vector<Row> rows;
  std::istringstream in(text);
  std::string line;
  int band1 = 0, band2 = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("xi,", 0) == 0) continue;
    }
    std::vector<std::string> tok;
    std::stringstream ls(line);
    std::string t;
    while (std::getline(ls, t, ',')) tok.push_back(t);
    if (tok.size() != 8) throw ConfigError("spectrum CSV rows need 8 fields: " + line);
    Row r{parse_twice(tok[0]), parse_twice(tok[1]), parse_twice(tok[2]), parse_twice(tok[3]),
          parse_twice(tok[4]), parse_twice(tok[5]), cplx(std::stod(tok[6]), std::stod(tok[7]))};
    band1 = std::max(band1, g1 == GroupKind::Torus ? std::abs(r.xi) / 2 : r.xi);
    band2 = std::max(band2, g2 == GroupKind::Torus ? std::abs(r.eta) / 2 : r.eta);
    rows.push_back(r);
  }
  Spectrum s(Basis(g1, band1), Basis(g2, band2));
  for (const auto& r : rows) {
    const Rep x = rep_from_twice(g1, r.xi);
    const Rep e = rep_from_twice(g2, r.eta);
    if (rep_twice(x) != r.xi || rep_twice(e) != r.eta) throw ConfigError("bad representation index");
    const int i = s.basis1.index(x, row_of_weight(x, r.m), row_of_weight(x, r.n));
    const int j = s.basis2.index(e, row_of_weight(e, r.r), row_of_weight(e, r.s));
    s.coef(i, j) += r.c;
  }
  return s;
}

std::string decay_csv(const Spectrum& s) {
  std::ostringstream os;
  os.precision(17);
  os << "scale,modulus\n";
  for (int i = 0; i < s.coef.rows(); ++i) {
    for (int j = 0; j < s.coef.cols(); ++j) {
      const double m = std::abs(s.coef(i, j));
      if (m == 0.0) continue;
      os << s.scale(i, j) << "," << m << "\n";
    }
  }
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

}  // namespace komatsu
