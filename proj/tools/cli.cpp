#include "cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "komatsu/diophantine.hpp"
#include "komatsu/error.hpp"
#include "komatsu/examples.hpp"
#include "komatsu/normalform.hpp"
#include "komatsu/serialize.hpp"
#include "komatsu/solver.hpp"
#include "komatsu/transform.hpp"
#include "komatsu/weights.hpp"

#ifndef KOMATSU_VERSION
#define KOMATSU_VERSION "0.0.0"
#endif

namespace komatsu::cli {
namespace {

struct Global {
  std::string out_dir = "komatsu_out";
  int threads = 0;
  unsigned long long seed = 1;
  int convergent = 2;
  std::string property;
};

// Single writer for every report file of a run.
class ReportWriter {
 public:
  ReportWriter(std::string dir, std::ostream& log) : dir_(std::move(dir)), log_(log) {}

  void json(const std::string& name, const std::string& command, const Json& result) {
    Json doc;
    doc["schema"] = kSchemaVersion;
    doc["command"] = command;
    doc["metadata"] = Json{{"version", KOMATSU_VERSION}, {"schema", kSchemaVersion}};
    doc["result"] = result;
    text(name, dump(doc));
  }

  void text(const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir_);
    const std::string path = (std::filesystem::path(dir_) / name).string();
    write_file(path, body);
    log_ << "wrote " << path << "\n";
  }

 private:
  std::string dir_;
  std::ostream& log_;
};

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return kSuccess;
    case Verdict::Refuted: return kRefuted;
    case Verdict::Undecided: return kUndecided;
  }
  return kUndecided;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + tok + "'");
    }
  }
  return out;
}

ExactComplex parse_q0(const std::string& text) {
  ExactComplex q;
  const auto comma = text.find(',');
  q.re = parse_alpha_affine(text.substr(0, comma));
  if (comma != std::string::npos) q.im = parse_alpha_affine(text.substr(comma + 1));
  return q;
}

WeightSequence load_custom(const std::string& path) {
  const Json j = Json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError("'" + path + "' is not valid JSON");
  std::vector<double> table;
  const Json& arr = j.is_object() ? j.at("table") : j;
  if (!arr.is_array()) throw ConfigError("custom weight must be an array or {\"table\": [...]}");
  for (const auto& v : arr) table.push_back(v.get<double>());
  return WeightSequence::custom(std::move(table));
}

std::string fixed(double x, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

std::string sci(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

int band_for(GroupKind g, int lmax) { return g == GroupKind::SU2 ? 2 * lmax : lmax; }

// Merges a verdict over all entries of one property.
std::string summarize(const PropertyVerdict& v, const std::string& property) {
  std::map<std::string, int> seen;
  for (const auto& p : v.properties) {
    if (p.property != property) continue;
    seen[verdict_name(p.verdict)]++;
  }
  if (seen.empty()) return "n/a";
  if (seen.size() == 1) return seen.begin()->first;
  std::string out;
  for (const auto& p : v.properties) {
    if (p.property != property) continue;
    if (!out.empty()) out += ", ";
    out += p.weight + ": " + verdict_name(p.verdict);
  }
  return out;
}

void print_verdict(const PropertyVerdict& v, std::ostream& out) {
  out << v.name << " (" << group_pair_name(v.groups) << ")  a0 = " << v.a0 << "  q0 = " << v.q0 << "\n";
  if (!v.note.empty()) out << "note: " << v.note << "\n";
  out << "resonant set: " << (v.resonance.finite ? "finite" : "infinite") << " (" << v.resonance.count
      << " tuples within " << v.resonance.cutoff << ")\n";
  for (const auto& p : v.properties) {
    out << "  " << std::left << std::setw(12) << p.property << " " << std::setw(13) << p.weight << " "
        << verdict_name(p.verdict) << "  " << p.reason << "\n";
  }
  out << "GH: " << summarize(v, "GH-Roumieu") << "\n";
  out << "GS-Gevrey: " << summarize(v, "GS-Roumieu") << "\n";
  out << "GH-smooth: " << summarize(v, "GH-smooth") << "\n";
  out << "GS-smooth: " << summarize(v, "GS-smooth") << "\n";
}

int property_exit(const PropertyVerdict& v, const std::string& property, std::ostream& err) {
  if (property.empty()) return kSuccess;
  const auto dash = property.find(':');
  const std::string name = property.substr(0, dash);
  const std::string weight = dash == std::string::npos ? "" : property.substr(dash + 1);
  const PropertyEntry* e = v.find(name, weight);
  if (!e) {
    err << "no verdict for property '" << property << "'\n";
    return kUndecided;
  }
  // Several weights: refuted wins over undecided, which wins over consistent.
  int code = kSuccess;
  for (const auto& p : v.properties) {
    if (p.property != name || (!weight.empty() && p.weight != weight)) continue;
    const int c = exit_for(p.verdict);
    if (c == kRefuted || (c == kUndecided && code == kSuccess)) code = c;
  }
  return code;
}

// ---------------------------------------------------------------- weights

struct WeightsOpts {
  std::optional<double> gevrey;
  std::string custom;
  bool check_axioms = false;
  int kmax = 50;
  bool beurling = false;
  std::vector<double> associated;
  bool inequalities = false;
};

int cmd_weights(const WeightsOpts& o, ReportWriter& rw, std::ostream& out, std::ostream& err) {
  if (o.gevrey.has_value() == !o.custom.empty()) throw ConfigError("give exactly one of --gevrey, --custom");
  const WeightSequence w = o.gevrey ? WeightSequence::gevrey(*o.gevrey) : load_custom(o.custom);
  Json result;
  result["weight"] = to_json(w);
  int code = kSuccess;

  if (o.check_axioms || !o.custom.empty()) {
    int kmax = o.kmax;
    if (const auto km = w.kmax()) kmax = std::min(kmax, *km);
    const AxiomReport rep = check_axioms(w, kmax, o.beurling);
    result["axioms"] = to_json(rep);
    for (const auto& a : rep.results) {
      out << std::left << std::setw(10) << a.axiom << (a.pass ? "pass" : "FAIL");
      if (a.first_failure) out << "  first failure at k = " << *a.first_failure;
      if (!a.note.empty()) out << "  " << a.note;
      out << "\n";
    }
    if (!rep.all_pass()) {
      err << "weight sequence fails the axioms\n";
      code = kRefuted;
    }
  }

  if (!o.associated.empty()) {
    Json rows = Json::array();
    std::string csv = "r,value,argmax\n";
    for (double r : o.associated) {
      const AssociatedFunctionQuery q = associated(w, r);
      rows.push_back(to_json(q));
      out << fixed(q.value) << "\n";
      csv += sci(r) + "," + sci(q.value) + "," + std::to_string(q.argmax) + "\n";
    }
    result["associated"] = rows;
    rw.text("associated.csv", csv);
  }

  if (o.inequalities) {
    const std::vector<double> grid{0.5, 1.0, 2.0, 5.0, 10.0, 50.0};
    Json rows = Json::array();
    int total = 0, passed = 0;
    for (double r : grid) {
      for (double s : grid) {
        const InequalityCheck c31 = check_inequality_prop31(w, r, s);
        rows.push_back(Json{{"kind", "sum"}, {"r", r}, {"s", s}, {"check", to_json(c31)}});
        ++total;
        passed += c31.pass();
        for (int t = 0; t <= 5; ++t) {
          const InequalityCheck c32 = check_inequality_prop32(w, r, s, t);
          rows.push_back(Json{{"kind", "power"}, {"r", r}, {"s", s}, {"t", t}, {"check", to_json(c32)}});
          ++total;
          passed += c32.pass();
        }
      }
    }
    result["inequalities"] = Json{{"total", total}, {"passed", passed}, {"rows", rows}};
    out << "inequalities: " << passed << "/" << total << " pass\n";
    if (passed != total) code = kRefuted;
  }

  rw.json("weights.json", "weights", result);
  return code;
}

// ---------------------------------------------------------------- dioph

struct DiophOpts {
  bool alpha_factorial = false;
  int convergents = 0;
  int liouville = 0;
  bool scan = false;
  bool resonance = false;
  bool certify = false;
  std::string group = "t1xs3";
  double cutoff = 500;
  std::string a0 = "alpha";
  std::string q0 = "0";
  double gevrey = 1.0;
  std::vector<double> N{1.0};
  bool beurling = false;
};

int cmd_dioph(const DiophOpts& o, const Global& g, ReportWriter& rw, std::ostream& out) {
  const ContinuedFraction cf = ContinuedFraction::factorial_tower(std::max({6, o.convergents, o.liouville + 1}));
  Json result;
  result["alpha"] = cf.name();
  int code = kSuccess;

  if (o.convergents > 0) {
    Json rows = Json::array();
    const auto cs = cf.convergents(o.convergents - 1);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      out << "p" << i << "/q" << i << " = " << to_string(cs[i]) << "\n";
      rows.push_back(Json{{"n", i}, {"p", to_string(cf.p(static_cast<int>(i)))}, {"q", to_string(cf.q(static_cast<int>(i)))}});
    }
    result["convergents"] = rows;
  }

  if (o.liouville > 0) {
    Json rows = Json::array();
    for (const auto& w : liouville_witnesses(cf, o.liouville)) {
      out << "n = " << w.n << ": |p - alpha q| < " << (w.holds_power ? "q^-n holds" : "q^-n NOT shown") << "\n";
      rows.push_back(to_json(w));
    }
    result["liouville"] = rows;
  }

  const bool needs_model = o.scan || o.resonance || o.certify;
  if (!needs_model) {
    rw.json("dioph.json", "dioph", result);
    return code;
  }

  const GroupPair gp = parse_group_pair(o.group);
  const NormalForm nf = normal_form(parse_alpha_affine(o.a0), parse_q0(o.q0), g.convergent);
  result["model"] = nf.model.describe();
  result["groups"] = group_pair_name(gp);

  if (o.resonance) {
    const ResonanceInventory inv = resonance_set(nf.model, gp, o.cutoff);
    result["resonance"] = to_json(inv, gp);
    out << "resonant set: " << (inv.finite ? "finite" : "infinite") << ", " << inv.count << " tuples within "
        << o.cutoff << " (" << inv.structure << ")\n";
  }

  if (o.scan) {
    const ScanResult scan = scan_small_divisors(nf.model, gp, o.cutoff);
    result["scan"] = to_json(scan, gp);
    rw.text("shells.csv", shells_csv(scan, gp));
    double best = std::numeric_limits<double>::infinity();
    const ShellMin* arg = nullptr;
    for (const auto& s : scan.shells) {
      if (s.min_approx > 0.0 && s.min_approx < best) {
        best = s.min_approx;
        arg = &s;
      }
    }
    out << "scanned " << scan.pairs << " weight pairs, " << scan.resonant_pairs << " resonant";
    if (arg) out << "; smallest nonzero |sigma| = " << sci(best) << " at " << arg->argmin.str(gp);
    out << "\n";
  }

  if (o.certify) {
    const WeightSequence w = WeightSequence::gevrey(o.gevrey);
    const Quantifier q = o.beurling ? Quantifier::Beurling : Quantifier::Roumieu;
    std::vector<FitRequest> reqs;
    for (double N : o.N) reqs.push_back({w, N});
    const double top = std::max(o.cutoff, 2000.0);
    const auto results = certify_condition2_many(nf.model, gp, reqs, q, {top / 4, top / 2, top});
    Json rows = Json::array();
    for (const auto& r : results) {
      rows.push_back(to_json(r, gp));
      out << quantifier_name(q) << " " << r.weight << " N = " << r.N << ": C_N = " << sci(r.C_N) << " ("
          << r.verdict << ")";
      if (r.ladder.available) out << ", ladder log C >= " << sci(r.ladder.log_C_lower) << " through q" << r.ladder.through;
      out << "\n";
      if (r.verdict != "consistent") code = kUndecided;
    }
    result["condition2"] = rows;
  }

  rw.json("dioph.json", "dioph", result);
  return code;
}

// ---------------------------------------------------------------- operators

struct OperatorSource {
  std::string spec_file;
  std::string example;
  std::optional<int> lmax;
};

OperatorSpec load_operator(const OperatorSource& src, const Global& g) {
  if (src.spec_file.empty() == src.example.empty()) throw ConfigError("give exactly one of --spec, --example");
  if (!src.example.empty()) {
    Resolution res;
    if (src.lmax) {
      const ExampleDef d = example_def(src.example);
      res.band1 = band_for(d.groups.first, *src.lmax);
      res.band2 = band_for(d.groups.second, *src.lmax);
    }
    return make_example(src.example, res, g.convergent);
  }
  const Json j = Json::parse(read_file(src.spec_file), nullptr, false);
  if (j.is_discarded()) throw ConfigError("'" + src.spec_file + "' is not valid JSON");
  OperatorFile f = operator_file_from_json(j);
  if (src.lmax) {
    f.res.band1 = band_for(f.groups.first, *src.lmax);
    f.res.band2 = band_for(f.groups.second, *src.lmax);
  }
  return build_operator(f, g.convergent);
}

struct AnalyzeCliOpts {
  std::string config;
  std::vector<double> gevrey;
  std::vector<double> cutoffs;
  std::vector<double> N;
  double resonance_cutoff = 0.0;
};

AnalyzeOptions analyze_options(const AnalyzeCliOpts& o, AnalyzeOptions base = {}) {
  for (double s : o.gevrey) base.weights.push_back(WeightSequence::gevrey(s));
  if (!o.cutoffs.empty()) {
    if (o.cutoffs.size() == 1) {
      const double c = o.cutoffs[0];
      base.cutoffs = {c / 4, c / 2, c};
    } else {
      base.cutoffs = o.cutoffs;
    }
    base.resonance_cutoff = base.cutoffs.back();
  }
  if (!o.N.empty()) base.N_grid = o.N;
  if (o.resonance_cutoff > 0) base.resonance_cutoff = o.resonance_cutoff;
  return base;
}

int run_analyze(const OperatorSpec& spec, const AnalyzeOptions& opts, const Global& g, const std::string& command,
                ReportWriter& rw, std::ostream& out, std::ostream& err) {
  const PropertyVerdict v = analyze(spec, opts);
  print_verdict(v, out);
  rw.json(spec.name + "_verdict.json", command, to_json(v));
  return property_exit(v, g.property, err);
}

int cmd_analyze(const OperatorSource& src, const AnalyzeCliOpts& o, Global g, ReportWriter& rw, std::ostream& out,
                std::ostream& err) {
  if (o.config.empty()) {
    const OperatorSpec spec = load_operator(src, g);
    return run_analyze(spec, analyze_options(o), g, "analyze", rw, out, err);
  }
  if (!src.spec_file.empty() || !src.example.empty()) throw ConfigError("--config excludes --spec and --example");
  const Json j = Json::parse(read_file(o.config), nullptr, false);
  if (j.is_discarded()) throw ConfigError("'" + o.config + "' is not valid JSON");
  const JobConfig job = job_config_from_json(j);
  if (job.convergent) g.convergent = *job.convergent;
  OperatorSpec spec;
  if (job.example) {
    spec = make_example(*job.example, job.res.value_or(Resolution{}), g.convergent);
  } else if (job.spec) {
    OperatorFile f = *job.spec;
    if (job.res) f.res = *job.res;
    spec = build_operator(f, g.convergent);
  } else {
    throw ConfigError("job needs 'example' or 'spec'");
  }
  return run_analyze(spec, analyze_options(o, job.analyze), g, "analyze", rw, out, err);
}

struct SolveOpts {
  bool manufactured = false;
  std::string rhs;
};

int cmd_solve(const OperatorSource& src, const SolveOpts& o, const Global& g, ReportWriter& rw, std::ostream& out) {
  const OperatorSpec spec = load_operator(src, g);
  Spectrum f;
  std::string kind;
  if (o.manufactured && !o.rhs.empty()) throw ConfigError("--manufactured excludes --rhs");
  if (o.manufactured) {
    const Spectrum u0 = random_spectrum(spec.groups.first, spec.res.band1, spec.groups.second, spec.res.band2, g.seed);
    f = manufactured_rhs(spec, u0);
    kind = "manufactured";
  } else if (!o.rhs.empty()) {
    f = spectrum_from_csv(read_file(o.rhs), spec.groups.first, spec.groups.second);
    kind = "file";
  } else {
    f = Spectrum(Basis(spec.groups.first, 0), Basis(spec.groups.second, 0));
    f.coef(0, 0) = 1.0;
    kind = "constant";
  }
  const VariableSolve sol = solve_variable(spec, f);
  const Spectrum u = partial_to_full(sol.u);
  Json result;
  result["operator"] = to_json(spec);
  result["rhs"] = kind;
  result["seed"] = g.seed;
  result["report"] = to_json(sol.report);
  rw.json("solve_report.json", "solve", result);
  rw.text("solution.csv", spectrum_csv(u));
  rw.text("decay.csv", decay_csv(u));
  out << "residual " << sci(sol.report.residual) << "  amplification " << sci(sol.report.amplification)
      << "  min |sigma| " << sci(sol.report.min_denominator) << "\n";
  return kSuccess;
}

struct ExampleOpts {
  std::string name;
  bool analyze = false;
  bool solve = false;
  bool conjugation = false;
  std::optional<int> lmax;
};

int cmd_example(const ExampleOpts& o, const AnalyzeCliOpts& ao, const Global& g, ReportWriter& rw,
                std::ostream& out, std::ostream& err) {
  const ExampleDef def = example_def(o.name);
  OperatorSource src{"", o.name, o.lmax};
  const OperatorSpec spec = load_operator(src, g);
  out << def.name << ": " << def.description << "\n";
  out << "primitive residual " << sci(spec.A_residual);
  if (spec.Q) out << ", Q residual " << sci(spec.Q_residual);
  out << "\n";
  int code = kSuccess;
  Json result;
  result["operator"] = to_json(spec);
  if (o.conjugation) {
    const Spectrum u = random_spectrum(spec.groups.first, spec.res.band1, spec.groups.second, spec.res.band2, g.seed);
    const double r = conjugation_residual(spec, u);
    result["conjugation_residual"] = num(r);
    out << "conjugation residual " << sci(r) << "\n";
  }
  if (o.solve) {
    const Spectrum u0 = random_spectrum(spec.groups.first, spec.res.band1, spec.groups.second, spec.res.band2, g.seed);
    const VariableSolve sol = solve_variable(spec, manufactured_rhs(spec, u0));
    result["solve"] = to_json(sol.report);
    out << "manufactured solve residual " << sci(sol.report.residual) << "\n";
  }
  rw.json(spec.name + ".json", "example", result);
  if (o.analyze) code = run_analyze(spec, analyze_options(ao), g, "example", rw, out, err);
  return code;
}

// ---------------------------------------------------------------- classify

struct ClassifyOpts {
  std::string spectrum;
  std::string groups = "t1xs3";
  double gevrey = 1.0;
  std::string mode = "RoumieuFunction";
  std::vector<double> N;
  std::vector<double> cutoffs;
  std::string synthetic;
  int lmax = 16;
};

// Coefficients exp(-c <scale>^{1/s}) on every basis entry.
Spectrum synthetic_spectrum(const GroupPair& gp, int lmax, double c, double s) {
  Spectrum sp(Basis(gp.first, band_for(gp.first, lmax)), Basis(gp.second, band_for(gp.second, lmax)));
  for (int i = 0; i < sp.coef.rows(); ++i) {
    for (int j = 0; j < sp.coef.cols(); ++j) sp.coef(i, j) = std::exp(-c * std::pow(sp.scale(i, j), 1.0 / s));
  }
  return sp;
}

int cmd_classify(const ClassifyOpts& o, ReportWriter& rw, std::ostream& out) {
  const GroupPair gp = parse_group_pair(o.groups);
  double s = o.gevrey;
  Spectrum sp;
  Json result;
  if (!o.synthetic.empty()) {
    const auto cs = parse_list(o.synthetic);
    if (cs.size() != 2) throw ConfigError("--synthetic expects c,s");
    s = cs[1];
    sp = synthetic_spectrum(gp, o.lmax, cs[0], s);
    result["synthetic"] = Json{{"c", cs[0]}, {"s", s}, {"lmax", o.lmax}};
  } else if (!o.spectrum.empty()) {
    sp = spectrum_from_csv(read_file(o.spectrum), gp.first, gp.second);
  } else {
    throw ConfigError("give --spectrum or --synthetic");
  }
  std::vector<double> N = o.N;
  if (N.empty()) {
    for (double x = 0.125; x <= 8.0; x *= 2) N.push_back(x);
  }
  const ClassReport rep = decay_classify(sp, WeightSequence::gevrey(s), N, parse_class_mode(o.mode), o.cutoffs);
  result["report"] = to_json(rep);
  rw.json("classify.json", "classify", result);
  rw.text("decay.csv", decay_csv(sp));
  out << rep.verdict << "\n";
  if (rep.critical_N) out << "critical N " << sci(*rep.critical_N) << "\n";
  if (rep.fitted_rate) out << "fitted rate " << sci(*rep.fitted_rate) << "\n";
  return rep.consistent ? kSuccess : kRefuted;
}

void add_analyze_flags(CLI::App* c, AnalyzeCliOpts& ao) {
  c->add_option("--gevrey", ao.gevrey, "Gevrey orders (repeatable)");
  c->add_option("--cutoff", ao.cutoffs, "scan cutoff; one value R expands to R/4, R/2, R");
  c->add_option("--N", ao.N, "N grid (repeatable)");
  c->add_option("--resonance-cutoff", ao.resonance_cutoff, "cutoff for the resonance inventory");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Global hypoellipticity and solvability of vector fields on compact Lie groups", "komatsu"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", KOMATSU_VERSION);

  Global g;
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--threads", g.threads, "OpenMP threads")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "seed for random test functions");
  app.add_option("--convergent", g.convergent, "convergent index used for numeric alpha")->check(CLI::Range(1, 6));
  app.add_option("--property", g.property, "exit code from this property's verdict, e.g. GH-Roumieu[:gevrey(s=1)]");

  WeightsOpts wo;
  auto* cw = app.add_subcommand("weights", "weight sequences and associated functions");
  cw->add_option("--gevrey", wo.gevrey, "Gevrey order s");
  cw->add_option("--custom", wo.custom, "JSON file with M_0..M_kmax");
  cw->add_flag("--check-axioms", wo.check_axioms);
  cw->add_option("--kmax", wo.kmax);
  cw->add_flag("--beurling", wo.beurling);
  cw->add_option("--associated", wo.associated, "evaluate M(r)");
  cw->add_flag("--inequalities", wo.inequalities);

  DiophOpts dop;
  auto* cd = app.add_subcommand("dioph", "continued fractions and small divisors");
  cd->add_flag("--alpha-factorial", dop.alpha_factorial, "alpha = [10; 10^2, 10^6, ...]");
  cd->add_option("--convergents", dop.convergents, "print the first n convergents");
  cd->add_option("--liouville", dop.liouville, "Liouville witnesses up to n");
  cd->add_flag("--scan", dop.scan);
  cd->add_flag("--resonance", dop.resonance);
  cd->add_flag("--certify", dop.certify);
  cd->add_flag("--beurling", dop.beurling);
  cd->add_option("--group", dop.group, "t1xs3 | s3xs3 | ...");
  cd->add_option("--cutoff", dop.cutoff);
  cd->add_option("--a0", dop.a0, "u + v*alpha");
  cd->add_option("--q0", dop.q0, "RE[,IM], each u + v*alpha");
  cd->add_option("--gevrey", dop.gevrey);
  cd->add_option("--N", dop.N);

  OperatorSource src;
  AnalyzeCliOpts ao;
  auto* ca = app.add_subcommand("analyze", "property verdicts for an operator");
  ca->add_option("--spec", src.spec_file, "operator JSON");
  ca->add_option("--example", src.example, "built-in operator");
  ca->add_option("--config", ao.config, "job JSON");
  ca->add_option("--lmax", src.lmax);
  add_analyze_flags(ca, ao);

  SolveOpts so;
  auto* cs = app.add_subcommand("solve", "solve L u = f");
  cs->add_option("--spec", src.spec_file, "operator JSON");
  cs->add_option("--example", src.example, "built-in operator");
  cs->add_option("--lmax", src.lmax, "band in l (torus band = l, SU(2) band = 2l)");
  cs->add_flag("--manufactured", so.manufactured, "f = L u0 for random band-limited u0");
  cs->add_option("--rhs", so.rhs, "right-hand side spectrum CSV");

  ExampleOpts eo;
  auto* ce = app.add_subcommand("example", "built-in operators");
  ce->add_option("name", eo.name)->required();
  ce->add_flag("--analyze", eo.analyze);
  ce->add_flag("--solve", eo.solve, "manufactured-solution solve");
  ce->add_flag("--conjugation", eo.conjugation, "conjugation residual on a random spectrum");
  ce->add_option("--lmax", eo.lmax);
  add_analyze_flags(ce, ao);

  ClassifyOpts co;
  auto* cc = app.add_subcommand("classify", "decay class of a spectrum");
  cc->add_option("--spectrum", co.spectrum, "spectrum CSV");
  cc->add_option("--groups", co.groups);
  cc->add_option("--gevrey", co.gevrey);
  cc->add_option("--mode", co.mode, "RoumieuFunction | BeurlingFunction | RoumieuDistribution | BeurlingDistribution");
  cc->add_option("--N", co.N);
  cc->add_option("--cutoff", co.cutoffs);
  cc->add_option("--synthetic", co.synthetic, "c,s: coefficients exp(-c scale^(1/s))");
  cc->add_option("--lmax", co.lmax, "band of the synthetic spectrum");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kSuccess : kUndecided;
  }

  if (g.threads > 0) omp_set_num_threads(g.threads);
  ReportWriter rw(g.out_dir, err);

  try {
    if (*cw) return cmd_weights(wo, rw, out, err);
    if (*cd) return cmd_dioph(dop, g, rw, out);
    if (*ca) return cmd_analyze(src, ao, g, rw, out, err);
    if (*cs) return cmd_solve(src, so, g, rw, out);
    if (*ce) return cmd_example(eo, ao, g, rw, out, err);
    if (*cc) return cmd_classify(co, rw, out);
  } catch (const NotInJ& e) {
    err << e.kind() << ": " << e.what() << " (removed mass " << e.removed_mass() << ")\n";
    for (const auto& m : e.modes()) err << "  " << m << "\n";
    return kUndecided;
  } catch (const ModeError& e) {
    err << e.kind() << ": " << e.what() << "\n";
    for (const auto& m : e.modes()) err << "  " << m << "\n";
    return kUndecided;
  } catch (const NoConvergence& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return kRefuted;
  } catch (const ResolutionError& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return kRefuted;
  } catch (const GridTooLarge& e) {
    err << e.kind() << ": " << e.what() << " (lower --lmax)\n";
    return kRefuted;
  } catch (const PrecisionCap& e) {
    err << e.kind() << ": " << e.what() << " (raise the convergent cap or lower the cutoff)\n";
    return kUndecided;
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return kUndecided;
  } catch (const Json::exception& e) {
    err << "ConfigError: " << e.what() << "\n";
    return kUndecided;
  }
  return kUndecided;
}

}  // namespace komatsu::cli
