#pragma once

// JSON and CSV emission, operator files and job configuration.
// Exact integers are written as decimal strings; non-finite doubles as
// the strings "inf", "-inf", "nan". Keys are sorted, so output is stable.

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "komatsu/diophantine.hpp"
#include "komatsu/normalform.hpp"
#include "komatsu/solver.hpp"
#include "komatsu/transform.hpp"
#include "komatsu/weights.hpp"

namespace komatsu {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

Json num(double x);
std::string dump(const Json& j);  // two-space indent, trailing newline

Json to_json(const WeightSequence& w);
Json to_json(const AxiomReport& r);
Json to_json(const AssociatedFunctionQuery& q);
Json to_json(const InequalityCheck& c);
Json to_json(const Tuple& t, const GroupPair& gp);
Json to_json(const ResonanceInventory& r, const GroupPair& gp);
Json to_json(const ScanResult& s, const GroupPair& gp);
Json to_json(const LadderCertificate& c);
Json to_json(const Condition2Result& r, const GroupPair& gp);
Json to_json(const LiouvilleWitness& w);
Json to_json(const SmoothAnalysis& s);
Json to_json(const PropertyEntry& p);
Json to_json(const PropertyVerdict& v);
Json to_json(const SolveReport& r);
Json to_json(const ClassReport& r);
Json to_json(const AlphaAffine& a);
Json to_json(const ExactComplex& c);
Json to_json(const Expr& e);
Json to_json(const OperatorSpec& s);

// Coefficient: "1/2 - alpha" or {"re": "...", "im": "..."}.
ExactComplex exact_complex_from_json(const Json& j);
// [{"coef": ..., "x1": "sin_t", "x2": "one"}, ...]
Expr expr_from_json(const Json& j);

// Operator file:
// {"schema": 1, "name": "...", "groups": "t1xs3", "a": [...] | {"samples": {...}},
//  "q": [...], "resolution": {"band1": 4, "band2": 4, "fine_band1": -1, "q_extra": -1}}
// Samples: {"band": b, "values": [[re, im], ...]} on the G1 grid of that band.
struct OperatorFile {
  std::string name;
  GroupPair groups{GroupKind::Torus, GroupKind::SU2};
  Expr a;
  std::optional<std::pair<int, std::vector<cplx>>> a_samples;  // (band, values)
  Expr q;
  Resolution res;
};

OperatorFile operator_file_from_json(const Json& j);
OperatorSpec build_operator(const OperatorFile& f, int convergent);
Json to_json(const OperatorFile& f);

// Job configuration for the analyze/example commands:
// {"schema": 1, "example" | "spec": ..., "weights": [{"gevrey": 1}, {"custom": [...]}],
//  "cutoffs": [...], "N_grid": [...], "resonance_cutoff": R, "convergent": n,
//  "resolution": {...}}
struct JobConfig {
  std::optional<std::string> example;
  std::optional<OperatorFile> spec;
  AnalyzeOptions analyze;
  std::optional<int> convergent;
  std::optional<Resolution> res;
};

JobConfig job_config_from_json(const Json& j);  // ConfigError on unknown keys
WeightSequence weight_from_json(const Json& j);

// Rows "xi,m,n,eta,r,s,re,im" with spins and weights as half-integers.
std::string spectrum_csv(const Spectrum& s);
Spectrum spectrum_from_csv(const std::string& text, GroupKind g1, GroupKind g2);
// Rows "scale,modulus" for plotting decay.
std::string decay_csv(const Spectrum& s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace komatsu
