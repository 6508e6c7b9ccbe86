#pragma once

// Fourier-division solvers for L_{a0 q0} and L_aq, and the verdict engine
// for global hypoellipticity and solvability.

#include <optional>
#include <string>
#include <vector>

#include "komatsu/diophantine.hpp"
#include "komatsu/normalform.hpp"
#include "komatsu/transform.hpp"
#include "komatsu/weights.hpp"

namespace komatsu {

// sigma = i(lambda + a0 mu) + q0. Resonance is decided by `model`; the
// numeric a0, q0 are used for the division itself.
struct NormalForm {
  DenominatorModel model;
  cplx a0{};
  cplx q0{};

  cplx sigma(int lambda2, int mu2) const { return cplx(0.0, 0.5 * lambda2 + a0.real() * 0.5 * mu2) + q0; }
};

NormalForm normal_form(const OperatorSpec& spec);
// Exact normal form for a0 = u + v alpha, q0 in Q(alpha) + i Q(alpha).
NormalForm normal_form(const AlphaAffine& a0, const ExactComplex& q0, int convergent = 2);

struct SolveReport {
  double residual = 0.0;
  std::vector<std::string> resonant_modes;  // resonant modes carrying mass above the threshold
  long long resonant_support = 0;           // resonant entries in the basis
  double removed_mass = 0.0;
  double min_denominator = 0.0;  // min |sigma| over the nonresonant support
  double min_denominator_certified = 0.0;
  double amplification = 0.0;  // max|u^| / max|f^|
  double threshold = 0.0;
  bool exact_model = true;
};

struct Projection {
  Spectrum spectrum;
  double removed_mass = 0.0;
  std::vector<std::string> modes;  // resonant entries with |c| >= tol
  long long resonant_support = 0;
};

// Zeroes every coefficient with sigma = 0. `tol` only decides which modes
// are listed.
Projection project_K(const NormalForm& nf, const Spectrum& f, double tol = 0.0);

// u^ = f^ / sigma. NotInK when a resonant coefficient reaches
// rel_tol * ||f||.
std::pair<Spectrum, SolveReport> solve_constant(const NormalForm& nf, const Spectrum& f, double rel_tol = 1e-9);

struct VariableSolve {
  PartialField u;     // on the fine x1 grid, spectral in x2
  Spectrum normal;    // solution of the normal-form equation
  SolveReport report;
};

// f -> Psi_a e^Q f -> division -> e^{-Q} Psi_{-a}. NotInJ when the
// transformed right-hand side has resonant content.
VariableSolve solve_variable(const OperatorSpec& spec, const GridFunction& f, double rel_tol = 1e-9);
VariableSolve solve_variable(const OperatorSpec& spec, const Spectrum& f, double rel_tol = 1e-9);

// The transformed right-hand side Psi_a e^Q f as a full spectrum on the fine grid.
Spectrum transformed_rhs(const OperatorSpec& spec, const Spectrum& f);

// Spectrum of L_aq u0, computed on grids two bands above u0 so that it is
// exact (in mixed form when the product grid would be large).
Spectrum manufactured_rhs(const OperatorSpec& spec, const Spectrum& u0);

// ||L_aq u - f|| / ||f|| on grids.
double residual(const OperatorSpec& spec, const GridFunction& u, const GridFunction& f);
// Same with u in mixed form and f a spectrum.
double residual_mixed(const OperatorSpec& spec, const PartialField& u, const Spectrum& f);

enum class Verdict { Consistent, Refuted, Undecided };
const char* verdict_name(Verdict v);

struct PropertyEntry {
  std::string property;  // GH-Roumieu, GH-Beurling, GS-Roumieu, GS-Beurling, GH-smooth, GS-smooth
  std::string weight;    // weight description, or "smooth"
  Verdict verdict = Verdict::Undecided;
  std::string reason;
  std::vector<std::string> witnesses;       // exact
  std::vector<std::pair<double, double>> constants;  // (N, C_N)
  double cutoff = 0.0;
};

struct AnalyzeOptions {
  std::vector<WeightSequence> weights;  // default Gevrey 1 and 2
  std::vector<double> cutoffs{500, 1000, 2000};
  std::vector<double> N_grid{0.5, 1.0, 2.0};
  double resonance_cutoff = 2000;
  int p_max = 10;
};

struct PropertyVerdict {
  std::string name;
  GroupPair groups{GroupKind::Torus, GroupKind::SU2};
  std::string a0, q0;
  bool exact = true;
  bool normal_form_available = true;
  std::string note;
  ResonanceInventory resonance;
  std::vector<Condition2Result> condition2;
  SmoothAnalysis smooth;
  std::vector<PropertyEntry> properties;

  // First entry for a property (and weight, when given).
  const PropertyEntry* find(const std::string& property, const std::string& weight = "") const;
};

PropertyVerdict analyze(const OperatorSpec& spec, const AnalyzeOptions& opts = {});

// Verdict engine on a bare normal form.
PropertyVerdict analyze_normal_form(const std::string& name, const GroupPair& gp, const DenominatorModel& model,
                                    const AnalyzeOptions& opts = {});

}  // namespace komatsu
