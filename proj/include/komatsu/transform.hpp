#pragma once

// Full and partial Fourier analysis on G1 x G2 and decay fitting.
//
// Layouts:
//   GridFunction  values(x1, x2)   N1 x N2
//   PartialField  values(x1, j2)   N1 x C2   (spectral in x2, the mixed form)
//   Spectrum      coef(i1, j2)     C1 x C2
// where i1, j2 index Basis entries (rep, row, col). Entry (i1, j2) of a
// Spectrum is the double coefficient f^^(xi, eta)_{mn, rs} with (m, n) the
// row/col of i1 and (r, s) the row/col of j2.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "komatsu/harmonic.hpp"
#include "komatsu/weights.hpp"

namespace komatsu {

using GridPtr = std::shared_ptr<const GroupGrid>;

// Memoized grid construction (thread-safe).
GridPtr shared_grid(GroupKind group, int band, int oversample = 1);

struct GridFunction {
  GridPtr grid1, grid2;
  CMatrix values;  // N1 x N2

  GridFunction() = default;
  GridFunction(GridPtr g1, GridPtr g2);
  GridFunction(GridPtr g1, GridPtr g2, CMatrix v);

  static GridFunction sample(GridPtr g1, GridPtr g2,
                             const std::function<cplx(const Point&, const Point&)>& f);

  int n1() const { return static_cast<int>(values.rows()); }
  int n2() const { return static_cast<int>(values.cols()); }
  bool same_grids(const GridFunction& o) const;
};

// Spectral in x2 when `spectral_second` holds (values N1 x C2), else spectral
// in x1 (values C1 x N2).
struct PartialField {
  GridPtr grid;  // the grid of the non-transformed variable
  Basis basis;   // the basis of the transformed variable
  bool spectral_second = true;
  CMatrix values;
};

struct Spectrum {
  Basis basis1, basis2;
  CMatrix coef;  // C1 x C2

  Spectrum() = default;
  Spectrum(Basis b1, Basis b2);

  cplx& at(const Rep& xi, int m, int n, const Rep& eta, int r, int s);
  cplx at(const Rep& xi, int m, int n, const Rep& eta, int r, int s) const;
  // <xi> + <eta> for entry (i, j).
  double scale(int i, int j) const;
};

double grid_norm(const GridFunction& f);
double grid_inner_norm_diff(const GridFunction& a, const GridFunction& b);

// Bands default to the grid bands.
Spectrum forward_full(const GridFunction& f, std::optional<int> band1 = std::nullopt,
                      std::optional<int> band2 = std::nullopt);
GridFunction inverse(const Spectrum& spec, GridPtr g1, GridPtr g2);

PartialField forward_partial(const GridFunction& f, int wrt = 2,
                             std::optional<int> band = std::nullopt);
Spectrum partial_to_full(const PartialField& pf, std::optional<int> band = std::nullopt);
// Inverse of forward_partial.
GridFunction partial_inverse(const PartialField& pf, GridPtr other_grid);
// Spectrum -> mixed form (x1 grid, x2 spectral).
PartialField spectrum_to_partial(const Spectrum& spec, GridPtr g1);

// 1-based tensor-product indices: i = d_eta (m - 1) + r, j = d_eta (n - 1) + s.
std::pair<int, int> index_flatten(int m, int n, int r, int s, int d_eta, int d_xi);

double plancherel_norm(const Spectrum& spec);

// Multiply row m of every block by i lambda_m on the chosen side.
Spectrum apply_field_symbol(const Spectrum& spec, int side);

// Coordinate derivatives of a grid function along an axis of x1 or x2.
GridFunction derivative(const GridFunction& f, int side, Axis axis);

enum class ClassMode { RoumieuFunction, BeurlingFunction, RoumieuDistribution, BeurlingDistribution };
const char* class_mode_name(ClassMode mode);
ClassMode parse_class_mode(const std::string& name);

struct ClassRow {
  double N = 0.0;
  std::vector<double> log_c;  // log C*(N) per cutoff
  bool bounded = false;
};

struct ClassReport {
  ClassMode mode = ClassMode::RoumieuFunction;
  std::string weight;
  std::vector<double> cutoffs;
  int retained = 0;
  std::vector<ClassRow> rows;
  bool consistent = false;
  std::string verdict;  // "... at truncation"
  // Transition value of N where boundedness flips, refined by bisection.
  std::optional<double> critical_N;
  // For Gevrey weights: the rate c in e^{-/+ c x^{1/s}} whose profile is
  // exactly at the boundedness threshold for critical_N.
  std::optional<double> fitted_rate;
  double tolerance_log = 0.0;
};

// Scale x of a coefficient is <xi> + <eta>. Entries below 1e-15 * max|c| are
// dropped. C*(N, R) = max over retained entries with x <= R of
// |c| exp(+M(N x)) (function modes) or |c| exp(-M(N x)) (distribution modes).
// C*(N) counts as bounded when log C*(N, R_last) - log C*(N, R_prev) <= log 2.
// Empty cutoffs default to {x_max/4, x_max/2, x_max} with x_max the largest
// retained scale.
ClassReport decay_classify(const Spectrum& spec, const WeightSequence& w,
                           const std::vector<double>& N_grid, ClassMode mode,
                           std::vector<double> cutoffs = {});

struct PartialFitEntry {
  double h = 0.0;
  double eps = 0.0;
  double C = 0.0;  // minimal constant making the bound hold on the data
};

struct PartialFitReport {
  int alpha_max = 0;
  int multi_indices = 0;
  std::vector<PartialFitEntry> table;
  // Best (smallest C) entry.
  PartialFitEntry best;
  // Largest eps keeping the alpha = 0 bound flat across nested eta cutoffs.
  std::optional<double> fitted_eps;
};

// max_{x1} |d^alpha f^(x1, eta)_{rs}| <= C h^{|alpha|} M_{|alpha|} exp(-M(eps <eta>))
// with d^alpha iterated coordinate derivatives along the periodic axes of x1.
PartialFitReport partial_decay_check(const GridFunction& f, const WeightSequence& w, int alpha_max,
                                     const std::vector<double>& eps_grid,
                                     const std::vector<double>& h_grid);

}  // namespace komatsu
