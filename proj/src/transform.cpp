#include "komatsu/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

#include "komatsu/error.hpp"
#include "komatsu/kernels.hpp"

namespace komatsu {

namespace {

constexpr double kRetainRelative = 1e-15;
constexpr double kBoundedLogTolerance = 0.69314718055994531;  // log 2
constexpr int kBisectionSteps = 40;

void require_grids(const GridFunction& f) {
  if (!f.grid1 || !f.grid2) throw ShapeError("grid function without grids");
  if (f.values.rows() != f.grid1->size() || f.values.cols() != f.grid2->size()) {
    throw ShapeError("grid function values do not match its grids");
  }
}

int pick_band(const GroupGrid& g, std::optional<int> band) {
  const int b = band.value_or(g.band());
  if (b < 0 || b > g.band()) throw ShapeError("requested band exceeds grid band");
  return b;
}

// Row-wise transform of an R x N matrix on `grid` (batch 1 per row).
CMatrix analyze_rows(const GroupGrid& grid, const Basis& basis, const CMatrix& in) {
  CMatrix out(in.rows(), basis.size());
  const int rows = static_cast<int>(in.rows());
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    parallel::analyze(grid, basis, in.row(r).data(), 1, out.row(r).data());
  }
  return out;
}

CMatrix synthesize_rows(const GroupGrid& grid, const Basis& basis, const CMatrix& in) {
  CMatrix out(in.rows(), grid.size());
  const int rows = static_cast<int>(in.rows());
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    parallel::synthesize(grid, basis, in.row(r).data(), 1, out.row(r).data());
  }
  return out;
}

CMatrix analyze_cols(const GroupGrid& grid, const Basis& basis, const CMatrix& in) {
  CMatrix out(basis.size(), in.cols());
  parallel::analyze(grid, basis, in.data(), static_cast<int>(in.cols()), out.data());
  return out;
}

CMatrix synthesize_cols(const GroupGrid& grid, const Basis& basis, const CMatrix& in) {
  CMatrix out(grid.size(), in.cols());
  parallel::synthesize(grid, basis, in.data(), static_cast<int>(in.cols()), out.data());
  return out;
}

// Scale/log-magnitude samples, merged so each scale keeps its largest value.
struct DecayData {
  std::vector<std::pair<double, double>> points;  // (x, log|c|), sorted by x
};

DecayData merge_points(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  DecayData d;
  for (const auto& p : pts) {
    if (!d.points.empty() && std::abs(d.points.back().first - p.first) <= 1e-12 * (1.0 + p.first)) {
      d.points.back().second = std::max(d.points.back().second, p.second);
    } else {
      d.points.push_back(p);
    }
  }
  return d;
}

double log_cstar(const DecayData& d, const WeightSequence& w, double N, double R, double sign) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [x, lc] : d.points) {
    if (x > R * (1.0 + 1e-12)) break;
    best = std::max(best, lc + sign * associated_fast(w, N * x));
  }
  return best;
}

bool is_bounded(const std::vector<double>& log_c) {
  if (log_c.size() < 2) return std::isfinite(log_c.empty() ? 0.0 : log_c.back());
  const double last = log_c.back();
  const double prev = log_c[log_c.size() - 2];
  if (!std::isfinite(last)) return last < 0.0;
  if (!std::isfinite(prev)) return true;
  return last - prev <= kBoundedLogTolerance;
}

std::vector<double> log_profile(const DecayData& d, const WeightSequence& w, double N,
                                const std::vector<double>& cutoffs, double sign) {
  std::vector<double> out;
  out.reserve(cutoffs.size());
  for (double R : cutoffs) out.push_back(log_cstar(d, w, N, R, sign));
  return out;
}

// Boundedness flips once along N; refine the flip point between two grid values.
double bisect_transition(const DecayData& d, const WeightSequence& w,
                         const std::vector<double>& cutoffs, double sign, double bounded_at,
                         double unbounded_at) {
  double lo = bounded_at, hi = unbounded_at;
  for (int it = 0; it < kBisectionSteps; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (is_bounded(log_profile(d, w, mid, cutoffs, sign))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> default_cutoffs(double x_band) {
  return {0.25 * x_band, 0.5 * x_band, x_band};
}

}  // namespace

GridPtr shared_grid(GroupKind group, int band, int oversample) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, GridPtr> cache;
  const auto key = std::make_tuple(static_cast<int>(group), band, oversample);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto g = std::make_shared<const GroupGrid>(GroupGrid::make(group, band, oversample));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, g).first->second;
}

GridFunction::GridFunction(GridPtr g1, GridPtr g2)
    : grid1(std::move(g1)), grid2(std::move(g2)),
      values(CMatrix::Zero(grid1->size(), grid2->size())) {}

GridFunction::GridFunction(GridPtr g1, GridPtr g2, CMatrix v)
    : grid1(std::move(g1)), grid2(std::move(g2)), values(std::move(v)) {
  require_grids(*this);
}

GridFunction GridFunction::sample(GridPtr g1, GridPtr g2,
                                  const std::function<cplx(const Point&, const Point&)>& f) {
  GridFunction out(g1, g2);
  const int n1 = g1->size(), n2 = g2->size();
  std::vector<Point> p2(static_cast<std::size_t>(n2));
  for (int j = 0; j < n2; ++j) p2[static_cast<std::size_t>(j)] = g2->point(j);
  for (int i = 0; i < n1; ++i) {
    const Point p1 = g1->point(i);
    for (int j = 0; j < n2; ++j) out.values(i, j) = f(p1, p2[static_cast<std::size_t>(j)]);
  }
  return out;
}

bool GridFunction::same_grids(const GridFunction& o) const {
  return grid1 == o.grid1 && grid2 == o.grid2;
}

Spectrum::Spectrum(Basis b1, Basis b2)
    : basis1(std::move(b1)), basis2(std::move(b2)),
      coef(CMatrix::Zero(basis1.size(), basis2.size())) {}

cplx& Spectrum::at(const Rep& xi, int m, int n, const Rep& eta, int r, int s) {
  return coef(basis1.index(xi, m, n), basis2.index(eta, r, s));
}

cplx Spectrum::at(const Rep& xi, int m, int n, const Rep& eta, int r, int s) const {
  return coef(basis1.index(xi, m, n), basis2.index(eta, r, s));
}

double Spectrum::scale(int i, int j) const {
  return bracket(basis1.rep_of(i)) + bracket(basis2.rep_of(j));
}

double grid_norm(const GridFunction& f) {
  require_grids(f);
  double s = 0.0;
  for (int i = 0; i < f.n1(); ++i) {
    double row = 0.0;
    for (int j = 0; j < f.n2(); ++j) row += f.grid2->weight(j) * std::norm(f.values(i, j));
    s += f.grid1->weight(i) * row;
  }
  return std::sqrt(s);
}

double grid_inner_norm_diff(const GridFunction& a, const GridFunction& b) {
  if (!a.same_grids(b)) throw ShapeError("grid functions live on different grids");
  GridFunction d(a.grid1, a.grid2, a.values - b.values);
  return grid_norm(d);
}

Spectrum forward_full(const GridFunction& f, std::optional<int> band1, std::optional<int> band2) {
  require_grids(f);
  Spectrum out(Basis(f.grid1->group(), pick_band(*f.grid1, band1)),
               Basis(f.grid2->group(), pick_band(*f.grid2, band2)));
  const CMatrix partial = analyze_rows(*f.grid2, out.basis2, f.values);
  out.coef = analyze_cols(*f.grid1, out.basis1, partial);
  return out;
}

GridFunction inverse(const Spectrum& spec, GridPtr g1, GridPtr g2) {
  if (!g1 || !g2 || g1->group() != spec.basis1.group() || g2->group() != spec.basis2.group() ||
      spec.basis1.band() > g1->band() || spec.basis2.band() > g2->band()) {
    throw ShapeError("spectrum does not fit the target grids");
  }
  const CMatrix mixed = synthesize_cols(*g1, spec.basis1, spec.coef);
  return GridFunction(g1, g2, synthesize_rows(*g2, spec.basis2, mixed));
}

PartialField forward_partial(const GridFunction& f, int wrt, std::optional<int> band) {
  require_grids(f);
  PartialField pf;
  if (wrt == 2) {
    pf.grid = f.grid1;
    pf.basis = Basis(f.grid2->group(), pick_band(*f.grid2, band));
    pf.spectral_second = true;
    pf.values = analyze_rows(*f.grid2, pf.basis, f.values);
  } else if (wrt == 1) {
    pf.grid = f.grid2;
    pf.basis = Basis(f.grid1->group(), pick_band(*f.grid1, band));
    pf.spectral_second = false;
    pf.values = analyze_cols(*f.grid1, pf.basis, f.values);
  } else {
    throw DomainError("wrt must be 1 or 2");
  }
  return pf;
}

Spectrum partial_to_full(const PartialField& pf, std::optional<int> band) {
  if (!pf.grid) throw ShapeError("partial field without grid");
  const int b = pick_band(*pf.grid, band);
  if (pf.spectral_second) {
    if (pf.values.rows() != pf.grid->size() || pf.values.cols() != pf.basis.size()) {
      throw ShapeError("partial field shape mismatch");
    }
    Spectrum out(Basis(pf.grid->group(), b), pf.basis);
    out.coef = analyze_cols(*pf.grid, out.basis1, pf.values);
    return out;
  }
  if (pf.values.rows() != pf.basis.size() || pf.values.cols() != pf.grid->size()) {
    throw ShapeError("partial field shape mismatch");
  }
  Spectrum out(pf.basis, Basis(pf.grid->group(), b));
  out.coef = analyze_rows(*pf.grid, out.basis2, pf.values);
  return out;
}

GridFunction partial_inverse(const PartialField& pf, GridPtr other_grid) {
  if (!pf.grid || !other_grid || other_grid->group() != pf.basis.group() ||
      other_grid->band() < pf.basis.band()) {
    throw ShapeError("partial field does not fit the target grid");
  }
  if (pf.spectral_second) {
    return GridFunction(pf.grid, other_grid, synthesize_rows(*other_grid, pf.basis, pf.values));
  }
  return GridFunction(other_grid, pf.grid, synthesize_cols(*other_grid, pf.basis, pf.values));
}

PartialField spectrum_to_partial(const Spectrum& spec, GridPtr g1) {
  if (!g1 || g1->group() != spec.basis1.group() || g1->band() < spec.basis1.band()) {
    throw ShapeError("spectrum does not fit the grid");
  }
  PartialField pf;
  pf.grid = g1;
  pf.basis = spec.basis2;
  pf.spectral_second = true;
  pf.values = synthesize_cols(*g1, spec.basis1, spec.coef);
  return pf;
}

std::pair<int, int> index_flatten(int m, int n, int r, int s, int d_eta, int d_xi) {
  if (d_eta < 1 || d_xi < 1 || m < 1 || n < 1 || m > d_xi || n > d_xi || r < 1 || s < 1 ||
      r > d_eta || s > d_eta) {
    throw IndexError("flatten index out of range");
  }
  return {d_eta * (m - 1) + r, d_eta * (n - 1) + s};
}

double plancherel_norm(const Spectrum& spec) {
  double s = 0.0;
  for (int i = 0; i < spec.coef.rows(); ++i) {
    const double d1 = dim(spec.basis1.rep_of(i));
    double row = 0.0;
    for (int j = 0; j < spec.coef.cols(); ++j) {
      row += dim(spec.basis2.rep_of(j)) * std::norm(spec.coef(i, j));
    }
    s += d1 * row;
  }
  return std::sqrt(s);
}

Spectrum apply_field_symbol(const Spectrum& spec, int side) {
  Spectrum out = spec;
  if (side == 1) {
    for (int i = 0; i < spec.coef.rows(); ++i) {
      const cplx f{0.0, weight(spec.basis1.rep_of(i), spec.basis1.entry(i).row)};
      out.coef.row(i) *= f;
    }
  } else if (side == 2) {
    for (int j = 0; j < spec.coef.cols(); ++j) {
      const cplx f{0.0, weight(spec.basis2.rep_of(j), spec.basis2.entry(j).row)};
      out.coef.col(j) *= f;
    }
  } else {
    throw DomainError("side must be 1 or 2");
  }
  return out;
}

GridFunction derivative(const GridFunction& f, int side, Axis axis) {
  require_grids(f);
  GridFunction out(f.grid1, f.grid2);
  if (side == 2) {
    const int n1 = f.n1();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n1; ++i) {
      std::vector<cplx> row(f.values.row(i).data(), f.values.row(i).data() + f.n2());
      const auto d = axis_derivative(*f.grid2, axis, row);
      for (int j = 0; j < f.n2(); ++j) out.values(i, j) = d[static_cast<std::size_t>(j)];
    }
    return out;
  }
  if (side != 1) throw DomainError("side must be 1 or 2");
  const RMatrix& d = f.grid1->derivative_matrix(axis);
  const auto lines = f.grid1->lines(axis);
  const int nl = static_cast<int>(lines.starts.size());
#pragma omp parallel for schedule(static)
  for (int li = 0; li < nl; ++li) {
    const int s0 = lines.starts[static_cast<std::size_t>(li)];
    for (int a = 0; a < lines.length; ++a) {
      auto dst = out.values.row(s0 + a * lines.stride);
      for (int b = 0; b < lines.length; ++b) {
        const double c = d(a, b);
        if (c != 0.0) dst += c * f.values.row(s0 + b * lines.stride);
      }
    }
  }
  return out;
}

const char* class_mode_name(ClassMode mode) {
  switch (mode) {
    case ClassMode::RoumieuFunction: return "RoumieuFunction";
    case ClassMode::BeurlingFunction: return "BeurlingFunction";
    case ClassMode::RoumieuDistribution: return "RoumieuDistribution";
    case ClassMode::BeurlingDistribution: return "BeurlingDistribution";
  }
  return "";
}

ClassMode parse_class_mode(const std::string& name) {
  for (auto m : {ClassMode::RoumieuFunction, ClassMode::BeurlingFunction,
                 ClassMode::RoumieuDistribution, ClassMode::BeurlingDistribution}) {
    if (name == class_mode_name(m)) return m;
  }
  throw ConfigError("unknown class mode '" + name + "'");
}

ClassReport decay_classify(const Spectrum& spec, const WeightSequence& w,
                           const std::vector<double>& N_grid, ClassMode mode,
                           std::vector<double> cutoffs) {
  if (N_grid.empty()) throw DomainError("empty N grid");
  for (double N : N_grid) {
    if (!(N > 0.0)) throw DomainError("N values must be positive");
  }
  const bool function_mode =
      mode == ClassMode::RoumieuFunction || mode == ClassMode::BeurlingFunction;
  const double sign = function_mode ? 1.0 : -1.0;

  double cmax = 0.0;
  for (int i = 0; i < spec.coef.rows(); ++i)
    for (int j = 0; j < spec.coef.cols(); ++j) cmax = std::max(cmax, std::abs(spec.coef(i, j)));

  ClassReport rep;
  rep.mode = mode;
  rep.weight = w.describe();
  rep.tolerance_log = kBoundedLogTolerance;

  std::vector<std::pair<double, double>> pts;
  double x_band = 0.0;
  for (int i = 0; i < spec.coef.rows(); ++i) {
    for (int j = 0; j < spec.coef.cols(); ++j) {
      const double x = spec.scale(i, j);
      const double a = std::abs(spec.coef(i, j));
      if (cmax > 0.0 && a >= kRetainRelative * cmax) {
        x_band = std::max(x_band, x);
        pts.emplace_back(x, std::log(a));
        ++rep.retained;
      }
    }
  }
  const DecayData data = merge_points(std::move(pts));
  if (cutoffs.empty()) cutoffs = default_cutoffs(x_band);
  std::sort(cutoffs.begin(), cutoffs.end());
  rep.cutoffs = cutoffs;

  std::vector<double> grid = N_grid;
  std::sort(grid.begin(), grid.end());
  int n_bounded = 0;
  for (double N : grid) {
    ClassRow row;
    row.N = N;
    row.log_c = log_profile(data, w, N, cutoffs, sign);
    row.bounded = is_bounded(row.log_c);
    n_bounded += row.bounded ? 1 : 0;
    rep.rows.push_back(std::move(row));
  }

  const bool any = n_bounded > 0;
  const bool all = n_bounded == static_cast<int>(grid.size());
  switch (mode) {
    case ClassMode::RoumieuFunction: rep.consistent = any; break;
    case ClassMode::BeurlingFunction: rep.consistent = all; break;
    case ClassMode::RoumieuDistribution: rep.consistent = all; break;
    case ClassMode::BeurlingDistribution: rep.consistent = any; break;
  }
  rep.verdict = std::string(rep.consistent ? "consistent" : "inconsistent") + " at truncation";

  // Function modes are bounded below a threshold in N, distribution modes above.
  for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k) {
    const auto& a = rep.rows[k];
    const auto& b = rep.rows[k + 1];
    if (function_mode && a.bounded && !b.bounded) {
      rep.critical_N = bisect_transition(data, w, cutoffs, sign, a.N, b.N);
    } else if (!function_mode && !a.bounded && b.bounded && !rep.critical_N) {
      rep.critical_N = bisect_transition(data, w, cutoffs, sign, b.N, a.N);
    }
  }
  // Rate c for which |c| ~ exp(-c x^{1/s}) sits exactly on the boundedness
  // threshold at critical_N between the last two cutoffs.
  if (rep.critical_N && w.is_gevrey() && cutoffs.size() >= 2) {
    const double s = w.gevrey_order();
    const double r1 = cutoffs[cutoffs.size() - 2];
    const double r2 = cutoffs.back();
    const double dx = std::pow(r2, 1.0 / s) - std::pow(r1, 1.0 / s);
    if (dx > 0.0) {
      const double dm = associated_value(w, *rep.critical_N * r2) - associated_value(w, *rep.critical_N * r1);
      rep.fitted_rate = (dm - kBoundedLogTolerance) / dx;
    }
  }
  return rep;
}

PartialFitReport partial_decay_check(const GridFunction& f, const WeightSequence& w, int alpha_max,
                                     const std::vector<double>& eps_grid,
                                     const std::vector<double>& h_grid) {
  require_grids(f);
  if (alpha_max < 0) throw DomainError("alpha_max must be nonnegative");
  if (eps_grid.empty() || h_grid.empty()) throw DomainError("empty h or eps grid");
  const auto axes = f.grid1->periodic_axes();
  double fmax = 1.0;
  for (Axis a : axes) fmax = std::max(fmax, f.grid1->max_frequency(a));
  if (alpha_max > 0 && alpha_max * std::log10(fmax) > 8.0) {
    throw ResolutionError("derivative order too large for the grid resolution");
  }

  // Enumerate multi-indices over the periodic axes of x1, deduplicating
  // repeated derivatives through a cache keyed by the order vector.
  struct Deriv {
    std::vector<int> order;
    GridFunction values;
  };
  std::vector<Deriv> derivs;
  derivs.push_back({std::vector<int>(axes.size(), 0), f});
  for (std::size_t start = 0; start < derivs.size(); ++start) {
    int total = 0;
    for (int o : derivs[start].order) total += o;
    if (total >= alpha_max) continue;
    // Extend only along axes at or after the last nonzero one: each multi-index once.
    std::size_t first_axis = 0;
    for (std::size_t a = 0; a < axes.size(); ++a)
      if (derivs[start].order[a] > 0) first_axis = a;
    for (std::size_t a = first_axis; a < axes.size(); ++a) {
      Deriv next{derivs[start].order, derivative(derivs[start].values, 1, axes[a])};
      next.order[a] += 1;
      derivs.push_back(std::move(next));
    }
  }

  PartialFitReport out;
  out.alpha_max = alpha_max;
  out.multi_indices = static_cast<int>(derivs.size());

  // g[alpha][eta] = max over x1 and block entries of |d^alpha u^(x1, eta)_{rs}|.
  const Basis basis2(f.grid2->group(), f.grid2->band());
  const int nreps = static_cast<int>(basis2.reps().size());
  std::vector<int> order_of(derivs.size());
  std::vector<std::vector<double>> g(derivs.size(), std::vector<double>(static_cast<std::size_t>(nreps), 0.0));
  for (std::size_t k = 0; k < derivs.size(); ++k) {
    int total = 0;
    for (int o : derivs[k].order) total += o;
    order_of[k] = total;
    const PartialField pf = forward_partial(derivs[k].values, 2);
    for (int x = 0; x < pf.values.rows(); ++x) {
      for (int j = 0; j < pf.values.cols(); ++j) {
        auto& slot = g[k][static_cast<std::size_t>(basis2.entry(j).rep)];
        slot = std::max(slot, std::abs(pf.values(x, j)));
      }
    }
  }

  double gmax = 0.0;
  for (const auto& row : g)
    for (double v : row) gmax = std::max(gmax, v);
  const double floor = kRetainRelative * std::max(gmax, 1e-300);

  out.best.C = std::numeric_limits<double>::infinity();
  for (double h : h_grid) {
    for (double eps : eps_grid) {
      double logC = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < derivs.size(); ++k) {
        const int t = order_of[k];
        for (int e = 0; e < nreps; ++e) {
          const double v = g[k][static_cast<std::size_t>(e)];
          if (v < floor) continue;
          const double xb = bracket(basis2.reps()[static_cast<std::size_t>(e)]);
          const double lb = t * std::log(h) + w.log_value(t) - associated_fast(w, eps * xb);
          logC = std::max(logC, std::log(v) - lb);
        }
      }
      PartialFitEntry entry{h, eps, std::exp(logC)};
      out.table.push_back(entry);
      if (entry.C < out.best.C) out.best = entry;
    }
  }

  // eps fit from the alpha = 0 profile.
  std::vector<std::pair<double, double>> pts;
  double x_band = 0.0;
  for (int e = 0; e < nreps; ++e) {
    const double xb = bracket(basis2.reps()[static_cast<std::size_t>(e)]);
    x_band = std::max(x_band, xb);
    if (g[0][static_cast<std::size_t>(e)] >= floor) pts.emplace_back(xb, std::log(g[0][static_cast<std::size_t>(e)]));
  }
  const DecayData data = merge_points(std::move(pts));
  const auto cutoffs = default_cutoffs(x_band);
  std::vector<double> grid = eps_grid;
  std::sort(grid.begin(), grid.end());
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const bool a = is_bounded(log_profile(data, w, grid[k], cutoffs, 1.0));
    const bool b = is_bounded(log_profile(data, w, grid[k + 1], cutoffs, 1.0));
    if (a && !b) {
      out.fitted_eps = bisect_transition(data, w, cutoffs, 1.0, grid[k], grid[k + 1]);
      break;
    }
  }
  if (!out.fitted_eps && !grid.empty() &&
      is_bounded(log_profile(data, w, grid.back(), cutoffs, 1.0))) {
    out.fitted_eps = grid.back();
  }
  return out;
}

}  // namespace komatsu
