#pragma once

// Group backends for T^1 and SU(2) ~ S^3: representation indices, matrix
// elements, quadrature grids and the left-invariant fields d/dt, d/dpsi.
//
// SU(2) conventions. Euler angles (phi, theta, psi) with
//   t^l_{mn}(phi, theta, psi) = e^{i(m phi + n psi)} i^{m-n} d^l_{nm}(theta)
// where d^l is the real Wigner small-d matrix and rows/columns are ordered
// m = -l, ..., l. For l = 1/2 in the order (+1/2, -1/2) this is the matrix
// [[p1, p2], [-conj(p2), conj(p1)]] with p1 = cos(theta/2) e^{i(phi+psi)/2},
// p2 = i sin(theta/2) e^{i(phi-psi)/2}, and t^l is the symmetric power of it.
// d/dpsi acts on column n by i n, so its symbol is diag(i m).
// Laplacian eigenvalue: nu = l(l+1), <l> = sqrt(1 + nu).

#include <complex>
#include <compare>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace komatsu {

using cplx = std::complex<double>;
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Element of Z/2, stored doubled.
struct HalfInt {
  int twice = 0;

  static constexpr HalfInt from_twice(int t) { return HalfInt{t}; }
  static constexpr HalfInt from_int(int v) { return HalfInt{2 * v}; }

  constexpr double value() const { return 0.5 * twice; }
  constexpr bool is_integer() const { return twice % 2 == 0; }
  constexpr HalfInt operator-() const { return HalfInt{-twice}; }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt{twice + o.twice}; }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt{twice - o.twice}; }
  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string str() const;
};

enum class GroupKind { Torus, SU2 };

const char* group_key(GroupKind g);  // "T1" / "SU2"
GroupKind parse_group_key(const std::string& key);

// Irreducible representation: Torus{k} or SU2{l} (index = k or 2l).
struct Rep {
  GroupKind group = GroupKind::Torus;
  int index = 0;

  static Rep torus(int k) { return {GroupKind::Torus, k}; }
  static Rep su2(HalfInt ell);
  static Rep su2_twice(int twice_ell) { return su2(HalfInt{twice_ell}); }

  bool operator==(const Rep&) const = default;
  std::string str() const;
};

int dim(const Rep& rep);
double casimir_eig(const Rep& rep);
double bracket(const Rep& rep);

// Doubled symbol weight of row a (0-based): 2k on the torus, 2m = 2a - 2l on SU(2).
int twice_weight(const Rep& rep, int row);
inline double weight(const Rep& rep, int row) { return 0.5 * twice_weight(rep, row); }

// Diagonal of the symbol of d/dt or d/dpsi: i k, or i m for m = -l..l.
std::vector<cplx> field_symbol(const Rep& rep);

// Wigner small-d d^l_{m' m}(beta), arguments doubled. Explicit factorial sum
// evaluated in log-space with sign tracking.
double wigner_d(int twice_l, int twice_mp, int twice_m, double beta);

// t^l_{mn}(phi, theta, psi); IndexError on invalid indices.
cplx matrix_element(HalfInt ell, HalfInt m, HalfInt n, double phi, double theta, double psi);

struct Point {
  double t = 0.0;      // torus coordinate
  double phi = 0.0;    // SU(2) Euler angles
  double theta = 0.0;
  double psi = 0.0;
};

// Full representation matrix at a point, rows/cols ordered by increasing weight.
CMatrix rep_matrix(const Rep& rep, const Point& x);

// Coefficient layout for one group up to a band limit: the blocks f^(xi)
// (d_xi x d_xi each, row-major) concatenated. Torus reps are ordered
// k = 0, 1, -1, 2, -2, ...; SU(2) by increasing l. A smaller band is always a
// prefix of a larger one.
class Basis {
 public:
  struct Entry {
    int rep = 0;  // index into reps()
    int row = 0;
    int col = 0;
  };

  Basis() = default;
  Basis(GroupKind group, int band);

  GroupKind group() const noexcept { return group_; }
  int band() const noexcept { return band_; }
  int size() const noexcept { return static_cast<int>(entries_.size()); }
  const std::vector<Rep>& reps() const noexcept { return reps_; }
  int offset(int rep_index) const { return offsets_[static_cast<std::size_t>(rep_index)]; }
  const Entry& entry(int i) const { return entries_[static_cast<std::size_t>(i)]; }
  const Rep& rep_of(int i) const { return reps_[static_cast<std::size_t>(entry(i).rep)]; }

  int rep_index(const Rep& rep) const;  // IndexError if outside the band
  int index(const Rep& rep, int row, int col) const;
  bool contains(const Rep& rep) const;

  bool operator==(const Basis& o) const { return group_ == o.group_ && band_ == o.band_; }

 private:
  GroupKind group_ = GroupKind::Torus;
  int band_ = 0;
  std::vector<Rep> reps_;
  std::vector<int> offsets_;
  std::vector<Entry> entries_;
};

enum class Axis { T, Phi, Psi };

// Tensor quadrature for the normalized Haar measure.
//   T^1 : N uniform nodes on [0, 2pi), weights 1/N.
//   SU(2): uniform phi and psi grids of period 4pi, Gauss-Legendre in cos(theta).
// SU(2) node index is (a * n_theta + b) * n_psi + c for (phi_a, theta_b, psi_c).
class GroupGrid {
 public:
  // N = oversample * (2 kmax + 1) nodes.
  static GroupGrid torus(int kmax, int oversample = 1);
  // n_phi = n_psi = oversample * (4l + 2), n_theta = oversample * (2l + 8),
  // doubling n_theta until the theta part of the Schur gate passes.
  static GroupGrid su2(int twice_lmax, int oversample = 1);
  static GroupGrid make(GroupKind g, int band, int oversample = 1);

  GroupKind group() const noexcept { return group_; }
  int band() const noexcept { return band_; }
  Basis basis() const { return Basis(group_, band_); }

  int size() const noexcept { return static_cast<int>(weights_.size()); }
  double weight(int node) const { return weights_[static_cast<std::size_t>(node)]; }
  std::span<const double> weights() const noexcept { return weights_; }
  Point point(int node) const;

  int n_t() const noexcept { return n_t_; }
  int n_phi() const noexcept { return n_phi_; }
  int n_theta() const noexcept { return n_theta_; }
  int n_psi() const noexcept { return n_psi_; }
  double coord(Axis axis, int i) const;
  double theta_node(int b) const { return theta_[static_cast<std::size_t>(b)]; }
  double theta_weight(int b) const { return theta_w_[static_cast<std::size_t>(b)]; }

  // d-table entry d^l_{m_row m_col}(theta_b) for basis index i (SU(2) only).
  double dtable(int b, int basis_index) const {
    return dtab_[static_cast<std::size_t>(b) * dtab_stride_ + static_cast<std::size_t>(basis_index)];
  }

  // Periodic axis of the field X: T on the torus, Psi on SU(2).
  Axis field_axis() const noexcept { return group_ == GroupKind::Torus ? Axis::T : Axis::Psi; }
  std::vector<Axis> periodic_axes() const;

  // Spectral differentiation matrix along a periodic axis (real, n x n).
  const RMatrix& derivative_matrix(Axis axis) const;
  // Largest angular frequency resolved along an axis (in units of the coordinate).
  double max_frequency(Axis axis) const;

  // Lines along an axis: every line has `length` nodes spaced by `stride`.
  struct Lines {
    int length = 0;
    int stride = 0;
    std::vector<int> starts;
  };
  Lines lines(Axis axis) const;

  // Max deviation of the theta-integrals of d^l_{mn} d^{l'}_{mn} from their
  // Schur values, for all l, l' up to the band.
  double theta_gate_error() const;

 private:
  void build_tables();

  GroupKind group_ = GroupKind::Torus;
  int band_ = 0;
  int n_t_ = 0, n_phi_ = 0, n_theta_ = 0, n_psi_ = 0;
  std::vector<double> weights_;
  std::vector<double> theta_, theta_w_;
  std::vector<double> dtab_;
  std::size_t dtab_stride_ = 0;
  RMatrix d_t_, d_phi_, d_psi_;
};

// Gauss-Legendre nodes/weights on [-1, 1] (weights sum to 2).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// Spectral derivative of a function sampled on `grid` along `axis`.
std::vector<cplx> axis_derivative(const GroupGrid& grid, Axis axis, std::span<const cplx> values);
// X = d/dt (torus) or d/dpsi (SU(2)).
std::vector<cplx> vector_field_apply(const GroupGrid& grid, std::span<const cplx> values);

// Symbol phi(x)^* (X phi)(x) computed numerically on the grid at node `node`.
CMatrix numeric_symbol(const GroupGrid& grid, const Rep& rep, int node = 0);

}  // namespace komatsu
