#include "komatsu/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "komatsu/error.hpp"

namespace komatsu {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long kMaxNodes = 20'000'000;
constexpr int kMaxThetaNodes = 4096;
constexpr double kGateTolerance = 1e-12;

cplx pow_i(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

double log_fact(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

void check_su2_indices(int twice_l, int twice_m, int twice_n) {
  if (twice_l < 0 || std::abs(twice_m) > twice_l || std::abs(twice_n) > twice_l ||
      (twice_l - twice_m) % 2 != 0 || (twice_l - twice_n) % 2 != 0) {
    throw IndexError("invalid SU(2) indices l=" + HalfInt{twice_l}.str() + " m=" +
                     HalfInt{twice_m}.str() + " n=" + HalfInt{twice_n}.str());
  }
}

// Spectral derivative matrix for n equispaced nodes on a period P; Fourier
// modes e^{2 pi i j x / P} with |j| < n/2 (Nyquist dropped for even n).
RMatrix spectral_derivative(int n, double period) {
  RMatrix d = RMatrix::Zero(n, n);
  const int jmax = (n % 2 == 1) ? (n - 1) / 2 : n / 2 - 1;
  const double omega = 2.0 * kPi / period;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int j = 1; j <= jmax; ++j) {
        // i j w (e^{i j w dx} - e^{-i j w dx}) / n = -2 j w sin(j w dx) / n
        s += -2.0 * j * omega * std::sin(j * 2.0 * kPi * (a - b) / n);
      }
      d(a, b) = s / n;
    }
  }
  return d;
}

std::filesystem::path cache_path(int twice, int n_theta) {
  const char* dir = std::getenv("KOMATSU_SPECTRAL_CACHE");
  if (dir == nullptr || *dir == '\0') return {};
  return std::filesystem::path(dir) /
         ("su2_dtab_v2_" + std::to_string(twice) + "_" + std::to_string(n_theta) + ".bin");
}

bool load_cache(const std::filesystem::path& p, std::vector<double>& out, std::size_t expect) {
  if (p.empty()) return false;
  std::ifstream in(p, std::ios::binary);
  if (!in) return false;
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || n != expect) return false;
  out.resize(expect);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(expect * sizeof(double)));
  return static_cast<bool>(in);
}

void store_cache(const std::filesystem::path& p, const std::vector<double>& data) {
  if (p.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;
    const std::uint64_t n = data.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  std::filesystem::rename(tmp, p, ec);
}

}  // namespace

std::string HalfInt::str() const {
  if (twice % 2 == 0) return std::to_string(twice / 2);
  return std::to_string(twice) + "/2";
}

const char* group_key(GroupKind g) { return g == GroupKind::Torus ? "T1" : "SU2"; }

GroupKind parse_group_key(const std::string& key) {
  if (key == "T1" || key == "t1") return GroupKind::Torus;
  if (key == "SU2" || key == "su2" || key == "S3" || key == "s3") return GroupKind::SU2;
  throw ConfigError("unknown group key '" + key + "'");
}

Rep Rep::su2(HalfInt ell) {
  if (ell.twice < 0) throw DomainError("negative SU(2) spin");
  return {GroupKind::SU2, ell.twice};
}

std::string Rep::str() const {
  if (group == GroupKind::Torus) return "k=" + std::to_string(index);
  return "l=" + HalfInt{index}.str();
}

int dim(const Rep& rep) { return rep.group == GroupKind::Torus ? 1 : rep.index + 1; }

double casimir_eig(const Rep& rep) {
  if (rep.group == GroupKind::Torus) return static_cast<double>(rep.index) * rep.index;
  const double l = 0.5 * rep.index;
  return l * (l + 1.0);
}

double bracket(const Rep& rep) { return std::sqrt(1.0 + casimir_eig(rep)); }

int twice_weight(const Rep& rep, int row) {
  if (row < 0 || row >= dim(rep)) throw IndexError("row out of range for " + rep.str());
  if (rep.group == GroupKind::Torus) return 2 * rep.index;
  return 2 * row - rep.index;
}

std::vector<cplx> field_symbol(const Rep& rep) {
  std::vector<cplx> out(static_cast<std::size_t>(dim(rep)));
  for (int a = 0; a < dim(rep); ++a) out[static_cast<std::size_t>(a)] = {0.0, weight(rep, a)};
  return out;
}

namespace {

// Explicit sum; loses accuracy to cancellation once 2l exceeds ~20.
double wigner_d_sum(int twice_l, int twice_mp, int twice_m, double beta) {
  const int jpm = (twice_l + twice_m) / 2;    // j + m
  const int jmm = (twice_l - twice_m) / 2;    // j - m
  const int jpmp = (twice_l + twice_mp) / 2;  // j + m'
  const int jmmp = (twice_l - twice_mp) / 2;  // j - m'
  const int dm = (twice_mp - twice_m) / 2;    // m' - m
  const double c = std::cos(0.5 * beta);
  const double s = std::sin(0.5 * beta);
  const double lc = std::log(std::abs(c));
  const double ls = std::log(std::abs(s));
  const double pre = 0.5 * (log_fact(jpmp) + log_fact(jmmp) + log_fact(jpm) + log_fact(jmm));

  const int kmin = std::max(0, -dm);
  const int kmax = std::min(jpm, jmmp);
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const int pc = twice_l - 2 * k - dm;  // 2j - 2k + m - m'
    const int ps = 2 * k + dm;            // 2k - m + m'
    if ((pc > 0 && c == 0.0) || (ps > 0 && s == 0.0)) continue;
    double lt = pre - log_fact(jpm - k) - log_fact(k) - log_fact(jmmp - k) - log_fact(k + dm);
    if (pc > 0) lt += pc * lc;
    if (ps > 0) lt += ps * ls;
    int sign = ((k + dm) % 2 == 0) ? 1 : -1;
    if (pc % 2 == 1 && c < 0.0) sign = -sign;
    if (ps % 2 == 1 && s < 0.0) sign = -sign;
    sum += sign * std::exp(lt);
  }
  return sum;
}

// J_y = V diag(lam) V^*, indices m ascending.
struct JyEigen {
  Eigen::MatrixXcd V;
  Eigen::VectorXd lam;
};

JyEigen jy_eigen(int twice_l) {
  const int d = twice_l + 1;
  const double j = 0.5 * twice_l;
  Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(d, d);
  for (int a = 0; a + 1 < d; ++a) {
    const double m = -j + a;
    const double c = 0.5 * std::sqrt((j - m) * (j + m + 1.0));
    J(a + 1, a) = cplx(0.0, -c);
    J(a, a + 1) = cplx(0.0, c);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(J);
  return {es.eigenvectors(), es.eigenvalues()};
}

// d(beta)_{m' m} = <m'| exp(-i beta J_y) |m>.
Eigen::MatrixXd wigner_d_matrix(const JyEigen& e, double beta) {
  const Eigen::Index d = e.lam.size();
  Eigen::MatrixXcd W = e.V;
  for (Eigen::Index k = 0; k < d; ++k) W.col(k) *= std::polar(1.0, -beta * e.lam(k));
  return (W * e.V.adjoint()).real();
}

constexpr int kExplicitMaxTwice = 16;

}  // namespace

double wigner_d(int twice_l, int twice_mp, int twice_m, double beta) {
  check_su2_indices(twice_l, twice_mp, twice_m);
  if (twice_l <= kExplicitMaxTwice) return wigner_d_sum(twice_l, twice_mp, twice_m, beta);
  const auto D = wigner_d_matrix(jy_eigen(twice_l), beta);
  return D((twice_mp + twice_l) / 2, (twice_m + twice_l) / 2);
}

cplx matrix_element(HalfInt ell, HalfInt m, HalfInt n, double phi, double theta, double psi) {
  check_su2_indices(ell.twice, m.twice, n.twice);
  const double arg = 0.5 * (m.twice * phi + n.twice * psi);
  return std::polar(1.0, arg) * pow_i((m.twice - n.twice) / 2) *
         wigner_d(ell.twice, n.twice, m.twice, theta);
}

CMatrix rep_matrix(const Rep& rep, const Point& x) {
  const int d = dim(rep);
  CMatrix out(d, d);
  if (rep.group == GroupKind::Torus) {
    out(0, 0) = std::polar(1.0, rep.index * x.t);
    return out;
  }
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      out(a, b) = matrix_element(HalfInt{rep.index}, HalfInt{twice_weight(rep, a)},
                                 HalfInt{twice_weight(rep, b)}, x.phi, x.theta, x.psi);
    }
  }
  return out;
}

Basis::Basis(GroupKind group, int band) : group_(group), band_(band) {
  if (band < 0) throw DomainError("negative band limit");
  if (group == GroupKind::Torus) {
    reps_.push_back(Rep::torus(0));
    for (int k = 1; k <= band; ++k) {
      reps_.push_back(Rep::torus(k));
      reps_.push_back(Rep::torus(-k));
    }
  } else {
    for (int t = 0; t <= band; ++t) reps_.push_back(Rep::su2_twice(t));
  }
  int off = 0;
  for (std::size_t r = 0; r < reps_.size(); ++r) {
    offsets_.push_back(off);
    const int d = dim(reps_[r]);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) entries_.push_back({static_cast<int>(r), a, b});
    }
    off += d * d;
  }
}

bool Basis::contains(const Rep& rep) const {
  if (rep.group != group_) return false;
  if (group_ == GroupKind::Torus) return std::abs(rep.index) <= band_;
  return rep.index >= 0 && rep.index <= band_;
}

int Basis::rep_index(const Rep& rep) const {
  if (!contains(rep)) throw IndexError("representation " + rep.str() + " outside the band");
  if (group_ == GroupKind::SU2) return rep.index;
  return rep.index > 0 ? 2 * rep.index - 1 : -2 * rep.index;
}

int Basis::index(const Rep& rep, int row, int col) const {
  const int r = rep_index(rep);
  const int d = dim(rep);
  if (row < 0 || row >= d || col < 0 || col >= d) throw IndexError("block index out of range");
  return offsets_[static_cast<std::size_t>(r)] + row * d + col;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw DomainError("Gauss-Legendre order must be positive");
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = wi;
    w[static_cast<std::size_t>(n - 1 - i)] = wi;
  }
}

GroupGrid GroupGrid::torus(int kmax, int oversample) {
  if (kmax < 0) throw DomainError("negative kmax");
  if (oversample < 1) throw DomainError("oversample must be >= 1");
  const long n = static_cast<long>(oversample) * (2L * kmax + 1);
  if (n > kMaxNodes) throw GridTooLarge("torus grid with " + std::to_string(n) + " nodes");
  GroupGrid g;
  g.group_ = GroupKind::Torus;
  g.band_ = kmax;
  g.n_t_ = static_cast<int>(n);
  g.weights_.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
  g.d_t_ = spectral_derivative(g.n_t_, 2.0 * kPi);
  return g;
}

GroupGrid GroupGrid::su2(int twice_lmax, int oversample) {
  if (twice_lmax < 0) throw DomainError("negative spin band");
  if (oversample < 1) throw DomainError("oversample must be >= 1");
  GroupGrid g;
  g.group_ = GroupKind::SU2;
  g.band_ = twice_lmax;
  g.n_phi_ = g.n_psi_ = oversample * (2 * twice_lmax + 2);
  int n_theta = oversample * (twice_lmax + 8);
  for (;;) {
    const long total = static_cast<long>(g.n_phi_) * n_theta * g.n_psi_;
    if (total > kMaxNodes || n_theta > kMaxThetaNodes) {
      throw GridTooLarge("SU(2) grid with " + std::to_string(total) + " nodes");
    }
    g.n_theta_ = n_theta;
    std::vector<double> x, w;
    gauss_legendre(n_theta, x, w);
    g.theta_.resize(static_cast<std::size_t>(n_theta));
    g.theta_w_.resize(static_cast<std::size_t>(n_theta));
    // x ascending gives theta descending; store theta ascending.
    for (int b = 0; b < n_theta; ++b) {
      const auto src = static_cast<std::size_t>(n_theta - 1 - b);
      g.theta_[static_cast<std::size_t>(b)] = std::acos(x[src]);
      g.theta_w_[static_cast<std::size_t>(b)] = 0.5 * w[src];
    }
    g.build_tables();
    if (g.theta_gate_error() <= kGateTolerance) break;
    n_theta *= 2;
  }
  const double wpp = 1.0 / (static_cast<double>(g.n_phi_) * g.n_psi_);
  g.weights_.resize(static_cast<std::size_t>(g.n_phi_) * g.n_theta_ * g.n_psi_);
  for (int a = 0; a < g.n_phi_; ++a) {
    for (int b = 0; b < g.n_theta_; ++b) {
      for (int c = 0; c < g.n_psi_; ++c) {
        g.weights_[(static_cast<std::size_t>(a) * g.n_theta_ + b) * g.n_psi_ + c] =
            wpp * g.theta_w_[static_cast<std::size_t>(b)];
      }
    }
  }
  g.d_phi_ = spectral_derivative(g.n_phi_, 4.0 * kPi);
  g.d_psi_ = spectral_derivative(g.n_psi_, 4.0 * kPi);
  return g;
}

GroupGrid GroupGrid::make(GroupKind g, int band, int oversample) {
  return g == GroupKind::Torus ? torus(band, oversample) : su2(band, oversample);
}

void GroupGrid::build_tables() {
  const Basis basis(GroupKind::SU2, band_);
  dtab_stride_ = static_cast<std::size_t>(basis.size());
  const std::size_t total = dtab_stride_ * static_cast<std::size_t>(n_theta_);
  const auto path = cache_path(band_, n_theta_);
  if (load_cache(path, dtab_, total)) return;
  dtab_.assign(total, 0.0);
  const auto& reps = basis.reps();
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const int tl = reps[r].index;
    const int d = dim(reps[r]);
    const int off = basis.offset(static_cast<int>(r));
    const JyEigen eig = jy_eigen(tl);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < n_theta_; ++b) {
      const auto D = wigner_d_matrix(eig, theta_[static_cast<std::size_t>(b)]);
      double* row = dtab_.data() + static_cast<std::size_t>(b) * dtab_stride_ + static_cast<std::size_t>(off);
      for (int a = 0; a < d; ++a) {
        const int ia = (twice_weight(reps[r], a) + tl) / 2;
        for (int c = 0; c < d; ++c) row[a * d + c] = D(ia, (twice_weight(reps[r], c) + tl) / 2);
      }
    }
  }
  store_cache(path, dtab_);
}

double GroupGrid::theta_gate_error() const {
  if (group_ != GroupKind::SU2) return 0.0;
  const Basis basis(GroupKind::SU2, band_);
  double err = 0.0;
  for (int t1 = 0; t1 <= band_; ++t1) {
    for (int t2 = t1 % 2; t2 <= band_; t2 += 2) {
      if (t2 < t1) continue;
      const int tmin = std::min(t1, t2);
      for (int tm = -tmin; tm <= tmin; tm += 2) {
        for (int tn = -tmin; tn <= tmin; tn += 2) {
          const int i1 = basis.index(Rep::su2_twice(t1), (tm + t1) / 2, (tn + t1) / 2);
          const int i2 = basis.index(Rep::su2_twice(t2), (tm + t2) / 2, (tn + t2) / 2);
          double s = 0.0;
          for (int b = 0; b < n_theta_; ++b) {
            s += theta_w_[static_cast<std::size_t>(b)] * dtable(b, i1) * dtable(b, i2);
          }
          const double expect = (t1 == t2) ? 1.0 / (t1 + 1) : 0.0;
          err = std::max(err, std::abs(s - expect));
        }
      }
    }
  }
  return err;
}

Point GroupGrid::point(int node) const {
  Point p;
  if (node < 0 || node >= size()) throw IndexError("grid node out of range");
  if (group_ == GroupKind::Torus) {
    p.t = coord(Axis::T, node);
    return p;
  }
  const int c = node % n_psi_;
  const int b = (node / n_psi_) % n_theta_;
  const int a = node / (n_psi_ * n_theta_);
  p.phi = coord(Axis::Phi, a);
  p.theta = theta_[static_cast<std::size_t>(b)];
  p.psi = coord(Axis::Psi, c);
  return p;
}

double GroupGrid::coord(Axis axis, int i) const {
  switch (axis) {
    case Axis::T: return 2.0 * kPi * i / n_t_;
    case Axis::Phi: return 4.0 * kPi * i / n_phi_;
    case Axis::Psi: return 4.0 * kPi * i / n_psi_;
  }
  return 0.0;
}

std::vector<Axis> GroupGrid::periodic_axes() const {
  if (group_ == GroupKind::Torus) return {Axis::T};
  return {Axis::Phi, Axis::Psi};
}

const RMatrix& GroupGrid::derivative_matrix(Axis axis) const {
  if (group_ == GroupKind::Torus && axis == Axis::T) return d_t_;
  if (group_ == GroupKind::SU2 && axis == Axis::Phi) return d_phi_;
  if (group_ == GroupKind::SU2 && axis == Axis::Psi) return d_psi_;
  throw DomainError("axis does not belong to this group");
}

double GroupGrid::max_frequency(Axis axis) const {
  const int n = static_cast<int>(derivative_matrix(axis).rows());
  const int jmax = (n % 2 == 1) ? (n - 1) / 2 : n / 2 - 1;
  return axis == Axis::T ? jmax : 0.5 * jmax;
}

GroupGrid::Lines GroupGrid::lines(Axis axis) const {
  Lines l;
  if (group_ == GroupKind::Torus) {
    if (axis != Axis::T) throw DomainError("axis does not belong to the torus");
    l.length = n_t_;
    l.stride = 1;
    l.starts = {0};
    return l;
  }
  if (axis == Axis::Psi) {
    l.length = n_psi_;
    l.stride = 1;
    for (int a = 0; a < n_phi_; ++a)
      for (int b = 0; b < n_theta_; ++b) l.starts.push_back((a * n_theta_ + b) * n_psi_);
  } else if (axis == Axis::Phi) {
    l.length = n_phi_;
    l.stride = n_theta_ * n_psi_;
    for (int b = 0; b < n_theta_; ++b)
      for (int c = 0; c < n_psi_; ++c) l.starts.push_back(b * n_psi_ + c);
  } else {
    throw DomainError("axis does not belong to SU(2)");
  }
  return l;
}

std::vector<cplx> axis_derivative(const GroupGrid& grid, Axis axis, std::span<const cplx> values) {
  if (static_cast<int>(values.size()) != grid.size()) throw ShapeError("values do not match grid");
  const RMatrix& d = grid.derivative_matrix(axis);
  const auto lines = grid.lines(axis);
  std::vector<cplx> out(values.size());
  const int nl = static_cast<int>(lines.starts.size());
#pragma omp parallel for schedule(static)
  for (int li = 0; li < nl; ++li) {
    const int s0 = lines.starts[static_cast<std::size_t>(li)];
    for (int i = 0; i < lines.length; ++i) {
      cplx acc{};
      for (int j = 0; j < lines.length; ++j) {
        acc += d(i, j) * values[static_cast<std::size_t>(s0 + j * lines.stride)];
      }
      out[static_cast<std::size_t>(s0 + i * lines.stride)] = acc;
    }
  }
  return out;
}

std::vector<cplx> vector_field_apply(const GroupGrid& grid, std::span<const cplx> values) {
  return axis_derivative(grid, grid.field_axis(), values);
}

CMatrix numeric_symbol(const GroupGrid& grid, const Rep& rep, int node) {
  if (rep.group != grid.group()) throw ShapeError("representation and grid groups differ");
  const Axis axis = grid.field_axis();
  const auto lines = grid.lines(axis);
  // Locate the line through `node` and the position on it.
  int start = -1, pos = -1;
  for (int s0 : lines.starts) {
    const int off = node - s0;
    if (off >= 0 && off % lines.stride == 0 && off / lines.stride < lines.length) {
      start = s0;
      pos = off / lines.stride;
      break;
    }
  }
  if (start < 0) throw IndexError("node not on a field line");
  const RMatrix& d = grid.derivative_matrix(axis);
  const int dm = dim(rep);
  CMatrix xphi = CMatrix::Zero(dm, dm);
  for (int j = 0; j < lines.length; ++j) {
    const CMatrix u = rep_matrix(rep, grid.point(start + j * lines.stride));
    xphi += d(pos, j) * u;
  }
  const CMatrix u0 = rep_matrix(rep, grid.point(node));
  return u0.adjoint() * xphi;
}

}  // namespace komatsu
