#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "komatsu/error.hpp"
#include "komatsu/kernels.hpp"

namespace komatsu::parallel {

namespace {

void check(const GroupGrid& grid, const Basis& basis, int batch) {
  if (grid.group() != basis.group()) throw ShapeError("basis and grid groups differ");
  if (basis.band() > grid.band()) throw ShapeError("basis band exceeds grid band");
  if (batch < 1) throw ShapeError("batch must be positive");
}

cplx pow_i(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// table[j][x] = e^{sign * i * j * coord(x) / 2} / norm for j = -J..J.
std::vector<cplx> half_twiddles(const GroupGrid& grid, Axis axis, int n, int J, double sign,
                                double norm) {
  std::vector<cplx> t(static_cast<std::size_t>(2 * J + 1) * n);
  for (int j = -J; j <= J; ++j) {
    for (int x = 0; x < n; ++x) {
      t[static_cast<std::size_t>(j + J) * n + x] =
          std::polar(1.0 / norm, sign * 0.5 * j * grid.coord(axis, x));
    }
  }
  return t;
}

struct Su2Layout {
  int J = 0;      // largest doubled weight
  int width = 0;  // 2J + 1
  // Per basis index: frequency slot (jphi, jpsi) and phase i^{m_col - m_row}.
  std::vector<int> jphi, jpsi;
  std::vector<cplx> phase;
  std::vector<double> dimension;
};

Su2Layout su2_layout(const Basis& basis) {
  Su2Layout L;
  L.J = basis.band();
  L.width = 2 * L.J + 1;
  const int n = basis.size();
  L.jphi.resize(static_cast<std::size_t>(n));
  L.jpsi.resize(static_cast<std::size_t>(n));
  L.phase.resize(static_cast<std::size_t>(n));
  L.dimension.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& e = basis.entry(i);
    const Rep& rep = basis.rep_of(i);
    const int tr = twice_weight(rep, e.row);
    const int tc = twice_weight(rep, e.col);
    L.jphi[static_cast<std::size_t>(i)] = tc;
    L.jpsi[static_cast<std::size_t>(i)] = tr;
    L.phase[static_cast<std::size_t>(i)] = pow_i((tc - tr) / 2);
    L.dimension[static_cast<std::size_t>(i)] = dim(rep);
  }
  return L;
}

void torus_analyze(const GroupGrid& grid, const Basis& basis, const cplx* in, int batch, cplx* out) {
  const int n = grid.n_t();
  const int C = basis.size();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < C; ++i) {
    const int k = basis.rep_of(i).index;
    cplx* o = out + static_cast<std::size_t>(i) * batch;
    std::fill(o, o + batch, cplx{});
    for (int x = 0; x < n; ++x) {
      const cplx tw = std::polar(1.0 / n, -k * grid.coord(Axis::T, x));
      const cplx* src = in + static_cast<std::size_t>(x) * batch;
      for (int j = 0; j < batch; ++j) o[j] += tw * src[j];
    }
  }
}

void torus_synthesize(const GroupGrid& grid, const Basis& basis, const cplx* coef, int batch,
                      cplx* out) {
  const int n = grid.n_t();
  const int C = basis.size();
#pragma omp parallel for schedule(static)
  for (int x = 0; x < n; ++x) {
    cplx* o = out + static_cast<std::size_t>(x) * batch;
    std::fill(o, o + batch, cplx{});
    for (int i = 0; i < C; ++i) {
      const cplx tw = std::polar(1.0, basis.rep_of(i).index * grid.coord(Axis::T, x));
      const cplx* src = coef + static_cast<std::size_t>(i) * batch;
      for (int j = 0; j < batch; ++j) o[j] += tw * src[j];
    }
  }
}

void su2_analyze(const GroupGrid& grid, const Basis& basis, const cplx* in, int batch, cplx* out) {
  const Su2Layout L = su2_layout(basis);
  const int nphi = grid.n_phi(), ntheta = grid.n_theta(), npsi = grid.n_psi();
  const int C = basis.size();
  const int W = L.width;
  const auto tpsi = half_twiddles(grid, Axis::Psi, npsi, L.J, -1.0, npsi);
  const auto tphi = half_twiddles(grid, Axis::Phi, nphi, L.J, -1.0, nphi);
  const auto B = static_cast<std::size_t>(batch);

  std::vector<cplx> Y(static_cast<std::size_t>(nphi) * W * B);
  std::vector<cplx> Z(static_cast<std::size_t>(W) * W * B);
  std::fill(out, out + static_cast<std::size_t>(C) * B, cplx{});

  for (int b = 0; b < ntheta; ++b) {
    // psi transform of every phi line at this theta
#pragma omp parallel for schedule(static)
    for (int a = 0; a < nphi; ++a) {
      for (int jp = 0; jp < W; ++jp) {
        cplx* y = Y.data() + (static_cast<std::size_t>(a) * W + jp) * B;
        std::fill(y, y + B, cplx{});
        for (int c = 0; c < npsi; ++c) {
          const cplx tw = tpsi[static_cast<std::size_t>(jp) * npsi + c];
          const cplx* src = in + ((static_cast<std::size_t>(a) * ntheta + b) * npsi + c) * B;
          for (std::size_t j = 0; j < B; ++j) y[j] += tw * src[j];
        }
      }
    }
    // phi transform
#pragma omp parallel for schedule(static)
    for (int jf = 0; jf < W; ++jf) {
      for (int jp = 0; jp < W; ++jp) {
        cplx* z = Z.data() + (static_cast<std::size_t>(jf) * W + jp) * B;
        std::fill(z, z + B, cplx{});
        for (int a = 0; a < nphi; ++a) {
          const cplx tw = tphi[static_cast<std::size_t>(jf) * nphi + a];
          const cplx* y = Y.data() + (static_cast<std::size_t>(a) * W + jp) * B;
          for (std::size_t j = 0; j < B; ++j) z[j] += tw * y[j];
        }
      }
    }
    // theta quadrature against the d-table
    const double wt = grid.theta_weight(b);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < C; ++i) {
      const auto si = static_cast<std::size_t>(i);
      const cplx f = wt * std::conj(L.phase[si]) * grid.dtable(b, i);
      const cplx* z =
          Z.data() + (static_cast<std::size_t>(L.jphi[si] + L.J) * W + (L.jpsi[si] + L.J)) * B;
      cplx* o = out + si * B;
      for (std::size_t j = 0; j < B; ++j) o[j] += f * z[j];
    }
  }
}

void su2_synthesize(const GroupGrid& grid, const Basis& basis, const cplx* coef, int batch,
                    cplx* out) {
  const Su2Layout L = su2_layout(basis);
  const int nphi = grid.n_phi(), ntheta = grid.n_theta(), npsi = grid.n_psi();
  const int C = basis.size();
  const int W = L.width;
  const auto tpsi = half_twiddles(grid, Axis::Psi, npsi, L.J, 1.0, 1.0);
  const auto tphi = half_twiddles(grid, Axis::Phi, nphi, L.J, 1.0, 1.0);
  const auto B = static_cast<std::size_t>(batch);

  // Basis indices grouped by frequency slot, in increasing index order.
  std::vector<std::vector<int>> slot(static_cast<std::size_t>(W) * W);
  for (int i = 0; i < C; ++i) {
    const auto si = static_cast<std::size_t>(i);
    slot[static_cast<std::size_t>(L.jphi[si] + L.J) * W + (L.jpsi[si] + L.J)].push_back(i);
  }

  std::vector<cplx> H(static_cast<std::size_t>(W) * W * B);
  std::vector<cplx> Y(static_cast<std::size_t>(nphi) * W * B);

  for (int b = 0; b < ntheta; ++b) {
#pragma omp parallel for schedule(static)
    for (int s = 0; s < W * W; ++s) {
      cplx* h = H.data() + static_cast<std::size_t>(s) * B;
      std::fill(h, h + B, cplx{});
      for (int i : slot[static_cast<std::size_t>(s)]) {
        const auto si = static_cast<std::size_t>(i);
        const cplx f = L.dimension[si] * L.phase[si] * grid.dtable(b, i);
        const cplx* src = coef + si * B;
        for (std::size_t j = 0; j < B; ++j) h[j] += f * src[j];
      }
    }
#pragma omp parallel for schedule(static)
    for (int a = 0; a < nphi; ++a) {
      for (int jp = 0; jp < W; ++jp) {
        cplx* y = Y.data() + (static_cast<std::size_t>(a) * W + jp) * B;
        std::fill(y, y + B, cplx{});
        for (int jf = 0; jf < W; ++jf) {
          const cplx tw = tphi[static_cast<std::size_t>(jf) * nphi + a];
          const cplx* h = H.data() + (static_cast<std::size_t>(jf) * W + jp) * B;
          for (std::size_t j = 0; j < B; ++j) y[j] += tw * h[j];
        }
      }
    }
#pragma omp parallel for schedule(static)
    for (int a = 0; a < nphi; ++a) {
      for (int c = 0; c < npsi; ++c) {
        cplx* o = out + ((static_cast<std::size_t>(a) * ntheta + b) * npsi + c) * B;
        std::fill(o, o + B, cplx{});
        for (int jp = 0; jp < W; ++jp) {
          const cplx tw = tpsi[static_cast<std::size_t>(jp) * npsi + c];
          const cplx* y = Y.data() + (static_cast<std::size_t>(a) * W + jp) * B;
          for (std::size_t j = 0; j < B; ++j) o[j] += tw * y[j];
        }
      }
    }
  }
}

}  // namespace

void analyze(const GroupGrid& grid, const Basis& basis, const cplx* in, int batch, cplx* out) {
  check(grid, basis, batch);
  if (grid.group() == GroupKind::Torus) {
    torus_analyze(grid, basis, in, batch, out);
  } else {
    su2_analyze(grid, basis, in, batch, out);
  }
}

void synthesize(const GroupGrid& grid, const Basis& basis, const cplx* coef, int batch, cplx* out) {
  check(grid, basis, batch);
  if (grid.group() == GroupKind::Torus) {
    torus_synthesize(grid, basis, coef, batch, out);
  } else {
    su2_synthesize(grid, basis, coef, batch, out);
  }
}

}  // namespace komatsu::parallel
