#include <algorithm>
#include <complex>
#include <vector>

#include "komatsu/error.hpp"
#include "komatsu/kernels.hpp"

namespace komatsu::reference {

cplx basis_value(const Basis& basis, int i, const Point& x) {
  const auto& e = basis.entry(i);
  const Rep& rep = basis.rep_of(i);
  if (rep.group == GroupKind::Torus) return std::polar(1.0, rep.index * x.t);
  return matrix_element(HalfInt{rep.index}, HalfInt{twice_weight(rep, e.col)},
                        HalfInt{twice_weight(rep, e.row)}, x.phi, x.theta, x.psi);
}

void analyze(const GroupGrid& grid, const Basis& basis, const cplx* in, int batch, cplx* out) {
  if (grid.group() != basis.group()) throw ShapeError("basis and grid groups differ");
  const auto B = static_cast<std::size_t>(batch);
  std::fill(out, out + static_cast<std::size_t>(basis.size()) * B, cplx{});
  for (int x = 0; x < grid.size(); ++x) {
    const Point p = grid.point(x);
    const double w = grid.weight(x);
    for (int i = 0; i < basis.size(); ++i) {
      const cplx f = w * std::conj(basis_value(basis, i, p));
      for (std::size_t j = 0; j < B; ++j) {
        out[static_cast<std::size_t>(i) * B + j] += f * in[static_cast<std::size_t>(x) * B + j];
      }
    }
  }
}

void synthesize(const GroupGrid& grid, const Basis& basis, const cplx* coef, int batch, cplx* out) {
  if (grid.group() != basis.group()) throw ShapeError("basis and grid groups differ");
  const auto B = static_cast<std::size_t>(batch);
  for (int x = 0; x < grid.size(); ++x) {
    const Point p = grid.point(x);
    cplx* o = out + static_cast<std::size_t>(x) * B;
    std::fill(o, o + B, cplx{});
    for (int i = 0; i < basis.size(); ++i) {
      const cplx f = static_cast<double>(dim(basis.rep_of(i))) * basis_value(basis, i, p);
      for (std::size_t j = 0; j < B; ++j) o[j] += f * coef[static_cast<std::size_t>(i) * B + j];
    }
  }
}

}  // namespace komatsu::reference
