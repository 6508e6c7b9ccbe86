#pragma once

// Batched single-group Fourier kernels. Inputs on a grid are node-major with a
// contiguous batch dimension: value(node, j) = in[node * batch + j]. Spectral
// data uses the same layout over basis indices.
//
//   analysis : c_i = sum_x w(x) f(x) conj(xi(x)_{col,row})
//   synthesis: f(x) = sum_i d_xi xi(x)_{col,row} c_i
//
// `parallel` runs the OpenMP version; `reference` is the serial direct sum kept
// as an oracle for small sizes. Both reduce in a fixed order.

#include "komatsu/harmonic.hpp"

namespace komatsu::parallel {

void analyze(const GroupGrid& grid, const Basis& basis, const cplx* in, int batch, cplx* out);
void synthesize(const GroupGrid& grid, const Basis& basis, const cplx* coef, int batch, cplx* out);

}  // namespace komatsu::parallel

namespace komatsu::reference {

void analyze(const GroupGrid& grid, const Basis& basis, const cplx* in, int batch, cplx* out);
void synthesize(const GroupGrid& grid, const Basis& basis, const cplx* coef, int batch, cplx* out);

// Value of the basis function attached to index i at point x: xi(x)_{col,row}.
cplx basis_value(const Basis& basis, int i, const Point& x);

}  // namespace komatsu::reference
