#pragma once

#include <complex>
#include <vector>

#include "tnl/grid.hpp"

namespace tnl {

using cplx = std::complex<double>;

// Scalar field on the torus, stored spectrally with full Hermitian redundancy:
// c[index(k1,k2)] is the coefficient of e^{2πi k·x}.  A field representing a
// real-valued function satisfies c(-k) = conj(c(k)); nonlinear operations
// re-enforce that symmetry explicitly rather than assuming it.
struct SpectralField {
  TorusGrid grid;
  std::vector<cplx> c;

  SpectralField() = default;
  explicit SpectralField(const TorusGrid& g) : grid(g), c(g.size(), cplx(0.0, 0.0)) {}

  cplx& at(int k1, int k2) { return c[grid.index(k1, k2)]; }
  const cplx& at(int k1, int k2) const { return c[grid.index(k1, k2)]; }
  cplx mean() const { return c.empty() ? cplx(0.0) : c[0]; }
};

// Velocity field (two scalar components).  divergence_free is a promise made
// by the producing operation, not a recomputed property.
struct VectorField {
  SpectralField x, y;
  bool divergence_free = false;

  VectorField() = default;
  explicit VectorField(const TorusGrid& g) : x(g), y(g) {}
  const TorusGrid& grid() const { return x.grid; }
};

// Sobolev exponent wrapper used where signatures would otherwise take a bare
// double whose meaning is easy to swap with a tolerance.
struct SobolevIndex {
  double s = 0.0;
};

// Averages c(k) with conj(c(-k)); self-paired modes (0 and Nyquist corners)
// are forced real.  Cheap O(N^2); applied after every nonlinear product.
void hermitian_symmetrize(SpectralField& f);

// max_k |c(k) - conj(c(-k))| relative to the largest coefficient magnitude.
double hermitian_residue(const SpectralField& f);

// Zeroes every mode with max(|k1|,|k2|) > grid.kmax (2/3-rule mask).
void dealias(SpectralField& f);

// max_k |2πi k · v̂(k)| — spectral divergence magnitude.
double max_divergence(const VectorField& v);

// Deterministic band-limited real random field: i.i.d. complex Gaussian
// coefficients on klo <= |k| <= khi, normalized to unit L2 norm.
SpectralField random_band_field(const TorusGrid& g, int klo, int khi, unsigned long long seed);

}  // namespace tnl
