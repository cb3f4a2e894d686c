#pragma once

#include <vector>

#include "tnl/field.hpp"

namespace tnl {

// Physical-space sample array, row-major to match the spectral layout:
// value at (x1, x2) = (i/N, j/N) lives at [i*N + j].
using PhysField = std::vector<double>;

// Spectral -> physical (real part of the inverse transform).  If
// imag_residue is non-null it receives max|Im| / max(1, max|Re|), the
// reality diagnostic for Hermitian inputs.
PhysField to_physical(const SpectralField& f, double* imag_residue = nullptr);

// Physical -> spectral with the 1/N^2 forward normalization, so that
// round-tripping a band-limited field is the identity up to roundoff.
SpectralField to_spectral(const TorusGrid& g, const PhysField& values);

// In-place c2c transforms on raw coefficient arrays (used by the hot loops
// to avoid intermediate copies).  forward includes the 1/N^2 factor.
namespace fft {
void backward(const TorusGrid& g, const cplx* in, cplx* out);  // e^{+2πik·x} synthesis
void forward(const TorusGrid& g, const cplx* in, cplx* out);   // analysis, normalized
}  // namespace fft

}  // namespace tnl
