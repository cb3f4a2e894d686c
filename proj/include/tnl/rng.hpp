#pragma once

#include <cstdint>

namespace tnl {

// Counter-based deterministic streams: every Gaussian draw is a pure function
// of (stream seed, counter), so per-mode Brownian increments are reproducible
// regardless of evaluation order or thread count.
uint64_t splitmix64(uint64_t x);

// Seed derivation (master -> level -> path ...).  Not commutative.
uint64_t derive_seed(uint64_t parent, uint64_t salt);

struct GaussPair {
  double z0, z1;
};
// Two independent N(0,1) draws at position `counter` of the stream.
GaussPair gauss_at(uint64_t stream, uint64_t counter);

// Uniform in (0,1), never exactly 0 or 1.
double uniform_at(uint64_t stream, uint64_t counter);

// Zero the lowest `bits` mantissa bits (relative perturbation <= 2^{bits-53}).
// Used so products with small integer wavenumber factors stay exact in IEEE
// double and analytic cancellations (k · k⊥ = 0) hold bitwise.
double mask_low_bits(double x, int bits);

}  // namespace tnl
