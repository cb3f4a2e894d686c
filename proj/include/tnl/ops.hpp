#pragma once

#include "tnl/fft.hpp"
#include "tnl/field.hpp"

namespace tnl {

// ||f||_{H^s} with weights |k|^{2s} on k != 0 (bare Euclidean |k|, no 2π) and
// weight 1 on the mean mode.
double sobolev_norm(const SpectralField& f, double s);
// Vector version: sqrt of the sum of squared component norms.
double sobolev_norm(const VectorField& v, double s);

// Real L2 pairing <f,g> = Re Σ_k f̂(k) conj(ĝ(k)).
double l2_inner(const SpectralField& f, const SpectralField& g);
double l2_inner(const VectorField& f, const VectorField& g);
inline double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0); }

// Projection onto divergence-free fields: v̂(k) - k (k·v̂(k))/|k|^2, mean
// mode preserved.  Idempotent and L2-symmetric.
VectorField leray_project(const VectorField& v);

// Divergence-free velocity with curl u = xi: û(k) = ξ̂(k) k⊥ / (2πi |k|^2),
// k⊥ = (-k2, k1).  Requires a mean-free input.  Nyquist rows are zeroed to
// preserve realness (inputs in the dynamics are band-limited below them).
VectorField biot_savart(const SpectralField& xi);

// (-Δ) e_k has symbol 4π^2 |k|^2: scalar curl of the velocity field.
SpectralField curl(const VectorField& v);

// Gradient (2πi k1 f̂, 2πi k2 f̂); Nyquist rows zeroed for realness.
VectorField gradient(const SpectralField& f);

// Heat semigroup: multiply mode k by exp(-4π^2 |k|^2 t).  Rejects t < 0.
SpectralField heat_propagate(const SpectralField& f, double t);
void heat_propagate_inplace(SpectralField& f, const std::vector<double>& table);
// Precomputed per-mode heat multipliers for a fixed step.
std::vector<double> heat_table(const TorusGrid& g, double t);

// Dealiased advection term v·∇f, Hermitian-symmetrized.  The velocity may be
// supplied in physical samples (hot path) to reuse precomputed drifts.
SpectralField transport_term(const VectorField& v, const SpectralField& f);
struct PhysVec {
  PhysField x, y;
};
PhysVec to_physical(const VectorField& v);
SpectralField transport_term_phys(const TorusGrid& g, const PhysVec& v, const SpectralField& f);

// ∇·(v f), dealiased and symmetrized (conservative form used by the
// reversed-time dual equation).
SpectralField divergence_form_term(const VectorField& v, const SpectralField& f);
SpectralField divergence_form_term_phys(const TorusGrid& g, const PhysVec& v, const SpectralField& f);

// Multiply mode k by |k|^s; the mean mode passes through unchanged, and
// s < 0 demands a mean-free input.
SpectralField fractional_laplacian_power(const SpectralField& f, double s);
// Same spectral multiplier applied with the Sobolev-metric convention
// (mean-mode weight 1): the Riesz map between H^s spaces.
SpectralField sobolev_metric_apply(const SpectralField& f, double s);
VectorField sobolev_metric_apply(const VectorField& v, double s);

// Gaussian spectral mollifier exp(-w^2 |k|^2).
SpectralField mollify(const SpectralField& f, double width);

// max_j |f(x_j)| from physical samples.
double max_abs_physical(const SpectralField& f);

}  // namespace tnl
