#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnl/field.hpp"
#include "tnl/ops.hpp"

namespace tnl {

enum class NoiseWindow { lowpass, band };

// One Fourier mode of the noise: k, the unit vector a_k = ±k⊥/|k| shared by
// the ±k pair, and the radial weight |k|^{-alpha}.
struct NoiseMode {
  int k1, k2;
  double a1, a2;     // a_k components
  double weight;     // |k|^{-alpha}
  bool plus_lattice; // k1 > 0 or (k1 == 0 and k2 > 0)
};

// Divergence-free transport noise W = Σ_k |k|^{-alpha} a_k e_k B^k restricted
// to a spectral window: lowpass keeps 0 < |k| <= cutoff, band keeps
// cutoff <= |k| <= 2*cutoff.  epsilon is the intensity normalization
// c_d (Σ weights^2)^{-1} with c_d = d/(d-1) = 2, summed over the model's own
// mode list, so epsilon * Σ weights^2 == c_d identically.
struct NoiseModel {
  double alpha = 0.5;
  int cutoff = 0;
  NoiseWindow window = NoiseWindow::lowpass;
  std::vector<NoiseMode> modes;  // both half-lattices
  double epsilon = 0.0;
  int max_mode() const { return window == NoiseWindow::band ? 2 * cutoff : cutoff; }
};

// alpha ∈ (0,1] (the closed right endpoint is exercised by the reference
// value eps=2/7 at alpha=1, n=2), cutoff >= 1.
NoiseModel build_noise_model(double alpha, int cutoff, NoiseWindow window = NoiseWindow::lowpass);

// {"alpha":..., "n":..., "window":"lowpass|band", "epsilon":..., "mode_count":...}
std::string noise_model_summary(const NoiseModel& m);

// Complex Brownian motions B^k for k in the plus half-lattice, with
// B^{-k} = conj(B^k).  Increments are pure functions of (seed, k, step):
// drivers with equal seeds agree mode-by-mode whatever model queries them.
struct BrownianDriver {
  uint64_t seed = 0;
  long step = 0;
  double time = 0.0;

  explicit BrownianDriver(uint64_t s) : seed(s) {}
  // ΔB^k over one step of length dt: E|ΔB|^2 = dt (dt/2 per component).
  cplx increment(int k1, int k2, long step_index, double dt) const;
  void advance(double dt) {
    ++step;
    time += dt;
  }
};

// Spectral increment field ΔW = Σ |k|^{-alpha} a_k e_k ΔB^k (no sqrt(eps)
// factor — callers scale).  The _at form is pure; the other advances the
// driver clock.  Coefficients are exactly divergence-free and exactly
// Hermitian by construction.
VectorField sample_noise_increment_at(const NoiseModel& m, const TorusGrid& g,
                                      const BrownianDriver& d, long step_index, double dt);
VectorField sample_noise_increment(const NoiseModel& m, const TorusGrid& g, BrownianDriver& d,
                                   double dt);

// Restrict a sampled increment to a narrower model sharing the same driver:
// zeroes coefficients outside m's window.  Exact mode-sharing coupling.
VectorField window_restrict(const NoiseModel& m, const VectorField& full);

// Deterministic variance of ∫ <f_r, dW_r> for a piecewise-constant-in-time
// integrand given at the driver's step times:
//   Σ_m dt Σ_{k in modes} |k|^{-2alpha} |a_k · f̂_m(k)|^2.
// (a_k·f̂ extracts the divergence-free part, so the Leray projection is
// built into the contraction.)
double ito_integral_variance(const NoiseModel& m, const std::vector<VectorField>& f, double dt);

// Covariance operator Q = (-Δ)^{-alpha} Π applied to a mean-free field.
VectorField covariance_apply(const VectorField& v, double alpha);

}  // namespace tnl
