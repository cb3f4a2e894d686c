#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tnl/detpde.hpp"
#include "tnl/noise.hpp"

namespace tnl {

// One stochastic solve.  The noise model's top mode must be resolvable on the
// grid (max_mode <= kmax).  noise_amplitude multiplies sqrt(epsilon); 0
// switches the noise off entirely (the solver then matches its deterministic
// counterpart coefficient-by-coefficient).
struct StochasticRunConfig {
  TorusGrid grid;
  double T = 0.1;
  double dt = 1e-3;
  NoiseModel noise;
  uint64_t seed = 0;
  int save_stride = 1;
  double noise_amplitude = 1.0;
  // Pathwise L2 budget: the exact dynamics never increase the L2 norm, so a
  // single step growing it by more than this factor (or the state ever
  // exceeding 10x its initial norm) aborts the path as numerically broken.
  // Small-window runs take legitimate O(dt * ||grad f||^2/||f||^2) upward
  // noise kicks with heavy chi-square tails, so the default is loose; genuine
  // instability compounds geometrically and still trips it within a few steps.
  double step_growth_tol = 0.5;
};

void validate_run_config(const StochasticRunConfig& cfg);

// df = Δf dt - b·∇f dt - sqrt(eps) dW·∇f  (Ito, left-endpoint noise)
TrajectorySnapshot run_stochastic_transport(const SpectralField& f0, const DriftSpec& b,
                                            const StochasticRunConfig& cfg);

// dξ = Δξ dt - (K*ξ)·∇ξ dt - sqrt(eps) dW·∇ξ
TrajectorySnapshot run_stochastic_euler(const SpectralField& xi0, const StochasticRunConfig& cfg);

// Transport fluctuation field:
//   dX = (ΔX - b·∇X) dt - dW·∇f̄,  X_0 = 0,
// driven by the full resolvable spectrum (all modes up to the grid's dealias
// cutoff), no sqrt(eps).  fbar must be the stride-1 limit trajectory on the
// same grid and time mesh.
TrajectorySnapshot run_fluctuation_transport(const StochasticRunConfig& cfg,
                                             const TrajectorySnapshot& fbar, const DriftSpec& b);

// Euler fluctuation field:
//   dΞ = (ΔΞ - (K*Ξ)·∇ξ̄ - (K*ξ̄)·∇Ξ) dt - dW·∇ξ̄,  Ξ_0 = 0.
// with_transport=false drops both deterministic transport terms, leaving
// exactly the negative of the stochastic convolution below.
TrajectorySnapshot run_fluctuation_euler(const StochasticRunConfig& cfg,
                                         const TrajectorySnapshot& xibar,
                                         bool with_transport = true);

// Z_{m+1} = P_dt (Z_m + ΔW_m·∇ξ̄_m), Z_0 = 0 — the mild-form stochastic
// convolution of dW·∇ξ̄ against the heat semigroup.
TrajectorySnapshot stochastic_convolution(const StochasticRunConfig& cfg,
                                          const TrajectorySnapshot& xibar);

// Precomputed per-step physical-space data of the limit trajectory shared
// read-only by every path of a coupled run.
struct LimitCache {
  std::vector<PhysVec> grad;      // ∇f̄ at each step time (physical)
  std::vector<PhysVec> velocity;  // K*ξ̄ at each step (Euler only)
  const TrajectorySnapshot* traj = nullptr;
};
LimitCache build_limit_cache(const TrajectorySnapshot& limit, bool with_velocity);

// One coupled path: the finite-n field, its fluctuation comparison and error
// records at save times.  clt_error = ||(field^n - limit)/sqrt(eps) - fluct||_{H^{-s}},
// lln_error = ||field^n - limit||_{H^{-delta}}.
struct CoupledPath {
  std::vector<double> times;
  std::vector<double> clt_error;
  std::vector<double> lln_error;
  std::vector<double> martingale_sq;  // ||M_t||^2_{H^{-beta_diag}} at saves
  cplx fluct_coeff_10;                // <fluctuation_T, e_{(1,0)}> sample
  cplx field_coeff_10;
  double scaled_diff_hneg2 = 0.0;     // ||(field_T-limit_T)/sqrt(eps)||_{H^{-2}}
  bool aborted = false;
};

struct CoupledOptions {
  double s_clt = 1.0;        // H^{-s} for the CLT error
  double delta_lln = 1.0;    // H^{-delta} for the LLN error
  bool with_fluctuation = true;
  double beta_diag = 3.0;    // martingale diagnostic norm index
  bool record_martingale = false;
};

// Transport: co-evolves f^n (window-restricted noise, sqrt(eps) scaling) and
// X (full-spectrum driver) on one Brownian driver.
CoupledPath run_coupled_transport(const SpectralField& f0, const DriftSpec& b,
                                  const StochasticRunConfig& cfg, const LimitCache& limit,
                                  const CoupledOptions& opt);

// Euler: co-evolves ξ^n and Ξ on one driver.
CoupledPath run_coupled_euler(const SpectralField& xi0, const StochasticRunConfig& cfg,
                              const LimitCache& limit, const CoupledOptions& opt);

}  // namespace tnl
