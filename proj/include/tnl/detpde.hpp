#pragma once

#include <limits>
#include <vector>

#include "tnl/control.hpp"
#include "tnl/field.hpp"
#include "tnl/ops.hpp"

namespace tnl {

enum class DriftPreset { zero, shear, taylor_green, custom };

// Time-independent divergence-free drift.  `shear` is the constant field
// amplitude*(1,0); `taylor_green` is the velocity with vorticity
// amplitude*sin(2πx1)sin(2πx2); `custom` takes Fourier coefficients that are
// Leray-projected and symmetrized on construction.  (p,q) integrability
// metadata feeds the rate formulas via gamma = 2/p + 2/q (0 for presets).
struct DriftSpec {
  DriftPreset preset = DriftPreset::zero;
  double amplitude = 1.0;
  struct Coeff {
    int k1, k2;
    cplx cx, cy;
  };
  std::vector<Coeff> custom;
  double p = std::numeric_limits<double>::infinity();
  double q = std::numeric_limits<double>::infinity();
  double gamma() const { return 2.0 / p + 2.0 / q; }
};

VectorField drift_velocity(const DriftSpec& b, const TorusGrid& g);

// Saved states of a solve: times[i] is the simulation time of fields[i].
// stride is the save interval in steps (the final state is always saved).
struct TrajectorySnapshot {
  std::vector<double> times;
  std::vector<SpectralField> fields;
  int stride = 1;

  const SpectralField& back() const { return fields.back(); }
  // index of the saved state at time t (must match a stored time)
  int index_at(double t) const;
};

// Exponential-Euler (integrating factor) steppers, first order in dt.
// All of them: dealias the initial state, pin its mean mode, enforce the
// pathwise L2 budget (abort on blow-up), and honor the CFL bound
// dt <= 0.5 / (2π kmax max|v|) checked against the initial advecting field.

// ∂t f + b·∇f = Δf
TrajectorySnapshot solve_advection_diffusion(const SpectralField& f0, const DriftSpec& b, double T,
                                             double dt, int save_stride = 1);

// 2D vorticity: ∂t ξ + (K*ξ)·∇ξ = Δξ, K*ξ the Biot–Savart velocity.
TrajectorySnapshot solve_nse_vorticity(const SpectralField& xi0, double T, double dt,
                                       int save_stride = 1);

// Controlled transport: ∂t f + (b+g)·∇f = Δf, g piecewise constant in time.
TrajectorySnapshot solve_skeleton_transport(const SpectralField& f0, const DriftSpec& b,
                                            const ControlPath& g, double T, double dt,
                                            int save_stride = 1);

// Controlled Euler: ∂t ξ + (K*ξ + g)·∇ξ = Δξ.
TrajectorySnapshot solve_skeleton_euler(const SpectralField& xi0, const ControlPath& g, double T,
                                        double dt, int save_stride = 1);

// Backward dual propagator S_{tau,t} phi, realized by integrating the
// reversed-time equation ∂s h = Δh + ∇·(b h), h_0 = phi, and reading
// g_t = h_{tau-t}.  Returned snapshot is indexed by the original time t
// (ascending, g at t = tau is phi itself).  The step count is
// round(tau/dt) with the step adjusted to divide tau exactly.
TrajectorySnapshot solve_backward_dual(const SpectralField& phi, const DriftSpec& b, double tau,
                                       double dt, int save_stride = 1);
// Same reversed-time solve with an extra control advecting field.
TrajectorySnapshot solve_backward_dual_controlled(const SpectralField& phi, const DriftSpec& b,
                                                  const ControlPath& g, double tau, double dt,
                                                  int save_stride = 1);

}  // namespace tnl
