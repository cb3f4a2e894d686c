#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tnl/control.hpp"
#include "tnl/detpde.hpp"
#include "tnl/noise.hpp"

namespace tnl {

// Penalized rate-functional problem for the controlled transport equation:
//   J(g) = rate_cost(g) + (lambda/2) ||f^g_T - target||^2_{H^{-delta}}.
struct RateProblem {
  SpectralField f0;
  DriftSpec b;
  SpectralField target;  // f*_T
  double T = 0.1;
  double dt = 1e-3;
  double alpha = 0.5;    // control cost index
  double delta = 1.0;    // terminal mismatch index
  double lambda = 1e3;   // > 0
};

struct ControlEvaluation {
  double objective = 0.0;
  double cost = 0.0;
  double mismatch = 0.0;  // ||f^g_T - target||_{H^{-delta}}
};
ControlEvaluation evaluate_control(const RateProblem& prob, const ControlPath& g);

// Same penalized functional with the controlled vorticity equation as the
// forward map (forward evaluation and cost only; no adjoint is provided
// through the nonlinear solver).
ControlEvaluation evaluate_control_euler(const RateProblem& prob, const ControlPath& g);

enum class MinimizeStatus { converged, budget_exhausted, stalled };

struct MinimizeResult {
  ControlPath control;
  double upper_bound = 0.0;  // rate_cost of the final control
  double objective = 0.0;
  double mismatch = 0.0;
  MinimizeStatus status = MinimizeStatus::budget_exhausted;
  int iterations = 0;
  // one row per accepted iterate: {iter, objective, cost, mismatch, step}
  std::vector<std::array<double, 5>> trace;
};

struct MinimizeOptions {
  int max_iters = 200;
  double initial_step = 1.0;
  double armijo_c = 1e-4;
  double min_step = 1e-12;
  double grad_tol = 1e-10;
};

// Adjoint-state descent with Armijo backtracking.  The gradient uses the
// exact discrete transpose of the forward stepper, so it matches central
// finite differences to near roundoff; the objective is nonincreasing by
// construction (worse iterates are rejected), and failure to find descent
// reports `stalled` rather than throwing.
MinimizeResult minimize_rate(const RateProblem& prob, const MinimizeOptions& opt = {});

// Directional-derivative check against central finite differences on a few
// control coordinates; returns the maximum relative error.
double adjoint_fd_check(const RateProblem& prob, const ControlPath& g, int coords,
                        double fd_step, uint64_t seed);

// Deterministic lower-bound diagnostic for a family of controls:
//   ratio(g) = rate_cost(g) ||f0||^2_{L2} / ||f^g - f̄||^2_{C0 H^{-delta}},
// delta > 1.  Controls whose deviation falls below 1e-12 are excluded from
// the sweep (ratio = NaN); min_ratio ranges over the included ones.
struct LowerBoundResult {
  std::vector<double> ratios;  // NaN marks an excluded (too weak) control
  double min_ratio = 0.0;
  int excluded = 0;
};
LowerBoundResult lower_bound_check(const SpectralField& f0, const DriftSpec& b,
                                   const std::vector<ControlPath>& controls, double T, double dt,
                                   double delta);

// Monte-Carlo tail estimate: p̂(n) = P(||f^n - f̄||_{C0 H^{-delta}} >= R)
// over `paths` stochastic transport runs, plus eps_n log p̂ when nontrivial.
struct TailPoint {
  int cutoff = 0;
  double epsilon = 0.0;
  double p_hat = 0.0;
  double eps_log_p = 0.0;  // NaN when p̂ is 0 or 1
  bool degenerate = false; // p̂ hit 0 or 1
};
std::vector<TailPoint> tail_probability_mc(const SpectralField& f0, const DriftSpec& b,
                                           const TorusGrid& g, const std::vector<int>& cutoffs,
                                           double alpha, double T, double dt, double delta,
                                           double R, int paths, uint64_t seed, int threads);

// Replace-the-datum stability sweep: for each mollifier width w, the L2
// distance of the mollified datum and the C0 H^{-1} distance of the two
// controlled trajectories started from f0 and mollify(f0, w).  The trajectory
// deviation should be controlled by the datum deviation (bounded ratio) and
// both should shrink as w does.
struct MollificationRow {
  double width = 0.0;
  double datum_dev = 0.0;  // ||mollify(f0,w) - f0||_{L2}
  double traj_dev = 0.0;   // ||G0(f0^w, g) - G0(f0, g)||_{C0 H^{-1}}
};
std::vector<MollificationRow> mollification_stability(const SpectralField& f0, const DriftSpec& b,
                                                      const ControlPath& g, double T, double dt,
                                                      const std::vector<double>& widths);

}  // namespace tnl
