#pragma once

#include <vector>

#include "tnl/field.hpp"
#include "tnl/ops.hpp"

namespace tnl {

// Piecewise-constant-in-time control: fields[m] acts on [times[m], times[m+1])
// (left-endpoint convention), the last segment extending to the horizon.
// Each field must be divergence-free with zero mean.
struct ControlPath {
  std::vector<double> times;
  std::vector<VectorField> fields;
  double horizon = 0.0;
  double alpha = 0.5;  // cost is measured in H^alpha

  bool empty() const { return fields.empty(); }
  // index of the segment containing time t
  int segment(double t) const;
  const VectorField& at(double t) const { return fields[segment(t)]; }
};

// Validates the invariants (sorted times starting at 0, matching lengths,
// div-free zero-mean fields, finite cost).
void validate_control(const ControlPath& g);

// (1/2) Σ_m len_m ||g_m||^2_{H^alpha}.  Scales exactly quadratically in the
// control amplitude.
double rate_cost(const ControlPath& g);

// Refine to a uniform step grid (same piecewise-constant function, exact).
ControlPath refine_to_steps(const ControlPath& g, int steps);

}  // namespace tnl
