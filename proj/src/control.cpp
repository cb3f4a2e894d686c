#include "tnl/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tnl {

int ControlPath::segment(double t) const {
  if (times.empty()) throw std::invalid_argument("control path has no segments");
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;  // t before the first knot: clamp
  return static_cast<int>(it - times.begin()) - 1;
}

void validate_control(const ControlPath& g) {
  if (g.times.size() != g.fields.size()) {
    throw std::invalid_argument("control times and fields have different lengths");
  }
  if (g.times.empty()) throw std::invalid_argument("control path has no segments");
  if (g.times.front() != 0.0) throw std::invalid_argument("control must start at time 0");
  for (size_t i = 1; i < g.times.size(); ++i) {
    if (!(g.times[i] > g.times[i - 1])) {
      throw std::invalid_argument("control knot times must be strictly increasing");
    }
  }
  if (!(g.horizon >= g.times.back())) {
    throw std::invalid_argument("control horizon must cover the last knot");
  }
  for (const auto& f : g.fields) {
    double scale = 0.0;
    for (const auto& c : f.x.c) scale = std::max(scale, std::abs(c));
    for (const auto& c : f.y.c) scale = std::max(scale, std::abs(c));
    if (std::abs(f.x.c[0]) + std::abs(f.y.c[0]) > 1e-12 * std::max(1.0, scale)) {
      throw std::invalid_argument("control fields must have zero mean");
    }
    if (max_divergence(f) > 1e-10 * std::max(1.0, scale)) {
      throw std::invalid_argument("control fields must be divergence-free");
    }
  }
  if (!std::isfinite(rate_cost(g))) throw std::invalid_argument("control cost is not finite");
}

double rate_cost(const ControlPath& g) {
  double cost = 0.0;
  for (size_t m = 0; m < g.fields.size(); ++m) {
    const double t0 = g.times[m];
    const double t1 = (m + 1 < g.times.size()) ? g.times[m + 1] : g.horizon;
    const double norm = sobolev_norm(g.fields[m], g.alpha);
    cost += 0.5 * (t1 - t0) * norm * norm;
  }
  return cost;
}

ControlPath refine_to_steps(const ControlPath& g, int steps) {
  if (steps < 1) throw std::invalid_argument("refinement needs at least one step");
  ControlPath out;
  out.horizon = g.horizon;
  out.alpha = g.alpha;
  const double dt = g.horizon / steps;
  out.times.reserve(steps);
  out.fields.reserve(steps);
  for (int m = 0; m < steps; ++m) {
    const double t = m * dt;
    out.times.push_back(t);
    out.fields.push_back(g.at(t));
  }
  return out;
}

}  // namespace tnl
