#include "tnl/detpde.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tnl {
namespace {

struct StepPlan {
  int steps;
  double dt;
};

StepPlan plan_steps(double T, double dt_req) {
  if (!(T > 0.0)) throw std::invalid_argument("time horizon must be positive");
  if (!(dt_req > 0.0)) throw std::invalid_argument("time step must be positive");
  const int steps = static_cast<int>(std::max<long long>(1, std::llround(T / dt_req)));
  return StepPlan{steps, T / steps};
}

double max_speed(const PhysVec& v) {
  double m = 0.0;
  for (size_t i = 0; i < v.x.size(); ++i) {
    m = std::max(m, std::sqrt(v.x[i] * v.x[i] + v.y[i] * v.y[i]));
  }
  return m;
}

void cfl_check(const TorusGrid& g, double maxv, double dt) {
  if (maxv <= 0.0) return;
  const double bound = 0.5 / (2.0 * std::numbers::pi * g.kmax * maxv);
  if (dt > bound) {
    throw std::invalid_argument(
        "time step violates the advective stability bound dt <= 0.5/(2 pi kmax max|v|)");
  }
}

struct Budget {
  double limit;
  explicit Budget(const SpectralField& f0) { limit = 10.0 * (l2_norm(f0) + 1e-14); }
  void check(const SpectralField& f) const {
    if (!(l2_norm(f) <= limit)) {
      throw std::runtime_error("solve aborted: the state exceeded its pathwise L2 budget");
    }
  }
};

struct Saver {
  TrajectorySnapshot snap;
  int stride;
  double dt;
  explicit Saver(int stride_, double dt_, const SpectralField& f0) : stride(stride_), dt(dt_) {
    if (stride < 1) throw std::invalid_argument("save stride must be at least 1");
    snap.stride = stride;
    snap.times.push_back(0.0);
    snap.fields.push_back(f0);
  }
  void maybe_save(int step_done, int total, const SpectralField& f) {
    if (step_done % stride == 0 || step_done == total) {
      snap.times.push_back(step_done * dt);
      snap.fields.push_back(f);
    }
  }
};

SpectralField prepared(const SpectralField& f0) {
  SpectralField f = f0;
  dealias(f);
  hermitian_symmetrize(f);
  return f;
}

void scale_into(const PhysVec& v, double s, PhysVec& out) {
  out.x.resize(v.x.size());
  out.y.resize(v.y.size());
  for (size_t i = 0; i < v.x.size(); ++i) {
    out.x[i] = s * v.x[i];
    out.y[i] = s * v.y[i];
  }
}

}  // namespace

int TrajectorySnapshot::index_at(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(times.empty() ? 0.0 : times.back()));
  for (size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= tol) return static_cast<int>(i);
  }
  throw std::invalid_argument("no saved state at the requested time");
}

TrajectorySnapshot solve_advection_diffusion(const SpectralField& f0, const DriftSpec& b, double T,
                                             double dt, int save_stride) {
  const auto [steps, h] = plan_steps(T, dt);
  const TorusGrid& g = f0.grid;
  SpectralField f = prepared(f0);
  const cplx mean0 = f.c[0];
  const Budget budget(f);
  const auto heat = heat_table(g, h);

  const bool advect = b.preset != DriftPreset::zero;
  PhysVec vs;  // advecting field, pre-scaled by the step
  if (advect) {
    const VectorField v = drift_velocity(b, g);
    const PhysVec vp = to_physical(v);
    cfl_check(g, max_speed(vp), h);
    scale_into(vp, h, vs);
  }

  Saver saver(save_stride, h, f);
  for (int m = 0; m < steps; ++m) {
    if (advect) {
      const SpectralField adv = transport_term_phys(g, vs, f);
      for (size_t i = 0; i < f.c.size(); ++i) f.c[i] -= adv.c[i];
    }
    heat_propagate_inplace(f, heat);
    f.c[0] = mean0;
    budget.check(f);
    saver.maybe_save(m + 1, steps, f);
  }
  return std::move(saver.snap);
}

TrajectorySnapshot solve_nse_vorticity(const SpectralField& xi0, double T, double dt,
                                       int save_stride) {
  const auto [steps, h] = plan_steps(T, dt);
  const TorusGrid& g = xi0.grid;
  SpectralField xi = prepared(xi0);
  const cplx mean0 = xi.c[0];
  const Budget budget(xi);
  const auto heat = heat_table(g, h);

  Saver saver(save_stride, h, xi);
  PhysVec vs;
  for (int m = 0; m < steps; ++m) {
    const VectorField u = biot_savart(xi);
    const PhysVec up = to_physical(u);
    if (m == 0) cfl_check(g, max_speed(up), h);
    scale_into(up, h, vs);
    const SpectralField adv = transport_term_phys(g, vs, xi);
    for (size_t i = 0; i < xi.c.size(); ++i) xi.c[i] -= adv.c[i];
    heat_propagate_inplace(xi, heat);
    xi.c[0] = mean0;
    budget.check(xi);
    saver.maybe_save(m + 1, steps, xi);
  }
  return std::move(saver.snap);
}

TrajectorySnapshot solve_skeleton_transport(const SpectralField& f0, const DriftSpec& b,
                                            const ControlPath& g, double T, double dt,
                                            int save_stride) {
  validate_control(g);
  const auto [steps, h] = plan_steps(T, dt);
  const TorusGrid& grid = f0.grid;
  SpectralField f = prepared(f0);
  const cplx mean0 = f.c[0];
  const Budget budget(f);
  const auto heat = heat_table(grid, h);

  const PhysVec bp = to_physical(drift_velocity(b, grid));
  int cached_seg = -1;
  PhysVec vs;
  vs.x.resize(bp.x.size());
  vs.y.resize(bp.y.size());

  Saver saver(save_stride, h, f);
  for (int m = 0; m < steps; ++m) {
    const int seg = g.segment(m * h);
    if (seg != cached_seg) {
      const PhysVec gp = to_physical(g.fields[seg]);
      for (size_t i = 0; i < vs.x.size(); ++i) {
        vs.x[i] = h * (bp.x[i] + gp.x[i]);
        vs.y[i] = h * (bp.y[i] + gp.y[i]);
      }
      if (m == 0) cfl_check(grid, max_speed(vs) / h, h);
      cached_seg = seg;
    }
    const SpectralField adv = transport_term_phys(grid, vs, f);
    for (size_t i = 0; i < f.c.size(); ++i) f.c[i] -= adv.c[i];
    heat_propagate_inplace(f, heat);
    f.c[0] = mean0;
    budget.check(f);
    saver.maybe_save(m + 1, steps, f);
  }
  return std::move(saver.snap);
}

TrajectorySnapshot solve_skeleton_euler(const SpectralField& xi0, const ControlPath& g, double T,
                                        double dt, int save_stride) {
  validate_control(g);
  const auto [steps, h] = plan_steps(T, dt);
  const TorusGrid& grid = xi0.grid;
  SpectralField xi = prepared(xi0);
  const cplx mean0 = xi.c[0];
  const Budget budget(xi);
  const auto heat = heat_table(grid, h);

  int cached_seg = -1;
  PhysVec gp;
  PhysVec vs;
  Saver saver(save_stride, h, xi);
  for (int m = 0; m < steps; ++m) {
    const int seg = g.segment(m * h);
    if (seg != cached_seg) {
      gp = to_physical(g.fields[seg]);
      cached_seg = seg;
    }
    const VectorField u = biot_savart(xi);
    const PhysVec up = to_physical(u);
    vs.x.resize(up.x.size());
    vs.y.resize(up.y.size());
    for (size_t i = 0; i < vs.x.size(); ++i) {
      vs.x[i] = h * (up.x[i] + gp.x[i]);
      vs.y[i] = h * (up.y[i] + gp.y[i]);
    }
    if (m == 0) cfl_check(grid, max_speed(vs) / h, h);
    const SpectralField adv = transport_term_phys(grid, vs, xi);
    for (size_t i = 0; i < xi.c.size(); ++i) xi.c[i] -= adv.c[i];
    heat_propagate_inplace(xi, heat);
    xi.c[0] = mean0;
    budget.check(xi);
    saver.maybe_save(m + 1, steps, xi);
  }
  return std::move(saver.snap);
}

namespace {

TrajectorySnapshot backward_dual_impl(const SpectralField& phi, const DriftSpec& b,
                                      const ControlPath* g, double tau, double dt,
                                      int save_stride) {
  const auto [steps, h] = plan_steps(tau, dt);
  const TorusGrid& grid = phi.grid;
  SpectralField hstate = prepared(phi);
  const cplx mean0 = hstate.c[0];
  const Budget budget(hstate);
  const auto heat = heat_table(grid, h);

  const PhysVec bp = to_physical(drift_velocity(b, grid));
  cfl_check(grid, max_speed(bp), h);

  // march in the reversed time s; collect saves, then flip to forward time
  TrajectorySnapshot rev;
  rev.stride = save_stride;
  if (save_stride < 1) throw std::invalid_argument("save stride must be at least 1");
  rev.times.push_back(0.0);
  rev.fields.push_back(hstate);

  int cached_seg = -1;
  PhysVec vs;
  vs.x.resize(bp.x.size());
  vs.y.resize(bp.y.size());
  if (g == nullptr) {
    scale_into(bp, h, vs);
  }
  for (int m = 0; m < steps; ++m) {
    if (g != nullptr) {
      // the h-step from s=mh covers forward times [tau-(m+1)h, tau-mh]
      const double tf = std::max(0.0, tau - (m + 1) * h);
      const int seg = g->segment(tf);
      if (seg != cached_seg) {
        const PhysVec gp = to_physical(g->fields[seg]);
        for (size_t i = 0; i < vs.x.size(); ++i) {
          vs.x[i] = h * (bp.x[i] + gp.x[i]);
          vs.y[i] = h * (bp.y[i] + gp.y[i]);
        }
        cached_seg = seg;
      }
    }
    const SpectralField div = divergence_form_term_phys(grid, vs, hstate);
    for (size_t i = 0; i < hstate.c.size(); ++i) hstate.c[i] += div.c[i];
    heat_propagate_inplace(hstate, heat);
    hstate.c[0] = mean0;
    budget.check(hstate);
    if ((m + 1) % save_stride == 0 || m + 1 == steps) {
      rev.times.push_back((m + 1) * h);
      rev.fields.push_back(hstate);
    }
  }

  TrajectorySnapshot out;
  out.stride = save_stride;
  const size_t count = rev.times.size();
  out.times.resize(count);
  out.fields.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    const size_t j = count - 1 - i;
    out.times[i] = tau - rev.times[j];
    out.fields.push_back(std::move(rev.fields[j]));
  }
  out.times.front() = 0.0;  // tau - tau, kept exact
  return out;
}

}  // namespace

TrajectorySnapshot solve_backward_dual(const SpectralField& phi, const DriftSpec& b, double tau,
                                       double dt, int save_stride) {
  return backward_dual_impl(phi, b, nullptr, tau, dt, save_stride);
}

TrajectorySnapshot solve_backward_dual_controlled(const SpectralField& phi, const DriftSpec& b,
                                                  const ControlPath& g, double tau, double dt,
                                                  int save_stride) {
  validate_control(g);
  return backward_dual_impl(phi, b, &g, tau, dt, save_stride);
}

}  // namespace tnl
