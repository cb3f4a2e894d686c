#include "tnl/spde.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "tnl/rng.hpp"

namespace tnl {
namespace {

// The driver hands out complex increments with E|ΔB|^2 = dt.  The Itô form of
// the transport SPDEs needs the noise's quadratic variation to regenerate the
// full Laplacian (that is what makes the Stratonovich flow measure-preserving
// and the L2 budget hold), which under this driver convention requires the
// physical noise term to carry an extra amplitude sqrt(2).
constexpr double kItoAmp = 1.4142135623730951;  // sqrt(2)

uint64_t mode_key(int k1, int k2) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(k1)) << 32) |
         static_cast<uint64_t>(static_cast<uint32_t>(k2));
}

// Per-path noise sampler: the per-mode streams are fixed by (seed, k) only, so
// it reproduces BrownianDriver::increment / sample_noise_increment_at exactly.
struct NoiseSampler {
  struct Entry {
    int k1, k2;
    int idx_p, idx_m;
    double w_over_r;
    uint64_t stream;
  };
  std::vector<Entry> entries;

  NoiseSampler(const NoiseModel& m, const TorusGrid& g, uint64_t seed) {
    if (m.max_mode() > g.kmax) {
      throw std::invalid_argument("noise modes would cross the dealiasing cutoff of this grid");
    }
    for (const auto& mode : m.modes) {
      if (!mode.plus_lattice) continue;
      Entry e;
      e.k1 = mode.k1;
      e.k2 = mode.k2;
      e.idx_p = g.index(mode.k1, mode.k2);
      e.idx_m = g.index(-mode.k1, -mode.k2);
      const double r = std::sqrt(static_cast<double>(mode.k1) * mode.k1 +
                                 static_cast<double>(mode.k2) * mode.k2);
      e.w_over_r = mode.weight / r;
      e.stream = derive_seed(seed, mode_key(mode.k1, mode.k2));
      entries.push_back(e);
    }
  }

  void sample(long step, double dt, VectorField& out) const {
    std::memset(out.x.c.data(), 0, out.x.c.size() * sizeof(cplx));
    std::memset(out.y.c.data(), 0, out.y.c.size() * sizeof(cplx));
    const double s = std::sqrt(0.5 * dt);
    for (const auto& e : entries) {
      const GaussPair z = gauss_at(e.stream, static_cast<uint64_t>(step));
      const cplx dkr(mask_low_bits((s * z.z0) * e.w_over_r, 16),
                     mask_low_bits((s * z.z1) * e.w_over_r, 16));
      out.x.c[e.idx_p] = -static_cast<double>(e.k2) * dkr;
      out.y.c[e.idx_p] = static_cast<double>(e.k1) * dkr;
      out.x.c[e.idx_m] = std::conj(out.x.c[e.idx_p]);
      out.y.c[e.idx_m] = std::conj(out.y.c[e.idx_p]);
    }
    out.divergence_free = true;
  }
};

std::vector<cplx>& sbuf(int which, size_t size) {
  thread_local std::vector<cplx> bufs[4];
  auto& b = bufs[which];
  if (b.size() < size) b.resize(size);
  return b;
}

// (v·∇f̄) from physical velocity samples and a precomputed physical gradient:
// one forward transform.
SpectralField advect_with_grad(const TorusGrid& g, const PhysVec& v, const PhysVec& grad) {
  const int sz = g.size();
  auto& prod = sbuf(0, sz);
  for (int i = 0; i < sz; ++i) {
    prod[i] = cplx(v.x[i] * grad.x[i] + v.y[i] * grad.y[i], 0.0);
  }
  SpectralField out(g);
  fft::forward(g, prod.data(), out.c.data());
  dealias(out);
  hermitian_symmetrize(out);
  return out;
}

SpectralField prepared(const SpectralField& f0) {
  SpectralField f = f0;
  dealias(f);
  hermitian_symmetrize(f);
  return f;
}

// Per-step monotonicity guard: the exact dynamics never increase the L2 norm
// (advection conserves it, diffusion shrinks it), so any single step growing
// the norm past the configured tolerance — or the state ever reaching 10x its
// initial size — marks a numerically broken path.
struct PathBudget {
  double prev;
  double factor;
  double hard_cap;
  explicit PathBudget(double norm0, double tol)
      : prev(norm0), factor(1.0 + tol), hard_cap(10.0 * (norm0 + 1e-14)) {}
  void check(const SpectralField& f) {
    const double norm = l2_norm(f);
    if (!(norm <= prev * factor + 1e-14) || !(norm <= hard_cap)) {
      throw std::runtime_error("path aborted: the state left its pathwise L2 budget");
    }
    prev = norm;
  }
};

int plan_steps(const StochasticRunConfig& cfg) {
  return static_cast<int>(std::max<long long>(1, std::llround(cfg.T / cfg.dt)));
}

void require_mesh(const StochasticRunConfig& cfg, const TrajectorySnapshot& limit, int steps,
                  double dt) {
  if (limit.stride != 1 || static_cast<int>(limit.fields.size()) != steps + 1) {
    throw std::invalid_argument(
        "the limit trajectory must be saved at every step of the same time mesh");
  }
  if (std::abs(limit.times.back() - cfg.T) > 1e-9 * std::max(1.0, cfg.T) ||
      (steps > 1 && std::abs(limit.times[1] - dt) > 1e-12)) {
    throw std::invalid_argument(
        "the limit trajectory must be saved at every step of the same time mesh");
  }
  if (!(limit.fields.front().grid == cfg.grid)) {
    throw std::invalid_argument("the limit trajectory lives on a different grid");
  }
}

}  // namespace

void validate_run_config(const StochasticRunConfig& cfg) {
  if (!(cfg.T > 0.0) || !(cfg.dt > 0.0)) {
    throw std::invalid_argument("stochastic run needs positive T and dt");
  }
  if (cfg.save_stride < 1) throw std::invalid_argument("save stride must be at least 1");
  if (cfg.noise.modes.empty()) throw std::invalid_argument("stochastic run needs a noise model");
  if (cfg.noise.max_mode() > cfg.grid.kmax) {
    throw std::invalid_argument("noise modes would cross the dealiasing cutoff of this grid");
  }
  if (cfg.noise_amplitude < 0.0) {
    throw std::invalid_argument("noise amplitude must be nonnegative");
  }
}

TrajectorySnapshot run_stochastic_transport(const SpectralField& f0, const DriftSpec& b,
                                            const StochasticRunConfig& cfg) {
  validate_run_config(cfg);
  const TorusGrid& g = cfg.grid;
  if (!(f0.grid == g)) throw std::invalid_argument("initial state lives on a different grid");
  const int steps = plan_steps(cfg);
  const double dt = cfg.T / steps;

  SpectralField f = prepared(f0);
  const cplx mean0 = f.c[0];
  PathBudget budget(l2_norm(f), cfg.step_growth_tol);
  const auto heat = heat_table(g, dt);
  const bool noise_on = cfg.noise_amplitude > 0.0;
  const double c_n = cfg.noise_amplitude * kItoAmp * std::sqrt(cfg.noise.epsilon);

  const PhysVec bp = to_physical(drift_velocity(b, g));
  const bool advect_b = b.preset != DriftPreset::zero;

  NoiseSampler sampler(cfg.noise, g, cfg.seed);
  VectorField dw(g);
  PhysVec dwp;
  PhysVec veff;
  veff.x.resize(g.size());
  veff.y.resize(g.size());
  if (!noise_on) {
    for (int i = 0; i < g.size(); ++i) {
      veff.x[i] = dt * bp.x[i];
      veff.y[i] = dt * bp.y[i];
    }
  }

  TrajectorySnapshot snap;
  snap.stride = cfg.save_stride;
  snap.times.push_back(0.0);
  snap.fields.push_back(f);
  for (int m = 0; m < steps; ++m) {
    if (noise_on) {
      sampler.sample(m, dt, dw);
      dwp = to_physical(dw);
      for (int i = 0; i < g.size(); ++i) {
        veff.x[i] = dt * bp.x[i] + c_n * dwp.x[i];
        veff.y[i] = dt * bp.y[i] + c_n * dwp.y[i];
      }
    }
    if (noise_on || advect_b) {
      const SpectralField adv = transport_term_phys(g, veff, f);
      for (size_t i = 0; i < f.c.size(); ++i) f.c[i] -= adv.c[i];
    }
    heat_propagate_inplace(f, heat);
    f.c[0] = mean0;
    budget.check(f);
    if ((m + 1) % cfg.save_stride == 0 || m + 1 == steps) {
      snap.times.push_back((m + 1) * dt);
      snap.fields.push_back(f);
    }
  }
  return snap;
}

TrajectorySnapshot run_stochastic_euler(const SpectralField& xi0, const StochasticRunConfig& cfg) {
  validate_run_config(cfg);
  const TorusGrid& g = cfg.grid;
  if (!(xi0.grid == g)) throw std::invalid_argument("initial state lives on a different grid");
  const int steps = plan_steps(cfg);
  const double dt = cfg.T / steps;

  SpectralField xi = prepared(xi0);
  const cplx mean0 = xi.c[0];
  PathBudget budget(l2_norm(xi), cfg.step_growth_tol);
  const auto heat = heat_table(g, dt);
  const bool noise_on = cfg.noise_amplitude > 0.0;
  const double c_n = cfg.noise_amplitude * kItoAmp * std::sqrt(cfg.noise.epsilon);

  NoiseSampler sampler(cfg.noise, g, cfg.seed);
  VectorField dw(g);
  PhysVec dwp;
  PhysVec veff;
  veff.x.resize(g.size());
  veff.y.resize(g.size());

  TrajectorySnapshot snap;
  snap.stride = cfg.save_stride;
  snap.times.push_back(0.0);
  snap.fields.push_back(xi);
  for (int m = 0; m < steps; ++m) {
    const VectorField u = biot_savart(xi);
    const PhysVec up = to_physical(u);
    if (noise_on) {
      sampler.sample(m, dt, dw);
      dwp = to_physical(dw);
      for (int i = 0; i < g.size(); ++i) {
        veff.x[i] = dt * up.x[i] + c_n * dwp.x[i];
        veff.y[i] = dt * up.y[i] + c_n * dwp.y[i];
      }
    } else {
      for (int i = 0; i < g.size(); ++i) {
        veff.x[i] = dt * up.x[i];
        veff.y[i] = dt * up.y[i];
      }
    }
    const SpectralField adv = transport_term_phys(g, veff, xi);
    for (size_t i = 0; i < xi.c.size(); ++i) xi.c[i] -= adv.c[i];
    heat_propagate_inplace(xi, heat);
    xi.c[0] = mean0;
    budget.check(xi);
    if ((m + 1) % cfg.save_stride == 0 || m + 1 == steps) {
      snap.times.push_back((m + 1) * dt);
      snap.fields.push_back(xi);
    }
  }
  return snap;
}

LimitCache build_limit_cache(const TrajectorySnapshot& limit, bool with_velocity) {
  LimitCache cache;
  cache.traj = &limit;
  const size_t steps = limit.fields.size() - 1;
  cache.grad.reserve(steps);
  if (with_velocity) cache.velocity.reserve(steps);
  for (size_t m = 0; m < steps; ++m) {
    cache.grad.push_back(to_physical(gradient(limit.fields[m])));
    if (with_velocity) {
      cache.velocity.push_back(to_physical(biot_savart(limit.fields[m])));
    }
  }
  return cache;
}

TrajectorySnapshot run_fluctuation_transport(const StochasticRunConfig& cfg,
                                             const TrajectorySnapshot& fbar, const DriftSpec& b) {
  validate_run_config(cfg);
  const TorusGrid& g = cfg.grid;
  const int steps = plan_steps(cfg);
  const double dt = cfg.T / steps;
  require_mesh(cfg, fbar, steps, dt);

  // the discrete stand-in for the untruncated driving noise: every mode the
  // grid resolves below the dealias cutoff, same radial weights
  const NoiseModel full = build_noise_model(cfg.noise.alpha, g.kmax, NoiseWindow::lowpass);
  NoiseSampler sampler(full, g, cfg.seed);
  const double c_x = cfg.noise_amplitude * kItoAmp;

  SpectralField X(g);
  const auto heat = heat_table(g, dt);
  const PhysVec bp = to_physical(drift_velocity(b, g));
  const bool advect_b = b.preset != DriftPreset::zero;
  PhysVec bscaled;
  bscaled.x.resize(g.size());
  bscaled.y.resize(g.size());
  for (int i = 0; i < g.size(); ++i) {
    bscaled.x[i] = dt * bp.x[i];
    bscaled.y[i] = dt * bp.y[i];
  }

  VectorField dw(g);
  TrajectorySnapshot snap;
  snap.stride = cfg.save_stride;
  snap.times.push_back(0.0);
  snap.fields.push_back(X);
  PhysVec grad_m;
  for (int m = 0; m < steps; ++m) {
    sampler.sample(m, dt, dw);
    PhysVec dwp = to_physical(dw);
    for (int i = 0; i < g.size(); ++i) {
      dwp.x[i] *= c_x;
      dwp.y[i] *= c_x;
    }
    grad_m = to_physical(gradient(fbar.fields[m]));
    const SpectralField force = advect_with_grad(g, dwp, grad_m);
    if (advect_b) {
      const SpectralField tr = transport_term_phys(g, bscaled, X);
      for (size_t i = 0; i < X.c.size(); ++i) X.c[i] -= tr.c[i] + force.c[i];
    } else {
      for (size_t i = 0; i < X.c.size(); ++i) X.c[i] -= force.c[i];
    }
    heat_propagate_inplace(X, heat);
    X.c[0] = cplx(0.0, 0.0);
    if ((m + 1) % cfg.save_stride == 0 || m + 1 == steps) {
      snap.times.push_back((m + 1) * dt);
      snap.fields.push_back(X);
    }
  }
  return snap;
}

namespace {

// Shared core of the Euler fluctuation equation and the stochastic
// convolution: sign = -1 steps dΞ = [ΔΞ - transport]dt - dW·∇ξ̄, sign = +1
// steps dZ = ΔZ dt + dW·∇ξ̄.
TrajectorySnapshot euler_fluctuation_impl(const StochasticRunConfig& cfg,
                                          const TrajectorySnapshot& xibar, bool with_transport,
                                          double sign) {
  validate_run_config(cfg);
  const TorusGrid& g = cfg.grid;
  const int steps = plan_steps(cfg);
  const double dt = cfg.T / steps;
  require_mesh(cfg, xibar, steps, dt);

  const NoiseModel full = build_noise_model(cfg.noise.alpha, g.kmax, NoiseWindow::lowpass);
  NoiseSampler sampler(full, g, cfg.seed);
  const double c_x = cfg.noise_amplitude * kItoAmp;

  SpectralField Xi(g);
  const auto heat = heat_table(g, dt);
  VectorField dw(g);
  PhysVec weff;
  weff.x.resize(g.size());
  weff.y.resize(g.size());
  PhysVec vbar;
  vbar.x.resize(g.size());
  vbar.y.resize(g.size());

  TrajectorySnapshot snap;
  snap.stride = cfg.save_stride;
  snap.times.push_back(0.0);
  snap.fields.push_back(Xi);
  for (int m = 0; m < steps; ++m) {
    sampler.sample(m, dt, dw);
    const PhysVec dwp = to_physical(dw);
    const PhysVec grad_m = to_physical(gradient(xibar.fields[m]));
    if (with_transport) {
      const PhysVec uXi = to_physical(biot_savart(Xi));
      for (int i = 0; i < g.size(); ++i) {
        weff.x[i] = dt * uXi.x[i] + c_x * dwp.x[i];
        weff.y[i] = dt * uXi.y[i] + c_x * dwp.y[i];
      }
    } else {
      for (int i = 0; i < g.size(); ++i) {
        weff.x[i] = c_x * dwp.x[i];
        weff.y[i] = c_x * dwp.y[i];
      }
    }
    const SpectralField force = advect_with_grad(g, weff, grad_m);
    if (with_transport) {
      const PhysVec ubar = to_physical(biot_savart(xibar.fields[m]));
      for (int i = 0; i < g.size(); ++i) {
        vbar.x[i] = dt * ubar.x[i];
        vbar.y[i] = dt * ubar.y[i];
      }
      const SpectralField tr = transport_term_phys(g, vbar, Xi);
      for (size_t i = 0; i < Xi.c.size(); ++i) Xi.c[i] += sign * force.c[i] - tr.c[i];
    } else {
      for (size_t i = 0; i < Xi.c.size(); ++i) Xi.c[i] += sign * force.c[i];
    }
    heat_propagate_inplace(Xi, heat);
    Xi.c[0] = cplx(0.0, 0.0);
    if ((m + 1) % cfg.save_stride == 0 || m + 1 == steps) {
      snap.times.push_back((m + 1) * dt);
      snap.fields.push_back(Xi);
    }
  }
  return snap;
}

}  // namespace

TrajectorySnapshot run_fluctuation_euler(const StochasticRunConfig& cfg,
                                         const TrajectorySnapshot& xibar, bool with_transport) {
  return euler_fluctuation_impl(cfg, xibar, with_transport, -1.0);
}

TrajectorySnapshot stochastic_convolution(const StochasticRunConfig& cfg,
                                          const TrajectorySnapshot& xibar) {
  return euler_fluctuation_impl(cfg, xibar, false, +1.0);
}

namespace {

struct ErrorRecorder {
  const StochasticRunConfig* cfg;
  const LimitCache* limit;
  const CoupledOptions* opt;
  double inv_scale;  // 1/(amp sqrt(eps)) or 0 when the noise is off
  CoupledPath path;

  void record(int step_done, int steps, double dt, const SpectralField& f,
              const SpectralField* fluct, const SpectralField& macc) {
    if (step_done % cfg->save_stride != 0 && step_done != steps) return;
    const SpectralField& lim = limit->traj->fields[step_done];
    SpectralField diff(f.grid);
    for (size_t i = 0; i < f.c.size(); ++i) diff.c[i] = (f.c[i] - lim.c[i]) * inv_scale;
    path.times.push_back(step_done * dt);
    path.lln_error.push_back(sobolev_norm_diff(f, lim, -opt->delta_lln));
    if (fluct != nullptr) {
      SpectralField resid(f.grid);
      for (size_t i = 0; i < f.c.size(); ++i) resid.c[i] = diff.c[i] - fluct->c[i];
      path.clt_error.push_back(sobolev_norm(resid, -opt->s_clt));
    } else {
      path.clt_error.push_back(sobolev_norm(diff, -opt->s_clt));
    }
    if (opt->record_martingale) {
      const double nm = sobolev_norm(macc, -opt->beta_diag);
      path.martingale_sq.push_back(nm * nm);
    }
    if (step_done == steps) {
      path.scaled_diff_hneg2 = sobolev_norm(diff, -2.0);
      path.field_coeff_10 = f.c[f.grid.index(1, 0)];
      if (fluct != nullptr) path.fluct_coeff_10 = fluct->c[f.grid.index(1, 0)];
    }
  }

  static double sobolev_norm_diff(const SpectralField& a, const SpectralField& b, double s) {
    SpectralField d(a.grid);
    for (size_t i = 0; i < a.c.size(); ++i) d.c[i] = a.c[i] - b.c[i];
    return sobolev_norm(d, s);
  }
};

}  // namespace

CoupledPath run_coupled_transport(const SpectralField& f0, const DriftSpec& b,
                                  const StochasticRunConfig& cfg, const LimitCache& limit,
                                  const CoupledOptions& opt) {
  validate_run_config(cfg);
  const TorusGrid& g = cfg.grid;
  const int steps = plan_steps(cfg);
  const double dt = cfg.T / steps;
  require_mesh(cfg, *limit.traj, steps, dt);
  if (static_cast<int>(limit.grad.size()) != steps) {
    throw std::invalid_argument("limit cache does not cover every step");
  }

  SpectralField f = prepared(f0);
  SpectralField X(g);
  SpectralField macc(g);
  const cplx mean0 = f.c[0];
  PathBudget budget(l2_norm(f), cfg.step_growth_tol);
  const auto heat = heat_table(g, dt);

  const bool noise_on = cfg.noise_amplitude > 0.0;
  const double c_n = cfg.noise_amplitude * kItoAmp * std::sqrt(cfg.noise.epsilon);
  const double c_x = cfg.noise_amplitude * kItoAmp;

  const NoiseModel full = build_noise_model(cfg.noise.alpha, g.kmax, NoiseWindow::lowpass);
  NoiseSampler full_sampler(full, g, cfg.seed);
  ErrorRecorder rec;
  rec.cfg = &cfg;
  rec.limit = &limit;
  rec.opt = &opt;
  rec.inv_scale = noise_on ? 1.0 / (cfg.noise_amplitude * std::sqrt(cfg.noise.epsilon)) : 0.0;

  std::vector<int> window_idx;
  for (const auto& mode : cfg.noise.modes) window_idx.push_back(g.index(mode.k1, mode.k2));

  const PhysVec bp = to_physical(drift_velocity(b, g));
  const bool advect_b = b.preset != DriftPreset::zero;
  PhysVec bscaled;
  bscaled.x.resize(g.size());
  bscaled.y.resize(g.size());
  for (int i = 0; i < g.size(); ++i) {
    bscaled.x[i] = dt * bp.x[i];
    bscaled.y[i] = dt * bp.y[i];
  }

  VectorField dw_full(g);
  VectorField dw_n(g);
  PhysVec veff;
  veff.x.resize(g.size());
  veff.y.resize(g.size());
  PhysVec dwxp;

  rec.record(0, steps, dt, f, opt.with_fluctuation ? &X : nullptr, macc);
  for (int m = 0; m < steps; ++m) {
    if (noise_on) {
      full_sampler.sample(m, dt, dw_full);
      for (int idx : window_idx) {
        dw_n.x.c[idx] = dw_full.x.c[idx];
        dw_n.y.c[idx] = dw_full.y.c[idx];
      }
      const PhysVec dwnp = to_physical(dw_n);
      for (int i = 0; i < g.size(); ++i) {
        veff.x[i] = dt * bp.x[i] + c_n * dwnp.x[i];
        veff.y[i] = dt * bp.y[i] + c_n * dwnp.y[i];
      }
    } else {
      for (int i = 0; i < g.size(); ++i) {
        veff.x[i] = dt * bp.x[i];
        veff.y[i] = dt * bp.y[i];
      }
    }

    SpectralField adv(g);
    if (noise_on || advect_b) adv = transport_term_phys(g, veff, f);

    if (opt.record_martingale) {
      // split off the deterministic part to accumulate the noise martingale
      SpectralField advb(g);
      if (advect_b) advb = transport_term_phys(g, bscaled, f);
      for (size_t i = 0; i < macc.c.size(); ++i) macc.c[i] += advb.c[i] - adv.c[i];
    }

    if (opt.with_fluctuation && noise_on) {
      dwxp = to_physical(dw_full);
      for (int i = 0; i < g.size(); ++i) {
        dwxp.x[i] *= c_x;
        dwxp.y[i] *= c_x;
      }
      const SpectralField force = advect_with_grad(g, dwxp, limit.grad[m]);
      if (advect_b) {
        const SpectralField tr = transport_term_phys(g, bscaled, X);
        for (size_t i = 0; i < X.c.size(); ++i) X.c[i] -= tr.c[i] + force.c[i];
      } else {
        for (size_t i = 0; i < X.c.size(); ++i) X.c[i] -= force.c[i];
      }
      heat_propagate_inplace(X, heat);
      X.c[0] = cplx(0.0, 0.0);
    }

    if (noise_on || advect_b) {
      for (size_t i = 0; i < f.c.size(); ++i) f.c[i] -= adv.c[i];
    }
    heat_propagate_inplace(f, heat);
    f.c[0] = mean0;
    budget.check(f);

    rec.record(m + 1, steps, dt, f, opt.with_fluctuation ? &X : nullptr, macc);
  }
  return std::move(rec.path);
}

CoupledPath run_coupled_euler(const SpectralField& xi0, const StochasticRunConfig& cfg,
                              const LimitCache& limit, const CoupledOptions& opt) {
  validate_run_config(cfg);
  const TorusGrid& g = cfg.grid;
  const int steps = plan_steps(cfg);
  const double dt = cfg.T / steps;
  require_mesh(cfg, *limit.traj, steps, dt);
  if (static_cast<int>(limit.grad.size()) != steps ||
      static_cast<int>(limit.velocity.size()) != steps) {
    throw std::invalid_argument("limit cache does not cover every step (needs velocities)");
  }

  SpectralField xi = prepared(xi0);
  SpectralField Xi(g);
  SpectralField macc(g);
  const cplx mean0 = xi.c[0];
  PathBudget budget(l2_norm(xi), cfg.step_growth_tol);
  const auto heat = heat_table(g, dt);

  const bool noise_on = cfg.noise_amplitude > 0.0;
  const double c_n = cfg.noise_amplitude * kItoAmp * std::sqrt(cfg.noise.epsilon);
  const double c_x = cfg.noise_amplitude * kItoAmp;

  const NoiseModel full = build_noise_model(cfg.noise.alpha, g.kmax, NoiseWindow::lowpass);
  NoiseSampler full_sampler(full, g, cfg.seed);
  std::vector<int> window_idx;
  for (const auto& mode : cfg.noise.modes) window_idx.push_back(g.index(mode.k1, mode.k2));

  ErrorRecorder rec;
  rec.cfg = &cfg;
  rec.limit = &limit;
  rec.opt = &opt;
  rec.inv_scale = noise_on ? 1.0 / (cfg.noise_amplitude * std::sqrt(cfg.noise.epsilon)) : 0.0;

  VectorField dw_full(g);
  VectorField dw_n(g);
  PhysVec veff, weff, vbar;
  veff.x.resize(g.size());
  veff.y.resize(g.size());
  weff.x.resize(g.size());
  weff.y.resize(g.size());
  vbar.x.resize(g.size());
  vbar.y.resize(g.size());

  rec.record(0, steps, dt, xi, opt.with_fluctuation ? &Xi : nullptr, macc);
  for (int m = 0; m < steps; ++m) {
    const PhysVec up = to_physical(biot_savart(xi));
    if (noise_on) {
      full_sampler.sample(m, dt, dw_full);
      for (int idx : window_idx) {
        dw_n.x.c[idx] = dw_full.x.c[idx];
        dw_n.y.c[idx] = dw_full.y.c[idx];
      }
      const PhysVec dwnp = to_physical(dw_n);
      for (int i = 0; i < g.size(); ++i) {
        veff.x[i] = dt * up.x[i] + c_n * dwnp.x[i];
        veff.y[i] = dt * up.y[i] + c_n * dwnp.y[i];
      }
    } else {
      for (int i = 0; i < g.size(); ++i) {
        veff.x[i] = dt * up.x[i];
        veff.y[i] = dt * up.y[i];
      }
    }
    SpectralField adv = transport_term_phys(g, veff, xi);

    if (opt.record_martingale) {
      PhysVec vdet;
      vdet.x.resize(g.size());
      vdet.y.resize(g.size());
      for (int i = 0; i < g.size(); ++i) {
        vdet.x[i] = dt * up.x[i];
        vdet.y[i] = dt * up.y[i];
      }
      const SpectralField advd = transport_term_phys(g, vdet, xi);
      for (size_t i = 0; i < macc.c.size(); ++i) macc.c[i] += advd.c[i] - adv.c[i];
    }

    if (opt.with_fluctuation && noise_on) {
      const PhysVec dwxp = to_physical(dw_full);
      const PhysVec uXi = to_physical(biot_savart(Xi));
      for (int i = 0; i < g.size(); ++i) {
        weff.x[i] = dt * uXi.x[i] + c_x * dwxp.x[i];
        weff.y[i] = dt * uXi.y[i] + c_x * dwxp.y[i];
      }
      const SpectralField force = advect_with_grad(g, weff, limit.grad[m]);
      for (int i = 0; i < g.size(); ++i) {
        vbar.x[i] = dt * limit.velocity[m].x[i];
        vbar.y[i] = dt * limit.velocity[m].y[i];
      }
      const SpectralField tr = transport_term_phys(g, vbar, Xi);
      for (size_t i = 0; i < Xi.c.size(); ++i) Xi.c[i] -= tr.c[i] + force.c[i];
      heat_propagate_inplace(Xi, heat);
      Xi.c[0] = cplx(0.0, 0.0);
    }

    for (size_t i = 0; i < xi.c.size(); ++i) xi.c[i] -= adv.c[i];
    heat_propagate_inplace(xi, heat);
    xi.c[0] = mean0;
    budget.check(xi);

    rec.record(m + 1, steps, dt, xi, opt.with_fluctuation ? &Xi : nullptr, macc);
  }
  return std::move(rec.path);
}

}  // namespace tnl
