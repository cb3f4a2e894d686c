#include "tnl/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "tnl/mc.hpp"
#include "tnl/rng.hpp"
#include "tnl/spde.hpp"

namespace tnl {
namespace {

void validate_problem(const RateProblem& prob) {
  if (!(prob.lambda >= 0.0)) throw std::invalid_argument("penalty weight must be nonnegative");
  if (!(prob.delta >= 0.0)) throw std::invalid_argument("mismatch norm index must be nonnegative");
  if (!(prob.T > 0.0) || !(prob.dt > 0.0)) {
    throw std::invalid_argument("rate problem needs positive T and dt");
  }
  if (!(prob.target.grid == prob.f0.grid)) {
    throw std::invalid_argument("target and initial state live on different grids");
  }
}

int problem_steps(const RateProblem& prob) {
  return static_cast<int>(std::max<long long>(1, std::llround(prob.T / prob.dt)));
}

SpectralField prepared(const SpectralField& f) {
  SpectralField out = f;
  dealias(out);
  hermitian_symmetrize(out);
  return out;
}

double terminal_mismatch(const RateProblem& prob, const SpectralField& fT,
                         const SpectralField& target) {
  SpectralField e(fT.grid);
  for (size_t i = 0; i < e.c.size(); ++i) e.c[i] = fT.c[i] - target.c[i];
  e.c[0] = cplx(0.0, 0.0);  // the mean mode is pinned, not controllable
  return sobolev_norm(e, -prob.delta);
}

ControlPath zero_control(const TorusGrid& g, int steps, double T, double alpha) {
  ControlPath path;
  path.horizon = T;
  path.alpha = alpha;
  const double dt = T / steps;
  path.times.reserve(steps);
  path.fields.reserve(steps);
  for (int m = 0; m < steps; ++m) {
    path.times.push_back(m * dt);
    VectorField z(g);
    z.divergence_free = true;
    path.fields.push_back(std::move(z));
  }
  return path;
}

// Projection onto the admissible control directions: band-limited, Hermitian,
// divergence-free, mean-free.
void admissible_project(VectorField& v) {
  dealias(v.x);
  dealias(v.y);
  hermitian_symmetrize(v.x);
  hermitian_symmetrize(v.y);
  v = leray_project(v);
  v.x.c[0] = cplx(0.0, 0.0);
  v.y.c[0] = cplx(0.0, 0.0);
}

// One forward/adjoint pass.  Returns the evaluation and, when grad != nullptr,
// the per-segment L2 gradients dt*(A_alpha g_m - Pi(q_m grad f_m)).
ControlEvaluation forward_adjoint(const RateProblem& prob, const ControlPath& g,
                                  std::vector<VectorField>* grad) {
  const TorusGrid& grid = prob.f0.grid;
  const int steps = problem_steps(prob);
  const double dt = prob.T / steps;
  const SpectralField target = prepared(prob.target);

  const TrajectorySnapshot traj = solve_skeleton_transport(prob.f0, prob.b, g, prob.T, dt, 1);
  ControlEvaluation eval;
  eval.cost = rate_cost(g);
  eval.mismatch = terminal_mismatch(prob, traj.back(), target);
  eval.objective = eval.cost + 0.5 * prob.lambda * eval.mismatch * eval.mismatch;
  if (grad == nullptr) return eval;

  grad->assign(steps, VectorField(grid));

  // terminal condition: lambda * (H^{-delta} metric applied to the mismatch)
  SpectralField e(grid);
  for (size_t i = 0; i < e.c.size(); ++i) e.c[i] = traj.back().c[i] - target.c[i];
  e.c[0] = cplx(0.0, 0.0);
  SpectralField p = sobolev_metric_apply(e, -prob.delta);
  for (auto& c : p.c) c *= prob.lambda;

  const auto heat = heat_table(grid, dt);
  const PhysVec bp = to_physical(drift_velocity(prob.b, grid));
  PhysVec vs;
  vs.x.resize(grid.size());
  vs.y.resize(grid.size());

  for (int m = steps - 1; m >= 0; --m) {
    // transpose of the mean pin and the integrating factor
    p.c[0] = cplx(0.0, 0.0);
    heat_propagate_inplace(p, heat);
    const SpectralField& q = p;

    // dJ/dg_m = dt * (A_alpha g_m - Pi(q_m grad f_m))
    const PhysVec fgrad = to_physical(gradient(traj.fields[m]));
    const PhysField qphys = to_physical(q);
    VectorField w(grid);
    {
      const int sz = grid.size();
      thread_local std::vector<cplx> px, py;
      px.resize(sz);
      py.resize(sz);
      for (int i = 0; i < sz; ++i) {
        px[i] = cplx(qphys[i] * fgrad.x[i], 0.0);
        py[i] = cplx(qphys[i] * fgrad.y[i], 0.0);
      }
      fft::forward(grid, px.data(), w.x.c.data());
      fft::forward(grid, py.data(), w.y.c.data());
      admissible_project(w);
    }
    VectorField gm = sobolev_metric_apply(g.fields[g.segment(m * dt)], prob.alpha);
    VectorField& out = (*grad)[m];
    for (size_t i = 0; i < out.x.c.size(); ++i) {
      out.x.c[i] = dt * (gm.x.c[i] - w.x.c[i]);
      out.y.c[i] = dt * (gm.y.c[i] - w.y.c[i]);
    }

    // adjoint step: p_m = q + dt * (b+g_m)·∇q  (transpose of the forward
    // transport, which flips the sign for divergence-free velocities)
    const PhysVec gp = to_physical(g.fields[g.segment(m * dt)]);
    for (int i = 0; i < grid.size(); ++i) {
      vs.x[i] = dt * (bp.x[i] + gp.x[i]);
      vs.y[i] = dt * (bp.y[i] + gp.y[i]);
    }
    const SpectralField tr = transport_term_phys(grid, vs, q);
    SpectralField pm(grid);
    for (size_t i = 0; i < pm.c.size(); ++i) pm.c[i] = q.c[i] + tr.c[i];
    p = std::move(pm);
  }
  return eval;
}

}  // namespace

ControlEvaluation evaluate_control(const RateProblem& prob, const ControlPath& g) {
  validate_problem(prob);
  return forward_adjoint(prob, g, nullptr);
}

ControlEvaluation evaluate_control_euler(const RateProblem& prob, const ControlPath& g) {
  validate_problem(prob);
  const int steps = problem_steps(prob);
  const double dt = prob.T / steps;
  const SpectralField target = prepared(prob.target);
  const TrajectorySnapshot traj = solve_skeleton_euler(prob.f0, g, prob.T, dt, steps);
  ControlEvaluation eval;
  eval.cost = rate_cost(g);
  eval.mismatch = terminal_mismatch(prob, traj.back(), target);
  eval.objective = eval.cost + 0.5 * prob.lambda * eval.mismatch * eval.mismatch;
  return eval;
}

MinimizeResult minimize_rate(const RateProblem& prob, const MinimizeOptions& opt) {
  validate_problem(prob);
  if (opt.max_iters < 1) throw std::invalid_argument("optimizer budget must be positive");
  const TorusGrid& grid = prob.f0.grid;
  const int steps = problem_steps(prob);

  MinimizeResult res;
  res.control = zero_control(grid, steps, prob.T, prob.alpha);
  std::vector<VectorField> grad;
  ControlEvaluation cur = forward_adjoint(prob, res.control, &grad);
  res.trace.push_back({0.0, cur.objective, cur.cost, cur.mismatch, 0.0});

  double step = opt.initial_step;
  res.status = MinimizeStatus::budget_exhausted;
  for (int it = 1; it <= opt.max_iters; ++it) {
    // search direction: H^alpha Riesz lift of the L2 gradient
    std::vector<VectorField> dir;
    dir.reserve(steps);
    double descent = 0.0;
    for (int m = 0; m < steps; ++m) {
      VectorField d = sobolev_metric_apply(grad[m], -prob.alpha);
      d.x.c[0] = cplx(0.0, 0.0);
      d.y.c[0] = cplx(0.0, 0.0);
      descent += l2_inner(grad[m], d);
      dir.push_back(std::move(d));
    }
    if (!(descent > opt.grad_tol * std::max(1.0, std::abs(cur.objective)))) {
      res.status = MinimizeStatus::converged;
      break;
    }

    // Armijo backtracking; only improving iterates are accepted, so the
    // objective sequence is nonincreasing by construction.
    double eta = step;
    bool accepted = false;
    while (eta >= opt.min_step) {
      ControlPath trial = res.control;
      for (int m = 0; m < steps; ++m) {
        for (size_t i = 0; i < trial.fields[m].x.c.size(); ++i) {
          trial.fields[m].x.c[i] -= eta * dir[m].x.c[i];
          trial.fields[m].y.c[i] -= eta * dir[m].y.c[i];
        }
        trial.fields[m].divergence_free = true;
      }
      std::vector<VectorField> trial_grad;
      const ControlEvaluation trial_eval = forward_adjoint(prob, trial, &trial_grad);
      if (trial_eval.objective <= cur.objective - opt.armijo_c * eta * descent) {
        res.control = std::move(trial);
        grad = std::move(trial_grad);
        cur = trial_eval;
        res.trace.push_back({static_cast<double>(it), cur.objective, cur.cost, cur.mismatch, eta});
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    res.iterations = it;
    if (!accepted) {
      res.status = MinimizeStatus::stalled;
      break;
    }
    step = std::min(opt.initial_step, eta * 2.0);
  }

  res.upper_bound = cur.cost;
  res.objective = cur.objective;
  res.mismatch = cur.mismatch;
  return res;
}

double adjoint_fd_check(const RateProblem& prob, const ControlPath& g, int coords, double fd_step,
                        uint64_t seed) {
  validate_problem(prob);
  const TorusGrid& grid = prob.f0.grid;
  const int steps = problem_steps(prob);
  ControlPath base = refine_to_steps(g, steps);
  base.alpha = prob.alpha;
  base.horizon = prob.T;

  std::vector<VectorField> grad;
  forward_adjoint(prob, base, &grad);

  double worst = 0.0;
  for (int c = 0; c < coords; ++c) {
    const uint64_t draw = derive_seed(seed, static_cast<uint64_t>(c));
    const int m = static_cast<int>(splitmix64(draw) % static_cast<uint64_t>(steps));
    // a small plus-lattice mode, direction along a_k so the perturbation is
    // divergence-free
    const int pick = static_cast<int>(splitmix64(draw + 1) % 8u);
    static const int mode_table[8][2] = {{1, 0}, {0, 1}, {1, 1},  {1, -1},
                                         {2, 0}, {0, 2}, {2, 1}, {1, 2}};
    const int k1 = mode_table[pick][0];
    const int k2 = mode_table[pick][1];
    const bool imag_part = (splitmix64(draw + 2) & 1u) != 0;
    const double r = std::sqrt(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
    const cplx unit = imag_part ? cplx(0.0, 1.0) : cplx(1.0, 0.0);
    VectorField dirf(grid);
    dirf.x.c[grid.index(k1, k2)] = unit * (-k2 / r);
    dirf.y.c[grid.index(k1, k2)] = unit * (k1 / r);
    dirf.x.c[grid.index(-k1, -k2)] = std::conj(dirf.x.c[grid.index(k1, k2)]);
    dirf.y.c[grid.index(-k1, -k2)] = std::conj(dirf.y.c[grid.index(k1, k2)]);
    dirf.divergence_free = true;

    const double analytic = l2_inner(grad[m], dirf);

    auto objective_at = [&](double h) {
      ControlPath shifted = base;
      for (size_t i = 0; i < shifted.fields[m].x.c.size(); ++i) {
        shifted.fields[m].x.c[i] += h * dirf.x.c[i];
        shifted.fields[m].y.c[i] += h * dirf.y.c[i];
      }
      return forward_adjoint(prob, shifted, nullptr).objective;
    };
    const double fd = (objective_at(fd_step) - objective_at(-fd_step)) / (2.0 * fd_step);
    const double rel =
        std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-300});
    worst = std::max(worst, rel);
  }
  return worst;
}

LowerBoundResult lower_bound_check(const SpectralField& f0, const DriftSpec& b,
                                   const std::vector<ControlPath>& controls, double T, double dt,
                                   double delta) {
  if (!(delta > 1.0)) {
    throw std::invalid_argument("the deviation norm index must exceed 1 (= d/2)");
  }
  LowerBoundResult res;
  res.min_ratio = std::numeric_limits<double>::infinity();
  const double f0_sq = l2_norm(f0) * l2_norm(f0);

  ControlPath zero;
  zero.times = {0.0};
  zero.fields = {VectorField(f0.grid)};
  zero.fields[0].divergence_free = true;
  zero.horizon = T;
  const TrajectorySnapshot base = solve_skeleton_transport(f0, b, zero, T, dt, 1);

  for (const auto& g : controls) {
    const TrajectorySnapshot traj = solve_skeleton_transport(f0, b, g, T, dt, 1);
    double dev = 0.0;
    for (size_t i = 0; i < traj.fields.size(); ++i) {
      SpectralField d(f0.grid);
      for (size_t j = 0; j < d.c.size(); ++j) d.c[j] = traj.fields[i].c[j] - base.fields[i].c[j];
      dev = std::max(dev, sobolev_norm(d, -delta));
    }
    if (dev < 1e-12) {
      res.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
      ++res.excluded;
      continue;
    }
    const double ratio = rate_cost(g) * f0_sq / (dev * dev);
    res.ratios.push_back(ratio);
    res.min_ratio = std::min(res.min_ratio, ratio);
  }
  if (res.excluded == static_cast<int>(controls.size())) {
    res.min_ratio = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

std::vector<TailPoint> tail_probability_mc(const SpectralField& f0, const DriftSpec& b,
                                           const TorusGrid& g, const std::vector<int>& cutoffs,
                                           double alpha, double T, double dt, double delta,
                                           double R, int paths, uint64_t seed, int threads) {
  if (paths < 100) throw std::invalid_argument("tail estimates need at least 100 paths");
  if (!(delta > 1.0)) {
    throw std::invalid_argument("the deviation norm index must exceed 1 (= d/2)");
  }
  const int steps = static_cast<int>(std::max<long long>(1, std::llround(T / dt)));
  const double h = T / steps;
  const int stride = std::max(1, steps / 16);  // C0 norm over ~16 checkpoints
  const TrajectorySnapshot limit = solve_advection_diffusion(f0, b, T, h, stride);

  std::vector<TailPoint> out;
  for (int n : cutoffs) {
    const NoiseModel model = build_noise_model(alpha, n);
    TailPoint pt;
    pt.cutoff = n;
    pt.epsilon = model.epsilon;

    const uint64_t level_seed = derive_seed(seed, static_cast<uint64_t>(n));
    std::function<char(int)> body = [&](int path) -> char {
      StochasticRunConfig cfg;
      cfg.grid = g;
      cfg.T = T;
      cfg.dt = h;
      cfg.noise = model;
      cfg.seed = derive_seed(level_seed, static_cast<uint64_t>(path));
      cfg.save_stride = stride;
      const TrajectorySnapshot traj = run_stochastic_transport(f0, b, cfg);
      double dev = 0.0;
      for (size_t i = 0; i < traj.fields.size(); ++i) {
        SpectralField d(g);
        for (size_t j = 0; j < d.c.size(); ++j) {
          d.c[j] = traj.fields[i].c[j] - limit.fields[i].c[j];
        }
        dev = std::max(dev, sobolev_norm(d, -delta));
      }
      return dev >= R ? 1 : 0;
    };
    const PathResults<char> results = run_paths<char>(paths, threads, body);
    if (results.aborts * 20 > paths) {
      throw std::runtime_error("tail estimate aborted: more than 5% of paths failed (" +
                               results.first_error + ")");
    }
    int hits = 0;
    int valid = 0;
    for (int i = 0; i < paths; ++i) {
      if (!results.ok[i]) continue;
      ++valid;
      hits += results.values[i];
    }
    pt.p_hat = valid > 0 ? static_cast<double>(hits) / valid : 0.0;
    pt.degenerate = hits == 0 || hits == valid;
    pt.eps_log_p = pt.degenerate ? std::numeric_limits<double>::quiet_NaN()
                                 : pt.epsilon * std::log(pt.p_hat);
    out.push_back(pt);
  }
  return out;
}

std::vector<MollificationRow> mollification_stability(const SpectralField& f0, const DriftSpec& b,
                                                      const ControlPath& g, double T, double dt,
                                                      const std::vector<double>& widths) {
  std::vector<MollificationRow> rows;
  const int steps = static_cast<int>(std::max<long long>(1, std::llround(T / dt)));
  const double h = T / steps;
  const int stride = std::max(1, steps / 16);
  const TrajectorySnapshot base = solve_skeleton_transport(f0, b, g, T, h, stride);
  for (double w : widths) {
    MollificationRow row;
    row.width = w;
    const SpectralField f0w = mollify(f0, w);
    SpectralField d0(f0.grid);
    for (size_t i = 0; i < d0.c.size(); ++i) d0.c[i] = f0w.c[i] - f0.c[i];
    row.datum_dev = l2_norm(d0);
    const TrajectorySnapshot traj = solve_skeleton_transport(f0w, b, g, T, h, stride);
    for (size_t i = 0; i < traj.fields.size(); ++i) {
      SpectralField d(f0.grid);
      for (size_t j = 0; j < d.c.size(); ++j) d.c[j] = traj.fields[i].c[j] - base.fields[i].c[j];
      row.traj_dev = std::max(row.traj_dev, sobolev_norm(d, -1.0));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tnl
