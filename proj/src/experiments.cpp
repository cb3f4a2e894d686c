#include "tnl/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tnl/ldp.hpp"
#include "tnl/mc.hpp"
#include "tnl/rng.hpp"
#include "tnl/spde.hpp"

namespace tnl {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct KindEntry {
  ExperimentKind kind;
  const char* name;
};
const KindEntry kKindTable[] = {
    {ExperimentKind::lln_transport, "lln_transport"},
    {ExperimentKind::clt_transport, "clt_transport"},
    {ExperimentKind::lln_euler, "lln_euler"},
    {ExperimentKind::clt_euler, "clt_euler"},
    {ExperimentKind::ldp_minimize, "ldp_minimize"},
    {ExperimentKind::ldp_tail, "ldp_tail"},
    {ExperimentKind::dual_checks, "dual_checks"},
    {ExperimentKind::noise_checks, "noise_checks"},
};

bool kind_from_name(const std::string& s, ExperimentKind* out) {
  for (const auto& e : kKindTable) {
    if (s == e.name) {
      *out = e.kind;
      return true;
    }
  }
  return false;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// RFC-4180: quote a field only when it contains a comma, quote, or newline.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

bool is_rate_kind(ExperimentKind k) {
  return k == ExperimentKind::lln_transport || k == ExperimentKind::clt_transport ||
         k == ExperimentKind::lln_euler || k == ExperimentKind::clt_euler;
}
bool is_euler_kind(ExperimentKind k) {
  return k == ExperimentKind::lln_euler || k == ExperimentKind::clt_euler;
}
bool is_clt_kind(ExperimentKind k) {
  return k == ExperimentKind::clt_transport || k == ExperimentKind::clt_euler;
}

// ---------------------------------------------------------------- parsing

struct Parser {
  std::vector<std::string>& out;

  void fail(const std::string& field, const std::string& msg) { out.push_back(field + ": " + msg); }

  void check_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
      bool known = false;
      for (const char* k : allowed) {
        if (item.key() == k) {
          known = true;
          break;
        }
      }
      if (!known) fail(where.empty() ? item.key() : where + "." + item.key(), "unknown field");
    }
  }

  bool num(const json& obj, const char* key, double* dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number()) {
      fail(key, "must be a number");
      return false;
    }
    *dst = it->get<double>();
    return true;
  }
  bool integer(const json& obj, const char* key, int* dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number_integer()) {
      fail(key, "must be an integer");
      return false;
    }
    *dst = it->get<int>();
    return true;
  }
  bool u64(const json& obj, const char* key, uint64_t* dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number_unsigned() && !it->is_number_integer()) {
      fail(key, "must be a nonnegative integer");
      return false;
    }
    *dst = it->get<uint64_t>();
    return true;
  }
  bool str(const json& obj, const char* key, std::string* dst) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_string()) {
      fail(key, "must be a string");
      return false;
    }
    *dst = it->get<std::string>();
    return true;
  }
};

cplx json_cplx(const json& a) { return cplx(a.at(0).get<double>(), a.at(1).get<double>()); }

void parse_drift(Parser& p, const json& j, DriftSpec* drift) {
  p.check_keys(j, "drift", {"preset", "amplitude", "p", "q", "coefficients"});
  std::string preset = "zero";
  p.str(j, "preset", &preset);
  if (preset == "zero") {
    drift->preset = DriftPreset::zero;
  } else if (preset == "shear") {
    drift->preset = DriftPreset::shear;
  } else if (preset == "taylor_green") {
    drift->preset = DriftPreset::taylor_green;
  } else if (preset == "custom") {
    drift->preset = DriftPreset::custom;
  } else {
    p.fail("drift.preset", "must be one of zero, shear, taylor_green, custom");
  }
  p.num(j, "amplitude", &drift->amplitude);
  p.num(j, "p", &drift->p);
  p.num(j, "q", &drift->q);
  if (!(drift->p > 0.0) || !(drift->q > 0.0)) {
    p.fail("drift.p/q", "integrability exponents must be positive");
  } else if (!(drift->gamma() < 1.0)) {
    p.fail("drift.p/q",
           "must satisfy 2/p + 2/q < 1 (the integrability deficit gamma of the drift; "
           "well-posedness and every transport rate formula need gamma < 1)");
  }
  if (auto it = j.find("coefficients"); it != j.end()) {
    if (!it->is_array()) {
      p.fail("drift.coefficients", "must be an array of {k1,k2,cx,cy} objects");
    } else {
      for (const auto& e : *it) {
        try {
          DriftSpec::Coeff c;
          c.k1 = e.at("k1").get<int>();
          c.k2 = e.at("k2").get<int>();
          c.cx = json_cplx(e.at("cx"));
          c.cy = json_cplx(e.at("cy"));
          drift->custom.push_back(c);
        } catch (const std::exception&) {
          p.fail("drift.coefficients", "each entry needs integer k1, k2 and [re,im] pairs cx, cy");
        }
      }
    }
  }
  if (drift->preset == DriftPreset::custom && drift->custom.empty()) {
    p.fail("drift.coefficients", "preset 'custom' needs at least one coefficient");
  }
}

void parse_initial(Parser& p, const json& j, InitialSpec* init) {
  p.check_keys(j, "initial", {"preset", "k_lo", "k_hi", "seed", "path"});
  p.str(j, "preset", &init->preset);
  p.integer(j, "k_lo", &init->k_lo);
  p.integer(j, "k_hi", &init->k_hi);
  p.u64(j, "seed", &init->seed);
  p.str(j, "path", &init->path);
  if (init->preset != "random_band" && init->preset != "taylor_green" &&
      init->preset != "file") {
    p.fail("initial.preset", "must be one of random_band, taylor_green, file");
  }
  if (init->preset == "random_band" && !(1 <= init->k_lo && init->k_lo <= init->k_hi)) {
    p.fail("initial.k_lo/k_hi",
           "need 1 <= k_lo <= k_hi (a mean-free band; the velocity reconstruction and the "
           "fluctuation scaling both require a mean-free state)");
  }
  if (init->preset == "file" && init->path.empty()) {
    p.fail("initial.path", "preset 'file' needs a coefficient file path");
  }
}

}  // namespace

std::string kind_name(ExperimentKind k) {
  for (const auto& e : kKindTable) {
    if (e.kind == k) return e.name;
  }
  return "unknown";
}

ParseOutcome parse_config(const std::string& json_text) {
  ParseOutcome out;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    out.violations.push_back(std::string("config: not valid JSON (") + e.what() + ")");
    return out;
  }
  if (!j.is_object()) {
    out.violations.push_back("config: the top-level JSON value must be an object");
    return out;
  }
  Parser p{out.violations};
  ExperimentConfig& c = out.config;

  p.check_keys(j, "",
               {"kind", "grid_n", "T", "dt", "alpha", "window", "n_list", "paths", "seed", "drift",
                "initial", "delta", "s", "beta", "gamma_b", "save_stride", "lambda", "opt_iters",
                "tail_radius", "out_dir"});

  std::string kind_str;
  if (!p.str(j, "kind", &kind_str)) {
    p.fail("kind", "required field is missing");
  } else if (!kind_from_name(kind_str, &c.kind)) {
    p.fail("kind",
           "unknown experiment kind '" + kind_str +
               "' (expected lln_transport, clt_transport, lln_euler, clt_euler, ldp_minimize, "
               "ldp_tail, dual_checks, noise_checks)");
  }

  p.integer(j, "grid_n", &c.grid_n);
  p.num(j, "T", &c.T);
  p.num(j, "dt", &c.dt);
  p.num(j, "alpha", &c.alpha);
  std::string window_str;
  if (p.str(j, "window", &window_str)) {
    if (window_str == "lowpass") {
      c.window = NoiseWindow::lowpass;
    } else if (window_str == "band") {
      c.window = NoiseWindow::band;
    } else {
      p.fail("window", "must be 'lowpass' or 'band'");
    }
  }
  if (auto it = j.find("n_list"); it != j.end()) {
    if (!it->is_array() || it->empty()) {
      p.fail("n_list", "must be a non-empty array of integers");
    } else {
      c.n_list.clear();
      for (const auto& e : *it) {
        if (!e.is_number_integer()) {
          p.fail("n_list", "must be a non-empty array of integers");
          c.n_list.clear();
          break;
        }
        c.n_list.push_back(e.get<int>());
      }
    }
  }
  p.integer(j, "paths", &c.paths);
  p.u64(j, "seed", &c.seed);
  if (auto it = j.find("drift"); it != j.end()) {
    if (it->is_object()) {
      parse_drift(p, *it, &c.drift);
    } else {
      p.fail("drift", "must be an object");
    }
  }
  if (auto it = j.find("initial"); it != j.end()) {
    if (it->is_object()) {
      parse_initial(p, *it, &c.initial);
    } else {
      p.fail("initial", "must be an object");
    }
  }
  p.num(j, "delta", &c.delta);
  p.num(j, "s", &c.s);
  p.num(j, "beta", &c.beta);
  p.num(j, "gamma_b", &c.gamma_b);
  p.integer(j, "save_stride", &c.save_stride);
  p.num(j, "lambda", &c.lambda);
  p.integer(j, "opt_iters", &c.opt_iters);
  p.num(j, "tail_radius", &c.tail_radius);
  p.str(j, "out_dir", &c.out_dir);

  // ---- cross-field constraints, all collected before any compute ----
  if (c.grid_n < 8 || c.grid_n % 2 != 0) {
    p.fail("grid_n", "must be an even integer >= 8 (pseudo-spectral grid size)");
  }
  if (!(c.T > 0.0)) p.fail("T", "must be positive");
  if (!(c.dt > 0.0) || !(c.dt <= c.T)) p.fail("dt", "must satisfy 0 < dt <= T");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) {
    p.fail("alpha", "must lie in (0,1] (noise regularity index of the |k|^{-alpha} weights)");
  }
  if (c.save_stride < 1) p.fail("save_stride", "must be >= 1 (snapshot cadence)");
  if (!(c.gamma_b >= 0.0) || !(c.gamma_b < 1.0)) {
    p.fail("gamma_b", "must lie in [0,1) (drift integrability deficit 2/p + 2/q)");
  }

  const int kmax = c.grid_n / 3;
  const bool needs_noise = is_rate_kind(c.kind) || c.kind == ExperimentKind::ldp_tail;
  if (needs_noise) {
    int prev = 0;
    for (int n : c.n_list) {
      if (n < 1) p.fail("n_list", "cutoffs must be >= 1");
      if (n <= prev) {
        p.fail("n_list", "cutoffs must be strictly increasing (each level reuses nothing of the "
                         "previous one except the seed derivation)");
        break;
      }
      prev = n;
    }
    const int top = c.window == NoiseWindow::band ? 2 * c.n_list.back() : c.n_list.back();
    if (!c.n_list.empty() && top > kmax) {
      std::ostringstream msg;
      msg << "top noise mode " << top << " exceeds floor(N/3) = " << kmax
          << " (every sampled mode must survive the dealiasing cutoff, or the grid products "
             "alias)";
      p.fail("n_list", msg.str());
    }
  }
  if (is_rate_kind(c.kind)) {
    if (c.n_list.size() < 2) {
      p.fail("n_list", "rate fits need at least two cutoffs (a slope needs two abscissae)");
    }
    if (c.paths < 32) {
      p.fail("paths", "rate experiments need >= 32 paths (usable standard errors on the fit)");
    }
    if (!(c.alpha < 1.0)) {
      p.fail("alpha",
             "rate experiments need alpha strictly below 1 (every decay exponent carries the "
             "factor 1 - alpha)");
    }
  }
  if (c.kind == ExperimentKind::lln_transport) {
    if (!(c.delta > 0.0) || !(c.delta <= 1.0)) {
      p.fail("delta", "must lie in (0, 1] = (0, d/2] (law-of-large-numbers deviation norm index)");
    }
  }
  if (c.kind == ExperimentKind::clt_transport) {
    const double cap = std::min(c.alpha, 1.0 - c.gamma_b);
    if (!(c.delta > 0.0) || !(c.delta < cap)) {
      std::ostringstream msg;
      msg << "must lie strictly inside (0, min(alpha, 1-gamma)) = (0, " << cap
          << ") (fluctuation rate index; the exponent 2 delta (1-alpha) is only attained below "
             "that cap)";
      p.fail("delta", msg.str());
    }
    if (!(c.s > 1.0)) {
      p.fail("s", "must exceed 1 = d/2 (the fluctuation field lives in negative-order spaces "
                  "below -d/2)");
    }
  }
  if (c.kind == ExperimentKind::clt_euler) {
    if (!(c.beta > 0.0) || !(c.beta < c.alpha)) {
      p.fail("beta",
             "must lie strictly inside (0, alpha) (interpolation index; the rate exponent is "
             "2 min(beta, alpha-beta) (1-alpha), which vanishes at the endpoints)");
    }
    if (!(c.s > 0.0)) p.fail("s", "must be positive (comparison norm index)");
  }
  if (c.kind == ExperimentKind::ldp_minimize) {
    if (!(c.lambda > 0.0)) {
      p.fail("lambda", "must be positive (terminal-mismatch penalty weight)");
    }
    if (c.opt_iters < 1) p.fail("opt_iters", "must be >= 1 (descent iteration budget)");
    if (!(c.delta >= 0.0)) p.fail("delta", "must be >= 0 (terminal mismatch norm index)");
  }
  if (c.kind == ExperimentKind::ldp_tail) {
    if (!(c.delta > 1.0)) {
      p.fail("delta", "must exceed 1 = d/2 (tail deviations are measured in C([0,T]; H^{-delta}), "
                      "which needs delta > d/2)");
    }
    if (c.paths < 100) p.fail("paths", "tail estimates need >= 100 paths");
  }
  if (c.initial.preset == "random_band" && c.initial.k_hi > kmax) {
    std::ostringstream msg;
    msg << "k_hi = " << c.initial.k_hi << " exceeds floor(N/3) = " << kmax
        << " (the initial state must be band-limited below the dealiasing cutoff)";
    p.fail("initial.k_hi", msg.str());
  }
  return out;
}

ParseOutcome parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParseOutcome out;
    out.violations.push_back("config: cannot read file '" + path + "'");
    return out;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

// ------------------------------------------------------------ initial data

SpectralField load_field_file(const TorusGrid& g, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read initial-state file '" + path + "'");
  json j = json::parse(in);
  SpectralField f(g);
  for (const auto& e : j.at("coefficients")) {
    const int k1 = e.at(0).get<int>();
    const int k2 = e.at(1).get<int>();
    if (std::abs(k1) > g.kmax || std::abs(k2) > g.kmax) {
      throw std::runtime_error("initial-state file holds a mode beyond the dealiasing cutoff");
    }
    f.at(k1, k2) = cplx(e.at(2).get<double>(), e.at(3).get<double>());
  }
  hermitian_symmetrize(f);
  dealias(f);
  return f;
}

SpectralField initial_field(const ExperimentConfig& cfg, const TorusGrid& g) {
  if (cfg.initial.preset == "taylor_green") {
    // vorticity sin(2πx1) sin(2πx2)
    SpectralField f(g);
    const double a = -0.25;
    f.at(1, 1) = cplx(a, 0.0);
    f.at(-1, -1) = cplx(a, 0.0);
    f.at(1, -1) = cplx(-a, 0.0);
    f.at(-1, 1) = cplx(-a, 0.0);
    return f;
  }
  if (cfg.initial.preset == "file") return load_field_file(g, cfg.initial.path);
  return random_band_field(g, cfg.initial.k_lo, cfg.initial.k_hi, cfg.initial.seed);
}

// ------------------------------------------------------------- rate driver

struct PathOut {
  double sup_clt_sq = 0.0;
  double sup_lln_sq = 0.0;
  double coeff_re = 0.0;
  double coeff_im = 0.0;
  double scaled_diff = 0.0;
};

std::string rate_kind_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::lln_transport:
      return "transport_LLN";
    case ExperimentKind::clt_transport:
      return "transport_CLT";
    case ExperimentKind::lln_euler:
      return "euler_LLN";
    default:
      return "euler_CLT";
  }
}

}  // namespace

RateEstimate run_rate_experiment(const ExperimentConfig& cfg, int threads,
                                 std::vector<PathRecord>* records) {
  if (!is_rate_kind(cfg.kind)) {
    throw std::invalid_argument("run_rate_experiment only handles the four rate kinds");
  }
  const TorusGrid grid = make_grid(cfg.grid_n);
  const SpectralField f0 = initial_field(cfg, grid);
  const bool euler = is_euler_kind(cfg.kind);
  const bool clt = is_clt_kind(cfg.kind);

  const int steps = static_cast<int>(std::max<long long>(1, std::llround(cfg.T / cfg.dt)));
  const double h = cfg.T / steps;
  const TrajectorySnapshot limit = euler ? solve_nse_vorticity(f0, cfg.T, h, 1)
                                         : solve_advection_diffusion(f0, cfg.drift, cfg.T, h, 1);
  const LimitCache cache = build_limit_cache(limit, euler);

  CoupledOptions opt;
  opt.s_clt = cfg.s;
  opt.delta_lln = cfg.delta;
  opt.with_fluctuation = clt;

  RateEstimate est;
  est.kind = kind_name(cfg.kind);
  std::vector<double> ns, means;

  for (int n : cfg.n_list) {
    const NoiseModel model = build_noise_model(cfg.alpha, n, cfg.window);
    StochasticRunConfig rc;
    rc.grid = grid;
    rc.T = cfg.T;
    rc.dt = h;
    rc.noise = model;
    rc.save_stride = cfg.save_stride;
    const uint64_t level_seed = derive_seed(cfg.seed, static_cast<uint64_t>(n));

    std::function<PathOut(int)> body = [&](int path) -> PathOut {
      StochasticRunConfig prc = rc;
      prc.seed = derive_seed(level_seed, static_cast<uint64_t>(path));
      const CoupledPath cp = euler ? run_coupled_euler(f0, prc, cache, opt)
                                   : run_coupled_transport(f0, cfg.drift, prc, cache, opt);
      PathOut o;
      for (double e : cp.clt_error) o.sup_clt_sq = std::max(o.sup_clt_sq, e * e);
      for (double e : cp.lln_error) o.sup_lln_sq = std::max(o.sup_lln_sq, e * e);
      o.coeff_re = cp.fluct_coeff_10.real();
      o.coeff_im = cp.fluct_coeff_10.imag();
      o.scaled_diff = cp.scaled_diff_hneg2;
      return o;
    };
    const PathResults<PathOut> res = run_paths<PathOut>(cfg.paths, threads, body);
    if (res.aborts * 20 > cfg.paths) {
      std::ostringstream msg;
      msg << "rate experiment failed at cutoff n = " << n << ": " << res.aborts << " of "
          << cfg.paths << " paths aborted (> 5%); first error: " << res.first_error;
      throw std::runtime_error(msg.str());
    }

    std::vector<double> main_sq, lln_sq;
    for (int i = 0; i < cfg.paths; ++i) {
      if (!res.ok[i]) continue;
      main_sq.push_back(clt ? res.values[i].sup_clt_sq : res.values[i].sup_lln_sq);
      lln_sq.push_back(res.values[i].sup_lln_sq);
      if (records != nullptr) {
        records->push_back({i, n, cfg.T, clt ? "sup_clt_sq" : "sup_lln_sq", main_sq.back()});
        if (clt) {
          records->push_back({i, n, cfg.T, "fluct_coeff_10_re", res.values[i].coeff_re});
          records->push_back({i, n, cfg.T, "fluct_coeff_10_im", res.values[i].coeff_im});
          records->push_back({i, n, cfg.T, "scaled_diff_hneg2", res.values[i].scaled_diff});
        }
      }
    }
    if (main_sq.size() < 2) {
      std::ostringstream msg;
      msg << "rate experiment failed at cutoff n = " << n
          << ": fewer than 2 surviving paths; first error: " << res.first_error;
      throw std::runtime_error(msg.str());
    }
    const SampleStats main_st = sample_stats(main_sq);
    const SampleStats lln_st = sample_stats(lln_sq);

    RatePoint pt;
    pt.cutoff = n;
    pt.epsilon = model.epsilon;
    pt.mean_sq_error = main_st.mean;
    pt.se = main_st.se_mean;
    pt.mean_lln_sq = lln_st.mean;
    pt.wasserstein_bound = std::sqrt(main_st.mean);
    pt.paths = static_cast<int>(main_sq.size());
    pt.aborts = res.aborts;
    est.points.push_back(pt);
    ns.push_back(static_cast<double>(n));
    means.push_back(main_st.mean);
  }

  // A confidence interval needs >= 3 cutoffs; with exactly two the slope is
  // the line through the pair and the CI degenerates to a point.
  const auto loglog_fit = [](const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() >= 3) return ols_loglog(xs, ys);
    SlopeFit f;
    if (xs.size() == 2 && xs[0] > 0.0 && xs[1] > 0.0 && ys[0] > 0.0 && ys[1] > 0.0) {
      f.slope = (std::log(ys[1]) - std::log(ys[0])) / (std::log(xs[1]) - std::log(xs[0]));
      f.intercept = std::log(ys[0]) - f.slope * std::log(xs[0]);
      f.ci_low = f.ci_high = f.slope;
    }
    return f;
  };
  est.fit = loglog_fit(ns, means);
  std::vector<double> eps;
  for (const auto& pt : est.points) eps.push_back(pt.epsilon);
  est.fit_eps = loglog_fit(eps, means);
  const std::string rk = rate_kind_string(cfg.kind);
  const double dob = cfg.kind == ExperimentKind::clt_euler ? cfg.beta : cfg.delta;
  est.theory_exponent = theoretical_exponent(rk, cfg.alpha, cfg.gamma_b, dob);
  est.formula = exponent_formula(rk);
  return est;
}

namespace {

// ------------------------------------------------------------- artifacts

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}

json fit_json(const SlopeFit& f) {
  return json{{"slope", f.slope},
              {"intercept", f.intercept},
              {"slope_se", f.slope_se},
              {"ci_low", f.ci_low},
              {"ci_high", f.ci_high}};
}

json config_echo(const ExperimentConfig& c) {
  json drift{{"amplitude", c.drift.amplitude}, {"p", c.drift.p}, {"q", c.drift.q}};
  switch (c.drift.preset) {
    case DriftPreset::zero: drift["preset"] = "zero"; break;
    case DriftPreset::shear: drift["preset"] = "shear"; break;
    case DriftPreset::taylor_green: drift["preset"] = "taylor_green"; break;
    case DriftPreset::custom: drift["preset"] = "custom"; break;
  }
  if (!c.drift.custom.empty()) {
    json arr = json::array();
    for (const auto& co : c.drift.custom) {
      arr.push_back(json{{"k1", co.k1},
                         {"k2", co.k2},
                         {"cx", {co.cx.real(), co.cx.imag()}},
                         {"cy", {co.cy.real(), co.cy.imag()}}});
    }
    drift["coefficients"] = arr;
  }
  json initial{{"preset", c.initial.preset},
               {"k_lo", c.initial.k_lo},
               {"k_hi", c.initial.k_hi},
               {"seed", c.initial.seed}};
  if (!c.initial.path.empty()) initial["path"] = c.initial.path;
  return json{{"kind", kind_name(c.kind)},
              {"grid_n", c.grid_n},
              {"T", c.T},
              {"dt", c.dt},
              {"alpha", c.alpha},
              {"window", c.window == NoiseWindow::band ? "band" : "lowpass"},
              {"n_list", c.n_list},
              {"paths", c.paths},
              {"seed", c.seed},
              {"drift", drift},
              {"initial", initial},
              {"delta", c.delta},
              {"s", c.s},
              {"beta", c.beta},
              {"gamma_b", c.gamma_b},
              {"save_stride", c.save_stride},
              {"lambda", c.lambda},
              {"opt_iters", c.opt_iters},
              {"tail_radius", c.tail_radius},
              {"out_dir", c.out_dir}};
}

std::string rate_csv(const RateEstimate& est) {
  std::string csv = "n,epsilon,mean_sq_error,se,mean_lln_sq,wasserstein_bound,paths,aborts\n";
  for (const auto& pt : est.points) {
    csv += std::to_string(pt.cutoff) + "," + fmt17(pt.epsilon) + "," + fmt17(pt.mean_sq_error) +
           "," + fmt17(pt.se) + "," + fmt17(pt.mean_lln_sq) + "," + fmt17(pt.wasserstein_bound) +
           "," + std::to_string(pt.paths) + "," + std::to_string(pt.aborts) + "\n";
  }
  return csv;
}

std::string paths_csv(const std::vector<PathRecord>& records) {
  std::string csv = "path,cutoff,t,quantity,value\n";
  for (const auto& r : records) {
    csv += std::to_string(r.path) + "," + std::to_string(r.cutoff) + "," + fmt17(r.t) + "," +
           csv_field(r.quantity) + "," + fmt17(r.value) + "\n";
  }
  return csv;
}

std::string rate_dat(const RateEstimate& est) {
  std::string dat = "# log(n)  log(mean_sq_error)\n";
  for (const auto& pt : est.points) {
    dat += fmt17(std::log(static_cast<double>(pt.cutoff))) + "  " +
           fmt17(std::log(pt.mean_sq_error)) + "\n";
  }
  return dat;
}

json rate_json_doc(const RateEstimate& est) {
  json points = json::array();
  for (const auto& pt : est.points) {
    points.push_back(json{{"n", pt.cutoff},
                          {"epsilon", pt.epsilon},
                          {"mean_sq_error", pt.mean_sq_error},
                          {"se", pt.se},
                          {"mean_lln_sq", pt.mean_lln_sq},
                          {"wasserstein_bound", pt.wasserstein_bound},
                          {"paths", pt.paths},
                          {"aborts", pt.aborts}});
  }
  return json{{"kind", est.kind},
              {"points", points},
              {"fit", fit_json(est.fit)},
              {"fit_eps", fit_json(est.fit_eps)},
              {"theory_exponent", est.theory_exponent},
              {"formula", est.formula}};
}

// Planted single-mode control for the ldp_minimize experiment: recoverable,
// nonzero cost, known location.
ControlPath planted_control(const TorusGrid& g, double T, double alpha) {
  ControlPath path;
  path.horizon = T;
  path.alpha = alpha;
  path.times = {0.0};
  VectorField v(g);
  const int k1 = 1, k2 = 2;
  const double r = std::sqrt(5.0);
  const cplx c(0.6, 0.0);
  v.x.at(k1, k2) = c * (-k2 / r);
  v.y.at(k1, k2) = c * (k1 / r);
  v.x.at(-k1, -k2) = std::conj(v.x.at(k1, k2));
  v.y.at(-k1, -k2) = std::conj(v.y.at(k1, k2));
  v.divergence_free = true;
  path.fields.push_back(std::move(v));
  return path;
}

// Pilot calibration of the tail radius: the 40th percentile of the
// C0 H^{-delta} deviation at the smallest cutoff, so the exceedance starts
// near 0.6 and has room to fall along the cutoff list.
double calibrate_tail_radius(const ExperimentConfig& cfg, const TorusGrid& grid,
                             const SpectralField& f0, int threads) {
  const int steps = static_cast<int>(std::max<long long>(1, std::llround(cfg.T / cfg.dt)));
  const double h = cfg.T / steps;
  const int stride = std::max(1, steps / 16);
  const TrajectorySnapshot limit = solve_advection_diffusion(f0, cfg.drift, cfg.T, h, stride);
  const NoiseModel model = build_noise_model(cfg.alpha, cfg.n_list.front(), cfg.window);
  const uint64_t pilot_seed = derive_seed(cfg.seed, 0x9107u);
  const int pilot_paths = std::min(cfg.paths, 128);

  std::function<double(int)> body = [&](int path) -> double {
    StochasticRunConfig rc;
    rc.grid = grid;
    rc.T = cfg.T;
    rc.dt = h;
    rc.noise = model;
    rc.seed = derive_seed(pilot_seed, static_cast<uint64_t>(path));
    rc.save_stride = stride;
    const TrajectorySnapshot traj = run_stochastic_transport(f0, cfg.drift, rc);
    double dev = 0.0;
    for (size_t i = 0; i < traj.fields.size(); ++i) {
      SpectralField d(grid);
      for (size_t j = 0; j < d.c.size(); ++j) d.c[j] = traj.fields[i].c[j] - limit.fields[i].c[j];
      dev = std::max(dev, sobolev_norm(d, -cfg.delta));
    }
    return dev;
  };
  const PathResults<double> res = run_paths<double>(pilot_paths, threads, body);
  std::vector<double> devs;
  for (int i = 0; i < pilot_paths; ++i) {
    if (res.ok[i]) devs.push_back(res.values[i]);
  }
  if (devs.size() < 8) {
    throw std::runtime_error("tail radius pilot failed: too few surviving paths (" +
                             res.first_error + ")");
  }
  std::sort(devs.begin(), devs.end());
  return devs[devs.size() * 2 / 5];
}

}  // namespace

std::string run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, int threads,
                           bool force) {
  const std::string dir_str = out_dir.empty() ? cfg.out_dir : out_dir;
  if (dir_str.empty()) {
    throw std::invalid_argument(
        "no output directory (set out_dir in the config or pass --out DIR)");
  }
  const fs::path dir(dir_str);
  if (fs::exists(dir) && !fs::is_empty(dir) && !force) {
    throw std::runtime_error("output directory '" + dir_str +
                             "' is not empty; pass --force to write into it");
  }
  fs::create_directories(dir);

  const auto t0 = std::chrono::steady_clock::now();
  json meta{{"version", library_version()},
            {"kind", kind_name(cfg.kind)},
            {"seed", cfg.seed},
            {"threads", threads}};
  std::vector<std::string> artifacts{"config.json"};
  write_file(dir / "config.json", config_echo(cfg).dump(2) + "\n");

  if (is_rate_kind(cfg.kind)) {
    std::vector<PathRecord> records;
    const RateEstimate est = run_rate_experiment(cfg, threads, &records);
    write_file(dir / "results.csv", rate_csv(est));
    write_file(dir / "paths.csv", paths_csv(records));
    write_file(dir / "rate.dat", rate_dat(est));
    write_file(dir / "rate.json", rate_json_doc(est).dump(2) + "\n");
    artifacts.insert(artifacts.end(), {"results.csv", "paths.csv", "rate.dat", "rate.json"});
    int aborts = 0;
    for (const auto& pt : est.points) aborts += pt.aborts;
    meta["path_aborts"] = aborts;
    meta["fitted_slope"] = est.fit.slope;
    meta["theory_exponent"] = est.theory_exponent;
  } else if (cfg.kind == ExperimentKind::ldp_minimize) {
    const TorusGrid grid = make_grid(cfg.grid_n);
    const SpectralField f0 = initial_field(cfg, grid);
    const ControlPath g_star = planted_control(grid, cfg.T, cfg.alpha);
    const TrajectorySnapshot planted =
        solve_skeleton_transport(f0, cfg.drift, g_star, cfg.T, cfg.dt, 1);
    RateProblem prob;
    prob.f0 = f0;
    prob.b = cfg.drift;
    prob.target = planted.back();
    prob.T = cfg.T;
    prob.dt = cfg.dt;
    prob.alpha = cfg.alpha;
    prob.delta = cfg.delta;
    prob.lambda = cfg.lambda;
    MinimizeOptions mo;
    mo.max_iters = cfg.opt_iters;
    const MinimizeResult res = minimize_rate(prob, mo);

    std::string csv = "iter,objective,cost,mismatch,step\n";
    for (const auto& row : res.trace) {
      csv += fmt17(row[0]) + "," + fmt17(row[1]) + "," + fmt17(row[2]) + "," + fmt17(row[3]) +
             "," + fmt17(row[4]) + "\n";
    }
    write_file(dir / "trace.csv", csv);
    const double planted_cost = rate_cost(g_star);
    const char* status = res.status == MinimizeStatus::converged      ? "converged"
                         : res.status == MinimizeStatus::stalled      ? "stalled"
                                                                      : "budget_exhausted";
    write_file(dir / "result.json", json{{"planted_cost", planted_cost},
                                         {"upper_bound", res.upper_bound},
                                         {"objective", res.objective},
                                         {"mismatch", res.mismatch},
                                         {"status", status},
                                         {"iterations", res.iterations}}
                                        .dump(2) +
                                        "\n");
    artifacts.insert(artifacts.end(), {"trace.csv", "result.json"});
    meta["upper_bound"] = res.upper_bound;
    meta["planted_cost"] = planted_cost;
  } else if (cfg.kind == ExperimentKind::ldp_tail) {
    const TorusGrid grid = make_grid(cfg.grid_n);
    const SpectralField f0 = initial_field(cfg, grid);
    const double radius = cfg.tail_radius > 0.0
                              ? cfg.tail_radius
                              : calibrate_tail_radius(cfg, grid, f0, threads);
    const std::vector<TailPoint> tail =
        tail_probability_mc(f0, cfg.drift, grid, cfg.n_list, cfg.alpha, cfg.T, cfg.dt, cfg.delta,
                            radius, cfg.paths, cfg.seed, threads);
    std::string csv = "cutoff,epsilon,p_hat,eps_log_p,degenerate\n";
    json points = json::array();
    for (const auto& pt : tail) {
      csv += std::to_string(pt.cutoff) + "," + fmt17(pt.epsilon) + "," + fmt17(pt.p_hat) + "," +
             fmt17(pt.eps_log_p) + "," + (pt.degenerate ? "1" : "0") + "\n";
      points.push_back(json{{"cutoff", pt.cutoff},
                            {"epsilon", pt.epsilon},
                            {"p_hat", pt.p_hat},
                            {"eps_log_p", pt.eps_log_p},
                            {"degenerate", pt.degenerate}});
    }
    write_file(dir / "tail.csv", csv);
    write_file(dir / "tail.json",
               json{{"radius", radius}, {"delta", cfg.delta}, {"points", points}}.dump(2) + "\n");
    artifacts.insert(artifacts.end(), {"tail.csv", "tail.json"});
    meta["radius"] = radius;
  } else {
    const std::string suite = cfg.kind == ExperimentKind::noise_checks ? "noise" : "dual";
    const int failures = run_check_suite(suite);
    meta["check_failures"] = failures;
    if (failures != 0) {
      std::ostringstream msg;
      msg << "invariant suite '" << suite << "' reported " << failures << " failing check(s)";
      throw std::runtime_error(msg.str());
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  meta["wall_seconds"] = std::chrono::duration<double>(t1 - t0).count();
  meta["artifacts"] = artifacts;
  const std::string meta_str = meta.dump(2) + "\n";
  write_file(dir / "metadata.json", meta_str);
  return meta_str;
}

// ---------------------------------------------------------------- checks

namespace {

struct CheckRunner {
  int failures = 0;
  void operator()(const std::string& name, bool pass) {
    std::cout << (pass ? "ok   - " : "FAIL - ") << name << "\n";
    if (!pass) ++failures;
  }
};

int checks_noise() {
  CheckRunner check;

  const NoiseModel m1 = build_noise_model(0.5, 1);
  check("epsilon(alpha=0.5, n=1) equals 1/2", std::abs(m1.epsilon - 0.5) < 1e-14);
  const NoiseModel m2 = build_noise_model(1.0, 2);
  check("epsilon(alpha=1, n=2) equals 2/7", std::abs(m2.epsilon - 2.0 / 7.0) < 1e-14);

  bool norm_ok = true;
  for (const auto& m : {build_noise_model(0.3, 4), build_noise_model(0.8, 7),
                        build_noise_model(0.6, 3, NoiseWindow::band)}) {
    double wsum = 0.0;
    for (const auto& mode : m.modes) wsum += mode.weight * mode.weight;
    norm_ok = norm_ok && std::abs(m.epsilon * wsum - 2.0) < 1e-12;
  }
  check("epsilon normalization: epsilon * sum w^2 = 2 on every window", norm_ok);

  const TorusGrid g = make_grid(32);
  const NoiseModel m3 = build_noise_model(0.7, 5);
  BrownianDriver drv(42);
  const VectorField dW = sample_noise_increment_at(m3, g, drv, 0, 1e-3);
  check("sampled increment is divergence-free to the last bit", max_divergence(dW) == 0.0);
  double imag_x = 0.0, imag_y = 0.0;
  to_physical(dW.x, &imag_x);
  to_physical(dW.y, &imag_y);
  check("sampled increment is a real field", std::max(imag_x, imag_y) < 1e-10);
  check("sampled increment is Hermitian",
        hermitian_residue(dW.x) == 0.0 && hermitian_residue(dW.y) == 0.0);

  const cplx plus = drv.increment(2, 1, 7, 1e-3);
  const cplx minus = drv.increment(-2, -1, 7, 1e-3);
  check("driver pairs +k and -k as conjugates", minus == std::conj(plus));
  BrownianDriver drv2(42);
  check("driver increments are pure functions of (seed, mode, step)",
        drv2.increment(2, 1, 7, 1e-3) == plus);

  const double e16 = build_noise_model(0.5, 16).epsilon;
  const double e32 = build_noise_model(0.5, 32).epsilon;
  const double ratio = e32 / e16;
  const double target = std::pow(2.0, 2.0 * 0.5 - 2.0);
  check("epsilon scales like n^{2 alpha - 2}", std::abs(ratio / target - 1.0) < 0.25);

  return check.failures;
}

int checks_spectral() {
  CheckRunner check;
  const TorusGrid g = make_grid(32);
  const SpectralField xi = random_band_field(g, 1, 6, 99);

  const SpectralField back = curl(biot_savart(xi));
  double err = 0.0;
  for (size_t i = 0; i < xi.c.size(); ++i) err = std::max(err, std::abs(back.c[i] - xi.c[i]));
  check("curl of the reconstructed velocity returns the vorticity", err < 1e-10);

  VectorField v = biot_savart(xi);
  const VectorField pv = leray_project(v);
  double perr = 0.0;
  for (size_t i = 0; i < v.x.c.size(); ++i) {
    perr = std::max(perr, std::abs(pv.x.c[i] - v.x.c[i]));
    perr = std::max(perr, std::abs(pv.y.c[i] - v.y.c[i]));
  }
  check("divergence-free projection fixes divergence-free fields", perr < 1e-12);
  const VectorField grad = gradient(xi);
  const VectorField pg = leray_project(grad);
  check("divergence-free projection annihilates gradients", l2_inner(pg, pg) < 1e-20);

  const SpectralField two = heat_propagate(heat_propagate(xi, 0.01), 0.02);
  const SpectralField once = heat_propagate(xi, 0.03);
  double herr = 0.0;
  for (size_t i = 0; i < once.c.size(); ++i) herr = std::max(herr, std::abs(two.c[i] - once.c[i]));
  check("heat semigroup composes", herr < 1e-12);

  const SpectralField f = random_band_field(g, 1, 8, 123);
  const SpectralField tf = transport_term(v, f);
  check("advection by a divergence-free field is L2-skew",
        std::abs(l2_inner(tf, f)) < 1e-12 * l2_norm(f) * l2_norm(f));

  const PhysField samples = to_physical(f);
  const SpectralField round = to_spectral(g, samples);
  double rerr = 0.0;
  for (size_t i = 0; i < f.c.size(); ++i) rerr = std::max(rerr, std::abs(round.c[i] - f.c[i]));
  check("physical round-trip is the identity on band-limited fields", rerr < 1e-12);

  double msq = 0.0;
  for (double x : samples) msq += x * x;
  msq /= samples.size();
  check("Parseval: spectral and physical L2 norms agree",
        std::abs(msq - l2_norm(f) * l2_norm(f)) < 1e-12);

  return check.failures;
}

int checks_dual() {
  CheckRunner check;
  const TorusGrid g = make_grid(32);
  DriftSpec b;
  b.preset = DriftPreset::taylor_green;
  b.amplitude = 0.5;
  const SpectralField phi = random_band_field(g, 1, 4, 7);
  const SpectralField f0 = random_band_field(g, 1, 4, 11);
  const double tau = 0.01;
  const double dt = 2e-4;

  // composition across an incommensurate split (legs get different rounded
  // step sizes, so this measures genuine discretization consistency)
  const double split = 0.00377;
  const SpectralField full = solve_backward_dual(phi, b, tau, dt).fields.front();
  const SpectralField upper = solve_backward_dual(phi, b, tau - split, dt).fields.front();
  const SpectralField two_leg = solve_backward_dual(upper, b, split, dt).fields.front();
  double cerr = 0.0;
  for (size_t i = 0; i < full.c.size(); ++i) {
    cerr = std::max(cerr, std::abs(two_leg.c[i] - full.c[i]));
  }
  check("backward propagator composes across a split horizon", cerr / l2_norm(full) < 1e-3);

  const TrajectorySnapshot fwd = solve_advection_diffusion(f0, b, tau, dt, 1);
  const TrajectorySnapshot dual = solve_backward_dual(phi, b, tau, dt, 1);
  const double pair0 = l2_inner(fwd.fields.front(), dual.fields.front());
  double derr = 0.0;
  for (size_t i = 0; i < fwd.fields.size(); ++i) {
    const int j = dual.index_at(fwd.times[i]);
    derr = std::max(derr, std::abs(l2_inner(fwd.fields[i], dual.fields[j]) - pair0));
  }
  check("forward solution and backward dual pair to a constant",
        derr / std::abs(pair0) < 1e-3);

  return check.failures;
}

}  // namespace

int run_check_suite(const std::string& suite) {
  if (suite == "noise") return checks_noise();
  if (suite == "spectral") return checks_spectral();
  if (suite == "dual") return checks_dual();
  throw std::invalid_argument("unknown check suite '" + suite +
                              "' (expected noise, dual, or spectral)");
}

std::string library_version() { return "0.1.0"; }

}  // namespace tnl
