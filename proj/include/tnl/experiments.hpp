#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnl/detpde.hpp"
#include "tnl/noise.hpp"
#include "tnl/stats.hpp"

namespace tnl {

// Experiment kinds exposed by the command-line driver.
enum class ExperimentKind {
  lln_transport,
  clt_transport,
  lln_euler,
  clt_euler,
  ldp_minimize,
  ldp_tail,
  dual_checks,
  noise_checks,
};
std::string kind_name(ExperimentKind k);

struct InitialSpec {
  std::string preset = "random_band";  // random_band | taylor_green | file
  int k_lo = 1, k_hi = 3;
  uint64_t seed = 7;
  std::string path;  // coefficient file for preset "file"
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::lln_transport;
  int grid_n = 64;
  double T = 0.2;
  double dt = 5e-4;
  double alpha = 0.5;
  NoiseWindow window = NoiseWindow::lowpass;
  std::vector<int> n_list{4, 8, 16};
  int paths = 64;
  uint64_t seed = 20240801;
  DriftSpec drift;
  InitialSpec initial;
  double delta = 1.0;   // LLN / tail norm index
  double s = 1.0;       // CLT comparison norm index
  double beta = 0.25;   // Euler CLT regularity index
  double gamma_b = 0.0; // drift integrability deficit
  int save_stride = 20;
  // ldp_minimize
  double lambda = 1e4;
  int opt_iters = 120;
  // ldp_tail
  double tail_radius = -1.0;  // <= 0: calibrated from a pilot run
  std::string out_dir;
};

// Parses a JSON config.  Returns every constraint violation (field, rule and
// the quantity it protects), not just the first.
struct ParseOutcome {
  ExperimentConfig config;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};
ParseOutcome parse_config(const std::string& json_text);
ParseOutcome parse_config_file(const std::string& path);

// Per-path records accumulated during a rate experiment for CSV export:
// (path, cutoff, time, quantity, value) rows.
struct PathRecord {
  int path;
  int cutoff;
  double t;
  const char* quantity;
  double value;
};

// Order-deterministic rate experiment over cfg.n_list: per-cutoff MC of the
// coupled error, OLS fit, theory exponent.  Fails (throws) when the abort
// fraction exceeds 5%.  When records is non-null it receives one row per
// (path, cutoff, quantity) for CSV export.
RateEstimate run_rate_experiment(const ExperimentConfig& cfg, int threads,
                                 std::vector<PathRecord>* records = nullptr);

struct RunArtifacts {
  std::string metadata_json;
  std::string results_csv;
  std::string gnuplot_dat;
  std::string rate_json;
};

// Full experiment driver: computes, then writes config echo, metadata,
// result CSV/JSON (and gnuplot data for the rate kinds) into out_dir.
// Refuses to write into a non-empty directory unless force is set.
// Returns the metadata JSON string.
std::string run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, int threads,
                           bool force);

// Standalone invariant suites ("checks"): returns 0 on success and prints
// one line per check.  Suites: "noise", "dual", "spectral".
int run_check_suite(const std::string& suite);

std::string library_version();

}  // namespace tnl
