#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tnl/experiments.hpp"
#include "tnl/mc.hpp"

namespace {

// TNL_SEED, when set, overrides the config's master seed.
bool env_seed(uint64_t* out) {
  const char* s = std::getenv("TNL_SEED");
  if (s == nullptr || *s == '\0') return false;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (end == nullptr || *end != '\0') {
    std::cerr << "TNL_SEED is not a nonnegative integer: '" << s << "'\n";
    std::exit(2);
  }
  *out = static_cast<uint64_t>(v);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transport-noise laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tnl::library_version());

  std::string config_path, out_dir, suite;
  int threads = tnl::default_thread_count();
  bool force = false;

  CLI::App* run = app.add_subcommand("run", "run the experiment described by a JSON config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--threads", threads, "worker pool size (default: hardware parallelism)");
  run->add_option("--out", out_dir, "output directory (overrides the config's out_dir)");
  run->add_flag("--force", force, "write into a non-empty output directory");

  CLI::App* validate = app.add_subcommand("validate", "validate a JSON config and exit");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  CLI::App* checks = app.add_subcommand("checks", "run a standalone invariant suite");
  checks->add_option("suite", suite, "one of: noise, dual, spectral")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || validate->parsed()) {
      tnl::ParseOutcome parsed = tnl::parse_config_file(config_path);
      if (!parsed.ok()) {
        std::cerr << "invalid config (" << parsed.violations.size() << " violation"
                  << (parsed.violations.size() == 1 ? "" : "s") << "):\n";
        for (const auto& v : parsed.violations) std::cerr << "  - " << v << "\n";
        return 2;
      }
      if (validate->parsed()) {
        std::cout << "ok: valid " << tnl::kind_name(parsed.config.kind) << " configuration\n";
        return 0;
      }
      uint64_t seed = 0;
      if (env_seed(&seed)) parsed.config.seed = seed;
      if (threads < 1) {
        std::cerr << "--threads must be >= 1\n";
        return 2;
      }
      std::cout << tnl::run_experiment(parsed.config, out_dir, threads, force);
      return 0;
    }
    return tnl::run_check_suite(suite) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
