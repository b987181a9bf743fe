// Command-line front end: lab <command> --config <path> --out <dir>
// Exit codes: 0 success, 1 numerical failure, 2 usage error.

#include <algorithm>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "lab/config.hpp"
#include "lab/errors.hpp"
#include "lab/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for optimal coefficient control of a "
               "coupled elliptic / Hammerstein system"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "lab_out";
  long long seed_override = -1;
  int threads = 0;

  for (const auto& name : lab::known_commands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "problem configuration (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--threads", threads,
                    "worker threads (0 = LAB_THREADS or sequential)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fputs(app.help().c_str(), stderr);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();

  try {
    lab::ProblemConfig cfg = lab::parse_config(config_path);
    if (seed_override >= 0) cfg.set_seed(static_cast<std::uint64_t>(seed_override));
    if (threads > 0) {
      cfg.optimizer.threads = threads;
      cfg.study.threads = threads;
    }
    return lab::dispatch(command, cfg, out_dir);
  } catch (const lab::ConfigError& err) {
    std::fprintf(stderr, "%s\n", err.what());
    return 2;
  } catch (const lab::LabError& err) {
    std::fprintf(stderr, "%s\n", err.what());
    return 1;
  }
}
