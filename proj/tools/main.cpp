#include <iostream>

#include "CLI11.hpp"
#include "smiso/experiment.hpp"

namespace {

enum class LogLevel { Quiet, Info, Debug };

LogLevel parse_level(const std::string& s) {
  if (s == "quiet") return LogLevel::Quiet;
  if (s == "info") return LogLevel::Info;
  if (s == "debug") return LogLevel::Debug;
  throw CLI::ValidationError("--log-level", "must be quiet, info, or debug");
}

struct NullBuf : std::streambuf {
  int overflow(int c) override { return c; }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic optimization of perturbed finite sums"};
  app.require_subcommand(1);
  app.fallthrough();  // accept the global flags after the subcommand too

  std::string config_path, out_path, log_level = "info";
  int workers = 0;
  app.add_option("--out", out_path, "output path override");
  app.add_option("--workers", workers, "worker thread count override");
  app.add_option("--log-level", log_level, "quiet | info | debug");

  auto* run = app.add_subcommand("run", "run all (method, seed) cells, write CSV trace");
  run->add_option("config", config_path, "config file")->required();
  auto* variance = app.add_subcommand("variance", "perturbation variance report");
  variance->add_option("config", config_path, "config file")->required();
  auto* boundcheck = app.add_subcommand("boundcheck", "statistical convergence-bound checks");
  boundcheck->add_option("config", config_path, "config file")->required();
  auto* synth = app.add_subcommand("synth", "materialize a synthetic dataset");
  synth->add_option("spec", config_path, "config file with a synth data source")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  NullBuf null_buf;
  std::ostream null_stream(&null_buf);
  LogLevel level;
  try {
    level = parse_level(log_level);
  } catch (const CLI::Error& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  std::ostream& log = level == LogLevel::Quiet ? null_stream : std::cout;

  smiso::ExperimentConfig cfg;
  try {
    cfg = smiso::load_config_file(config_path);
    if (workers > 0) cfg.workers = workers;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (level == LogLevel::Debug)
      log << "config loaded: " << cfg.methods.size() << " methods, " << cfg.seeds.size()
          << " seeds, " << cfg.epochs << " epochs\n";
    if (*run) return smiso::cmd_run(cfg, out_path, log);
    if (*variance) return smiso::cmd_variance(cfg, std::cout);
    if (*boundcheck) return smiso::cmd_boundcheck(cfg, std::cout);
    if (*synth) {
      if (out_path.empty()) {
        std::cerr << "config error: synth needs --out <path>\n";
        return 1;
      }
      return smiso::cmd_synth(cfg, out_path, log);
    }
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
