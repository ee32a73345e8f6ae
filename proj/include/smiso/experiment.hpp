#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "smiso/config.hpp"
#include "smiso/diagnostics.hpp"

namespace smiso {

struct TraceRecord {
  std::string method;
  uint64_t seed = 0;
  int epoch = 0;
  double step_size = 0;
  double objective = 0;
  std::optional<double> objective_avg;
  std::optional<double> lyapunov;
  double suboptimality = 0;
  double wall_ms = 0;
};

struct RunResult {
  std::vector<TraceRecord> records;
  double best_objective = 0;
};

// Runs all (method, seed) cells; suboptimality uses the best objective
// observed across all cells of the run.
RunResult run_experiment(const ExperimentConfig& cfg);

// CSV schema: method,seed,epoch,step_size,objective,objective_avg,lyapunov,
// suboptimality,wall_ms. Missing diagnostics are empty fields.
std::string trace_to_csv(const RunResult& result);

int cmd_run(const ExperimentConfig& cfg, const std::string& out_override, std::ostream& log);
int cmd_variance(const ExperimentConfig& cfg, std::ostream& out);
int cmd_boundcheck(const ExperimentConfig& cfg, std::ostream& out);
int cmd_synth(const ExperimentConfig& cfg, const std::string& out_path, std::ostream& log);

}  // namespace smiso
