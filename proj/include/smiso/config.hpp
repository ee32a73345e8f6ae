#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smiso/data.hpp"
#include "smiso/perturb.hpp"
#include "smiso/schedule.hpp"

namespace smiso {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DataSourceKind { Libsvm, DenseCsv, SynthGaussian, SynthHeterogeneous };

struct DataSource {
  DataSourceKind kind = DataSourceKind::SynthGaussian;
  std::string path;
  int n = 100;
  int dim = 10;
  uint64_t seed = 0;
  double spread = 1.0;
};

struct MethodEntry {
  Method method = Method::Smiso;
  double eta = 1.0;
  ScheduleMode mode = ScheduleMode::Tuned;
  int warmup_epochs = 2;
};

// Parsed from the line-oriented "key = value" config with repeated [method]
// blocks. Every field is validated before a run starts; unknown keys are
// rejected.
struct ExperimentConfig {
  DataSource data;
  bool normalize = false;
  LossKind loss = LossKind::Logistic;
  double mu = 1e-2;
  double l1_weight = 0.0;
  PerturbationSpec perturb;
  int pool_size = 0;  // > 0 selects FinitePool mode
  std::vector<MethodEntry> methods;
  int epochs = 10;
  std::vector<uint64_t> seeds = {0};
  bool averaging = false;
  int estimate_k = 5;
  uint64_t estimate_seed = 12345;
  bool lyapunov = false;  // log diagnostics (FinitePool mode only)
  std::string output = "trace.csv";
  int workers = 1;

  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

Dataset materialize_dataset(const ExperimentConfig& cfg);

}  // namespace smiso
