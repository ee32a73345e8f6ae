#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "smiso/data.hpp"
#include "smiso/model.hpp"
#include "smiso/perturb.hpp"
#include "smiso/schedule.hpp"

namespace smiso {

// Source of perturbed examples: streaming draws from a PerturbationSpec, or
// uniform picks from a frozen FinitePool. Draws are keyed by
// (seed, example, visit counter), so paired method comparisons share noise.
struct PerturbSource {
  PerturbationSpec spec;
  const FinitePool* pool = nullptr;
  uint64_t seed = 0;

  FeatureVector draw_for(const Dataset& d, int i, uint64_t visit) const;
};

struct SolverState {
  Method method = Method::Smiso;
  uint64_t seed = 0;
  long t = 0;
  std::vector<double> x;
  // S-MISO family: z_i values aligned with the example's feature storage
  // (index list for sparse data), plus the running mean z_bar.
  std::vector<std::vector<double>> z_vals;
  std::vector<double> z_bar;
  // N-SAGA: dense stored gradients and their mean.
  std::vector<std::vector<double>> mem_grad;
  std::vector<double> mem_mean;
  // per-example perturbation visit counters
  std::vector<uint64_t> visits;

  // Exact recomputation of z_bar (and x) from the z table; called at epoch
  // boundaries to bound incremental drift.
  void resync(const ProblemSpec& spec, const Dataset& d);
};

SolverState init_state(Method method, const ProblemSpec& spec, const Dataset& d, uint64_t seed);

// Uniform index for step t, shared across methods with the same seed.
int sample_index_uniform(uint64_t seed, long t, int n);
int sample_index(uint64_t seed, long t, const SamplingDist& q);

// Information about the last step, for diagnostics run in lockstep.
struct StepInfo {
  int index = -1;
  uint64_t visit = 0;
  double alpha_eff = 0;       // step actually applied (alpha_t / (q_i n) for NU)
  double step_size = 0;       // schedule value at t
  FeatureVector perturbed;    // the drawn xi^rho
};

StepInfo smiso_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                    const PerturbSource& pert, const StepSchedule& sched);
StepInfo smiso_composite_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                              const PerturbSource& pert, const StepSchedule& sched,
                              const SamplingDist& q);
StepInfo sgd_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                  const PerturbSource& pert, const StepSchedule& sched);
StepInfo prox_sgd_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                       const PerturbSource& pert, const StepSchedule& sched);
StepInfo sgd_nu_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                     const PerturbSource& pert, const StepSchedule& sched,
                     const SamplingDist& q);
StepInfo nsaga_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                    const PerturbSource& pert, const StepSchedule& sched);

StepInfo take_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                   const PerturbSource& pert, const StepSchedule& sched,
                   const SamplingDist* q);

struct EpochInfo {
  int epoch = 0;
  double step_size = 0;                      // schedule value at the next step
  const SolverState* state = nullptr;
  const std::vector<double>* x_avg = nullptr;  // averaged iterate, if active
};

using EpochCallback = std::function<void(const EpochInfo&)>;
using StepCallback = std::function<void(const SolverState&, const StepInfo&)>;

struct RunConfig {
  Method method = Method::Smiso;
  int epochs = 0;
  uint64_t seed = 0;
  bool averaging = false;
  const SamplingDist* q = nullptr;
  StepCallback on_step;  // optional, invoked after every step
};

// Executes epochs * n steps, invoking the callback at every epoch boundary
// (including epoch 0 before any step). Deterministic given all seeds.
void run_epochs(const RunConfig& cfg, const ProblemSpec& spec, const Dataset& d,
                const PerturbSource& pert, const StepSchedule& sched,
                const EpochCallback& cb);

// Constant-step schedule helper (used for N-SAGA and theory checks).
StepSchedule constant_schedule(Method method, double step);

}  // namespace smiso
