#pragma once

#include <optional>
#include <vector>

#include "smiso/perturb.hpp"
#include "smiso/schedule.hpp"
#include "smiso/solvers.hpp"

namespace smiso {

// High-precision optimum of a FinitePool problem, with the per-example
// centers z_i* = x* - grad f_i(x*)/mu used by the Lyapunov diagnostics.
struct ReferenceSolution {
  std::vector<double> x_star;
  double F_star = 0;
  std::vector<std::vector<double>> z_star;
  double residual = 0;
  bool converged = false;
};

// Accelerated proximal gradient on the exact pool objective until the
// optimality residual (prox-mapped gradient norm) drops below tol.
ReferenceSolution reference_solve(const ProblemSpec& spec, const Dataset& d,
                                  const FinitePool& pool, double tol = 1e-12,
                                  long max_iter = 2000000);

enum class VarianceMode { ExactPool, FeatureProxy };

struct VarianceReport {
  double sigma_p_sq = 0;
  double sigma_tot_sq = 0;
  std::vector<double> sigma_i_sq;
  std::optional<double> sigma_q_sq;
  std::optional<double> ratio;  // sigma_tot^2 / sigma_p^2; nullopt when sigma_p = 0
  VarianceMode mode = VarianceMode::ExactPool;
};

// Exact gradient variances at x* over the pool.
VarianceReport estimate_variances(const ProblemSpec& spec, const Dataset& d,
                                  const FinitePool& pool, const ReferenceSolution& ref,
                                  const SamplingDist* q = nullptr);

// Feature-space proxy for sigma_tot^2 / sigma_p^2: total feature variance
// across examples and draws over the mean within-example variance. Returns
// nullopt when the within-example variance is zero.
std::optional<double> feature_variance_ratio(const Dataset& d, const PerturbationSpec& pert,
                                             int k_draws, uint64_t seed);

struct LyapunovValue {
  double value = 0;
  double iterate_term = 0;
  double z_term = 0;
};

// C_t = (1/2)||x_t - x*||^2 + (alpha_t/n^2) sum_i ||z_i^t - z_i*||^2
LyapunovValue lyapunov_smooth(const SolverState& s, const Dataset& d,
                              const ReferenceSolution& ref, double alpha_t);

// C_t^q = F(x*) - D_t(x_t) + (mu alpha_t/n^2) sum_i ||z_i^t - z_i*||^2 / (q_i n)
LyapunovValue lyapunov_composite(const SolverState& s, const ProblemSpec& spec, const Dataset& d,
                                 const ReferenceSolution& ref, double alpha_t,
                                 const SamplingDist& q, double D_t_at_x_t);

// Tracks the per-example quadratic minorants d_i^t(x) = c_i + (mu/2)||x - z_i||^2
// in lockstep with a solver run; D_t(x) = (1/n) sum_i d_i^t(x) + h(x).
class LowerBoundTracker {
 public:
  LowerBoundTracker(const ProblemSpec& spec, const Dataset& d);

  // Must be fed the solver's own (i_t, xi^rho, alpha_eff) with the pre-step
  // iterate; enforced by a step counter.
  void update(long t, int index, const FeatureVector& perturbed,
              const std::vector<double>& x_prev, double alpha_eff);

  double evaluate(const std::vector<double>& x) const;
  // argmin of the quadratic part; equals z_bar (valid for h = 0)
  std::vector<double> argmin_smooth() const;
  long t() const { return t_; }

 private:
  const ProblemSpec spec_;
  const Dataset* d_;
  long t_ = 0;
  std::vector<std::vector<double>> z_;  // aligned with feature storage
  std::vector<double> z_bar_;
  std::vector<double> c_i_;   // per-example offsets
  double c_bar_ = 0;          // (1/n) sum c_i
  double z_sq_mean_ = 0;      // (1/n) sum ||z_i||^2
};

// Estimate of the training objective with k sampled perturbations per
// example; a fixed seed pairs the estimate across methods and epochs.
double objective_estimate(const ProblemSpec& spec, const Dataset& d,
                          const std::vector<double>& x, const PerturbationSpec& pert, int k,
                          uint64_t seed);

// nu = max{8 sigma_p^2 / mu^2, (gamma + 1) C_0}
double theorem2_nu(double gamma, double C0, double sigma_p_sq, double mu);
bool theorem2_bound_holds(double C_t, long t, double nu, double gamma, double slack = 1.0);

}  // namespace smiso
