#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "smiso/data.hpp"
#include "smiso/model.hpp"
#include "smiso/rng.hpp"

namespace smiso {

enum class PerturbKind { None, Dropout, GaussianAdditive, UniformRescale };

struct PerturbationSpec {
  PerturbKind kind = PerturbKind::None;
  double param = 0;  // dropout delta, gaussian alpha, rescale half-width w
  uint64_t master_seed = 0;

  void validate() const {
    switch (kind) {
      case PerturbKind::None:
        break;
      case PerturbKind::Dropout:
        if (param < 0 || param >= 1) throw std::invalid_argument("dropout delta in [0,1)");
        break;
      case PerturbKind::GaussianAdditive:
        if (param < 0) throw std::invalid_argument("gaussian alpha must be >= 0");
        break;
      case PerturbKind::UniformRescale:
        if (param < 0 || param >= 1) throw std::invalid_argument("rescale w in [0,1)");
        break;
    }
  }
};

// One draw of xi^rho. The output keeps the input's storage layout (same index
// list for sparse inputs), so dropout/rescale preserve the sparsity support.
FeatureVector draw(const PerturbationSpec& spec, const FeatureVector& features,
                   CounterStream& stream);

// K pre-drawn perturbed copies per example; the pool average defines f_i
// exactly. Frozen after construction.
struct FinitePool {
  int K = 0;
  std::vector<std::vector<FeatureVector>> draws;  // draws[i][k]

  const FeatureVector& at(int i, int k) const { return draws[i][k]; }
};

FinitePool build_finite_pool(const Dataset& d, const PerturbationSpec& base, int K,
                             uint64_t seed);

// Table-style analytic ratio sigma_tot^2 / sigma_p^2, valid under the
// ||xi_i|| = 1 assumption. Returns nullopt (infinite ratio) when the
// perturbation is degenerate.
std::optional<double> analytic_ratio(const PerturbationSpec& spec);

// Exact f_i(x) on a pool: average over the K draws of phi(x' xi_i^k) plus the
// (mu/2)||x||^2 term.
double pool_component_value(const ProblemSpec& spec, const Dataset& d, const FinitePool& pool,
                            int i, const std::vector<double>& x);

// Exact grad f_i(x) on a pool.
std::vector<double> pool_component_grad(const ProblemSpec& spec, const Dataset& d,
                                        const FinitePool& pool, int i,
                                        const std::vector<double>& x);

// Exact F(x) = (1/n) sum f_i(x) + h(x) on a pool.
double pool_full_objective(const ProblemSpec& spec, const Dataset& d, const FinitePool& pool,
                           const std::vector<double>& x);

// Exact grad f(x) (smooth part) on a pool.
std::vector<double> pool_full_grad(const ProblemSpec& spec, const Dataset& d,
                                   const FinitePool& pool, const std::vector<double>& x);

// Monte Carlo objective estimate with k draws per example; deterministic in
// seed.
double mc_full_objective(const ProblemSpec& spec, const Dataset& d, const PerturbationSpec& pert,
                         const std::vector<double>& x, int k, uint64_t seed);

}  // namespace smiso
