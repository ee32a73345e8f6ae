#include "smiso/perturb.hpp"

#include <cmath>

namespace smiso {

FeatureVector draw(const PerturbationSpec& spec, const FeatureVector& features,
                   CounterStream& stream) {
  spec.validate();
  FeatureVector out = features;
  switch (spec.kind) {
    case PerturbKind::None:
      break;
    case PerturbKind::Dropout: {
      double delta = spec.param;
      if (delta == 0) break;
      double keep_scale = 1.0 / (1.0 - delta);
      for (double& v : out.values) v = stream.next_uniform() < delta ? 0.0 : v * keep_scale;
      break;
    }
    case PerturbKind::GaussianAdditive: {
      if (features.sparse)
        throw std::invalid_argument("gaussian_additive requires dense features");
      // total noise energy alpha^2, split across coordinates, so the
      // analytic 1 + 1/alpha^2 ratio applies to unit-norm features
      double sd = spec.param / std::sqrt(static_cast<double>(out.dim));
      for (double& v : out.values) v += sd * stream.next_normal();
      break;
    }
    case PerturbKind::UniformRescale: {
      double s = stream.next_uniform(1.0 - spec.param, 1.0 + spec.param);
      out.scale(s);
      break;
    }
  }
  return out;
}

FinitePool build_finite_pool(const Dataset& d, const PerturbationSpec& base, int K,
                             uint64_t seed) {
  if (K < 1) throw std::invalid_argument("pool size K must be >= 1");
  FinitePool pool;
  pool.K = K;
  pool.draws.resize(d.n());
  for (int i = 0; i < d.n(); ++i) {
    pool.draws[i].reserve(K);
    for (int k = 0; k < K; ++k) {
      CounterStream s(seed, static_cast<uint64_t>(i), StreamPurpose::PoolBuild,
                      static_cast<uint64_t>(k));
      pool.draws[i].push_back(draw(base, d.samples[i].features, s));
    }
  }
  return pool;
}

std::optional<double> analytic_ratio(const PerturbationSpec& spec) {
  switch (spec.kind) {
    case PerturbKind::None:
      return std::nullopt;
    case PerturbKind::Dropout:
      // exact for unit-norm features: within-example variance is
      // delta/(1-delta) ||xi||^2 against a between-example term of ||xi||^2
      if (spec.param == 0) return std::nullopt;
      return 1.0 / spec.param;
    case PerturbKind::GaussianAdditive:
      if (spec.param == 0) return std::nullopt;
      return 1.0 + 1.0 / (spec.param * spec.param);
    case PerturbKind::UniformRescale:
      if (spec.param == 0) return std::nullopt;
      return 1.0 + 3.0 / (spec.param * spec.param);
  }
  return std::nullopt;
}

double pool_component_value(const ProblemSpec& spec, const Dataset& d, const FinitePool& pool,
                            int i, const std::vector<double>& x) {
  double s = 0;
  for (int k = 0; k < pool.K; ++k)
    s += loss_value(spec.loss, d.samples[i].label, pool.at(i, k).dot(x));
  return s / pool.K + 0.5 * spec.mu * squared_norm(x);
}

std::vector<double> pool_component_grad(const ProblemSpec& spec, const Dataset& d,
                                        const FinitePool& pool, int i,
                                        const std::vector<double>& x) {
  std::vector<double> g(x.size());
  for (size_t j = 0; j < x.size(); ++j) g[j] = spec.mu * x[j];
  for (int k = 0; k < pool.K; ++k) {
    const FeatureVector& xi = pool.at(i, k);
    double dphi = loss_deriv(spec.loss, d.samples[i].label, xi.dot(x));
    xi.add_to(dphi / pool.K, g);
  }
  return g;
}

double pool_full_objective(const ProblemSpec& spec, const Dataset& d, const FinitePool& pool,
                           const std::vector<double>& x) {
  double s = 0;
  for (int i = 0; i < d.n(); ++i)
    for (int k = 0; k < pool.K; ++k)
      s += loss_value(spec.loss, d.samples[i].label, pool.at(i, k).dot(x));
  return s / (d.n() * pool.K) + regularizer_value(spec, x);
}

std::vector<double> pool_full_grad(const ProblemSpec& spec, const Dataset& d,
                                   const FinitePool& pool, const std::vector<double>& x) {
  std::vector<double> g(x.size());
  for (size_t j = 0; j < x.size(); ++j) g[j] = spec.mu * x[j];
  double w = 1.0 / (d.n() * pool.K);
  for (int i = 0; i < d.n(); ++i)
    for (int k = 0; k < pool.K; ++k) {
      const FeatureVector& xi = pool.at(i, k);
      double dphi = loss_deriv(spec.loss, d.samples[i].label, xi.dot(x));
      xi.add_to(w * dphi, g);
    }
  return g;
}

double mc_full_objective(const ProblemSpec& spec, const Dataset& d, const PerturbationSpec& pert,
                         const std::vector<double>& x, int k, uint64_t seed) {
  if (k < 1) throw std::invalid_argument("mc_full_objective: k must be >= 1");
  double s = 0;
  for (int i = 0; i < d.n(); ++i) {
    for (int j = 0; j < k; ++j) {
      CounterStream stream(seed, static_cast<uint64_t>(i), StreamPurpose::ObjectiveEstimate,
                           static_cast<uint64_t>(j));
      FeatureVector xi = draw(pert, d.samples[i].features, stream);
      s += loss_value(spec.loss, d.samples[i].label, xi.dot(x));
    }
  }
  return s / (d.n() * k) + regularizer_value(spec, x);
}

}  // namespace smiso
