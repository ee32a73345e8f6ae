#include "smiso/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace smiso {

FeatureVector PerturbSource::draw_for(const Dataset& d, int i, uint64_t visit) const {
  CounterStream stream(seed, static_cast<uint64_t>(i), StreamPurpose::Perturbation, visit);
  if (pool) return pool->at(i, static_cast<int>(stream.next_below(pool->K)));
  return draw(spec, d.samples[i].features, stream);
}

void SolverState::resync(const ProblemSpec& spec, const Dataset& d) {
  if (!is_smiso_family(method)) return;
  std::fill(z_bar.begin(), z_bar.end(), 0.0);
  int n = d.n();
  for (int i = 0; i < n; ++i) {
    const FeatureVector& fv = d.samples[i].features;
    const auto& z = z_vals[i];
    if (fv.sparse) {
      for (size_t k = 0; k < fv.indices.size(); ++k) z_bar[fv.indices[k]] += z[k] / n;
    } else {
      for (size_t k = 0; k < z.size(); ++k) z_bar[k] += z[k] / n;
    }
  }
  if (spec.composite())
    prox_l1_inplace(z_bar, spec.l1_weight / spec.mu, x);
  else
    x = z_bar;
}

SolverState init_state(Method method, const ProblemSpec& spec, const Dataset& d, uint64_t seed) {
  spec.validate();
  SolverState s;
  s.method = method;
  s.seed = seed;
  s.x.assign(d.dim, 0.0);
  s.visits.assign(d.n(), 0);
  if (is_smiso_family(method)) {
    s.z_bar.assign(d.dim, 0.0);
    s.z_vals.resize(d.n());
    for (int i = 0; i < d.n(); ++i)
      s.z_vals[i].assign(d.samples[i].features.values.size(), 0.0);
  } else if (method == Method::Nsaga) {
    s.mem_grad.assign(d.n(), std::vector<double>(d.dim, 0.0));
    s.mem_mean.assign(d.dim, 0.0);
  }
  return s;
}

int sample_index_uniform(uint64_t seed, long t, int n) {
  CounterStream stream(seed, 0, StreamPurpose::Sampling, static_cast<uint64_t>(t));
  return static_cast<int>(stream.next_below(static_cast<uint64_t>(n)));
}

int sample_index(uint64_t seed, long t, const SamplingDist& q) {
  CounterStream stream(seed, 0, StreamPurpose::Sampling, static_cast<uint64_t>(t));
  return q.sample(stream);
}

namespace {

// z_i update shared by the smooth and composite paths: for our model class,
// x - grad/mu collapses to -(1/mu) phi' xi^rho, so the update is
// z_i <- (1 - a) z_i - (a/mu) phi'(x' xi^rho) xi^rho with support inside the
// perturbed example's. Applies the delta to z_bar incrementally.
void apply_z_update(SolverState& s, const ProblemSpec& spec, const Dataset& d, int i,
                    const FeatureVector& xi, double a, bool mirror_into_x) {
  double dphi = loss_deriv(spec.loss, d.samples[i].label, xi.dot(s.x));
  double c = -a / spec.mu * dphi;
  auto& z = s.z_vals[i];
  const int n = d.n();
  const bool sparse = xi.sparse;
  for (size_t k = 0; k < z.size(); ++k) {
    double zn = (1.0 - a) * z[k] + c * xi.values[k];
    double delta = zn - z[k];
    z[k] = zn;
    int j = sparse ? xi.indices[k] : static_cast<int>(k);
    s.z_bar[j] += delta / n;
    if (mirror_into_x) s.x[j] += delta / n;
  }
}

}  // namespace

StepInfo smiso_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                    const PerturbSource& pert, const StepSchedule& sched) {
  long t = ++s.t;
  double alpha = sched.step_at(t);
  if (alpha <= 0 || alpha > 1) throw std::runtime_error("smiso: alpha_t must be in (0, 1]");
  StepInfo info;
  info.step_size = alpha;
  info.alpha_eff = alpha;
  info.index = sample_index_uniform(s.seed, t, d.n());
  info.visit = s.visits[info.index]++;
  info.perturbed = pert.draw_for(d, info.index, info.visit);
  apply_z_update(s, spec, d, info.index, info.perturbed, alpha, true);
  return info;
}

StepInfo smiso_composite_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                              const PerturbSource& pert, const StepSchedule& sched,
                              const SamplingDist& q) {
  long t = ++s.t;
  double alpha = sched.step_at(t);
  StepInfo info;
  info.step_size = alpha;
  info.index = sample_index(s.seed, t, q);
  double a = q.uniform ? alpha : alpha / (q.q[info.index] * d.n());
  if (a <= 0 || a > 1) throw std::runtime_error("smiso: effective alpha_t^i must be in (0, 1]");
  info.alpha_eff = a;
  info.visit = s.visits[info.index]++;
  info.perturbed = pert.draw_for(d, info.index, info.visit);
  apply_z_update(s, spec, d, info.index, info.perturbed, a, false);
  prox_l1_inplace(s.z_bar, spec.l1_weight / spec.mu, s.x);
  return info;
}

namespace {

StepInfo sgd_like_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                       const PerturbSource& pert, const StepSchedule& sched,
                       const SamplingDist* q, bool prox) {
  long t = ++s.t;
  double eta = sched.step_at(t);
  if (eta <= 0) throw std::runtime_error("sgd: step size must be positive");
  StepInfo info;
  info.step_size = eta;
  if (q) {
    info.index = sample_index(s.seed, t, *q);
    if (!q->uniform) eta = eta / (q->q[info.index] * d.n());
  } else {
    info.index = sample_index_uniform(s.seed, t, d.n());
  }
  info.alpha_eff = eta;
  info.visit = s.visits[info.index]++;
  info.perturbed = pert.draw_for(d, info.index, info.visit);
  double dphi = loss_deriv(spec.loss, d.samples[info.index].label, info.perturbed.dot(s.x));
  double coef = 1.0 - eta * spec.mu;
  for (double& v : s.x) v *= coef;
  info.perturbed.add_to(-eta * dphi, s.x);
  if (prox && spec.l1_weight > 0) prox_l1_inplace(s.x, eta * spec.l1_weight, s.x);
  return info;
}

}  // namespace

StepInfo sgd_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                  const PerturbSource& pert, const StepSchedule& sched) {
  return sgd_like_step(s, spec, d, pert, sched, nullptr, false);
}

StepInfo prox_sgd_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                       const PerturbSource& pert, const StepSchedule& sched) {
  return sgd_like_step(s, spec, d, pert, sched, nullptr, true);
}

StepInfo sgd_nu_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                     const PerturbSource& pert, const StepSchedule& sched,
                     const SamplingDist& q) {
  return sgd_like_step(s, spec, d, pert, sched, &q, false);
}

StepInfo nsaga_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                    const PerturbSource& pert, const StepSchedule& sched) {
  long t = ++s.t;
  double eta = sched.step_at(t);
  if (eta <= 0) throw std::runtime_error("nsaga: step size must be positive");
  StepInfo info;
  info.step_size = eta;
  info.alpha_eff = eta;
  info.index = sample_index_uniform(s.seed, t, d.n());
  info.visit = s.visits[info.index]++;
  info.perturbed = pert.draw_for(d, info.index, info.visit);
  std::vector<double> g = perturbed_grad(spec, s.x, d.samples[info.index].label, info.perturbed);
  auto& mem = s.mem_grad[info.index];
  const int n = d.n();
  for (size_t j = 0; j < s.x.size(); ++j) {
    double dir = g[j] - mem[j] + s.mem_mean[j];
    s.x[j] -= eta * dir;
    s.mem_mean[j] += (g[j] - mem[j]) / n;
    mem[j] = g[j];
  }
  s.mem_grad[info.index] = std::move(g);
  return info;
}

StepInfo take_step(SolverState& s, const ProblemSpec& spec, const Dataset& d,
                   const PerturbSource& pert, const StepSchedule& sched,
                   const SamplingDist* q) {
  switch (s.method) {
    case Method::Smiso:
      return smiso_step(s, spec, d, pert, sched);
    case Method::SmisoNU:
      if (!q) throw std::invalid_argument("smiso_nu needs a sampling distribution");
      return smiso_composite_step(s, spec, d, pert, sched, *q);
    case Method::Sgd:
      return sgd_step(s, spec, d, pert, sched);
    case Method::SgdNU:
      if (!q) throw std::invalid_argument("sgd_nu needs a sampling distribution");
      return sgd_nu_step(s, spec, d, pert, sched, *q);
    case Method::ProxSgd:
      return prox_sgd_step(s, spec, d, pert, sched);
    case Method::Nsaga:
      return nsaga_step(s, spec, d, pert, sched);
  }
  throw std::logic_error("unreachable");
}

StepSchedule constant_schedule(Method method, double step) {
  StepSchedule s;
  s.method = method;
  s.abar = step;
  s.C = 0;
  return s;
}

void run_epochs(const RunConfig& cfg, const ProblemSpec& spec, const Dataset& d,
                const PerturbSource& pert, const StepSchedule& sched,
                const EpochCallback& cb) {
  SolverState s = init_state(cfg.method, spec, d, cfg.seed);
  // Composite smiso always routes through the composite step; plain smiso
  // uses the smooth path (requires l1_weight = 0).
  const SamplingDist* q = cfg.q;
  if (cfg.method == Method::Smiso && spec.composite())
    throw std::invalid_argument("composite objectives require smiso_nu (Algorithm 2)");

  std::optional<AveragingAccumulator> acc;
  long avg_start = sched.t0;  // feed x_t for t >= decay switch
  if (cfg.averaging && sched.C != 0) {
    double gamma_avg = std::max(1.0, sched.gamma + static_cast<double>(sched.t0));
    acc.emplace(gamma_avg);
    if (avg_start == 0) acc->add(s.x);
  }

  std::vector<double> x_avg;
  auto emit = [&](int epoch) {
    EpochInfo info;
    info.epoch = epoch;
    info.step_size = sched.step_at(std::max<long>(1, static_cast<long>(epoch) * d.n()));
    info.state = &s;
    if (acc && acc->count() > 0) {
      x_avg = acc->result();
      info.x_avg = &x_avg;
    }
    if (cb) cb(info);
  };

  emit(0);
  long n = d.n();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (long k = 0; k < n; ++k) {
      StepInfo si = take_step(s, spec, d, pert, sched, q);
      if (cfg.on_step) cfg.on_step(s, si);
      if (acc && s.t >= std::max<long>(avg_start, 1)) acc->add(s.x);
    }
    s.resync(spec, d);
    emit(epoch);
  }
}

}  // namespace smiso
