#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "smiso/diagnostics.hpp"
#include "smiso/solvers.hpp"

using namespace smiso;

namespace {

PerturbSource no_perturb(uint64_t seed) {
  PerturbSource p;
  p.seed = seed;
  return p;
}

std::vector<double> dense_z_bar(const SolverState& s, const Dataset& d) {
  std::vector<double> zb(d.dim, 0.0);
  for (int i = 0; i < d.n(); ++i) {
    const FeatureVector& fv = d.samples[i].features;
    for (size_t k = 0; k < s.z_vals[i].size(); ++k) {
      int j = fv.sparse ? fv.indices[k] : static_cast<int>(k);
      zb[j] += s.z_vals[i][k] / d.n();
    }
  }
  return zb;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

}  // namespace

TEST_CASE("hand-traced first step") {
  // orthonormal examples, squared hinge, mu = 1, x0 = 0, alpha = 1/2:
  // phi'(0) = -1, so z_i becomes xi_i/2 and x = z_bar = xi_i/4.
  Dataset d = parse_dense_csv("1,0,1\n0,1,1\n");
  ProblemSpec spec{LossKind::SquaredHinge, 1.0, 0.0};
  SolverState s = init_state(Method::Smiso, spec, d, 3);
  StepSchedule sched = constant_schedule(Method::Smiso, 0.5);
  StepInfo info = smiso_step(s, spec, d, no_perturb(3), sched);
  int i = info.index;
  CHECK(s.z_vals[i][i] == doctest::Approx(0.5));
  CHECK(s.z_vals[1 - i][1 - i] == 0.0);
  CHECK(s.x[i] == doctest::Approx(0.25));
  CHECK(s.x[1 - i] == 0.0);
}

TEST_CASE("smiso step matches the textbook z-update") {
  // the solver's collapsed sparse update vs the dense formula
  // z_i <- (1 - a) z_i + a (x - grad f~_i(x)/mu), x = mean_i z_i
  Dataset d = normalize_l2(synth_gaussian(5, 6, 21));
  ProblemSpec spec{LossKind::Logistic, 0.2, 0.0};
  PerturbSource pert;
  pert.spec = {PerturbKind::Dropout, 0.3, 11};
  pert.seed = 11;
  SolverState s = init_state(Method::Smiso, spec, d, 11);
  StepSchedule sched = constant_schedule(Method::Smiso, 0.4);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x_prev = s.x;
    std::vector<std::vector<double>> z_prev = s.z_vals;
    StepInfo info = smiso_step(s, spec, d, pert, sched);
    int i = info.index;
    std::vector<double> g =
        perturbed_grad(spec, x_prev, d.samples[i].label, info.perturbed);
    std::vector<double> z_expect(d.dim);
    for (int j = 0; j < d.dim; ++j)
      z_expect[j] = (1 - 0.4) * z_prev[i][j] + 0.4 * (x_prev[j] - g[j] / spec.mu);
    CHECK(max_abs_diff(s.z_vals[i], z_expect) < 1e-12);
    CHECK(max_abs_diff(s.x, dense_z_bar(s, d)) < 1e-12);
  }
}

TEST_CASE("n = 1 reduces to sgd with eta = alpha/mu") {
  Dataset d = parse_dense_csv("0.6,0.8,1\n");
  ProblemSpec spec{LossKind::Logistic, 0.5, 0.0};
  const double alpha = 0.3;
  SolverState a = init_state(Method::Smiso, spec, d, 7);
  SolverState b = init_state(Method::Sgd, spec, d, 7);
  StepSchedule sa = constant_schedule(Method::Smiso, alpha);
  StepSchedule sb = constant_schedule(Method::Sgd, alpha / spec.mu);
  PerturbSource pert;
  pert.spec = {PerturbKind::Dropout, 0.4, 7};
  pert.seed = 7;
  for (int t = 0; t < 200; ++t) {
    smiso_step(a, spec, d, pert, sa);
    sgd_step(b, spec, d, pert, sb);
    CHECK(max_abs_diff(a.x, b.x) < 1e-12);
  }
}

TEST_CASE("uniform-q composite path reproduces the smooth path exactly") {
  Dataset d = normalize_l2(synth_gaussian(8, 5, 2));
  ProblemSpec spec{LossKind::Logistic, 0.1, 0.0};
  SmoothnessInfo sm = smoothness_constants(d, spec.loss, spec.mu);
  SamplingDist u = uniform_dist(d.n(), sm.L, spec.mu);
  SolverState a = init_state(Method::Smiso, spec, d, 5);
  SolverState b = init_state(Method::SmisoNU, spec, d, 5);
  StepSchedule sched = constant_schedule(Method::Smiso, 0.25);
  PerturbSource pert;
  pert.spec = {PerturbKind::Dropout, 0.2, 5};
  pert.seed = 5;
  for (int t = 0; t < 200; ++t) {
    StepInfo ia = smiso_step(a, spec, d, pert, sched);
    StepInfo ib = smiso_composite_step(b, spec, d, pert, sched, u);
    CHECK(ia.index == ib.index);  // same index stream
    CHECK(max_abs_diff(a.x, b.x) == 0.0);
  }
}

TEST_CASE("optimum is a fixed point when sigma_p = 0") {
  Dataset d = normalize_l2(synth_gaussian(10, 4, 9));
  ProblemSpec spec{LossKind::Logistic, 0.2, 0.0};
  PerturbationSpec none;
  FinitePool pool = build_finite_pool(d, none, 1, 0);
  ReferenceSolution ref = reference_solve(spec, d, pool, 1e-14);
  REQUIRE(ref.converged);

  SolverState s = init_state(Method::Smiso, spec, d, 1);
  s.x = ref.x_star;
  for (int i = 0; i < d.n(); ++i) s.z_vals[i] = ref.z_star[i];
  s.resync(spec, d);
  CHECK(max_abs_diff(s.x, ref.x_star) < 1e-10);

  StepSchedule sched = constant_schedule(Method::Smiso, 0.5);
  PerturbSource pert = no_perturb(1);
  for (int t = 0; t < 3 * d.n(); ++t) smiso_step(s, spec, d, pert, sched);
  CHECK(max_abs_diff(s.x, ref.x_star) < 1e-10);
}

TEST_CASE("prox_sgd with no l1 equals sgd exactly") {
  Dataset d = normalize_l2(synth_gaussian(6, 5, 4));
  ProblemSpec spec{LossKind::Logistic, 0.1, 0.0};
  SolverState a = init_state(Method::Sgd, spec, d, 2);
  SolverState b = init_state(Method::ProxSgd, spec, d, 2);
  StepSchedule sched = constant_schedule(Method::Sgd, 0.5);
  PerturbSource pert;
  pert.spec = {PerturbKind::Dropout, 0.3, 2};
  pert.seed = 2;
  for (int t = 0; t < 100; ++t) {
    sgd_step(a, spec, d, pert, sched);
    prox_sgd_step(b, spec, d, pert, sched);
    CHECK(a.x == b.x);
  }
}

TEST_CASE("sgd_nu with uniform q equals sgd exactly") {
  Dataset d = normalize_l2(synth_gaussian(6, 5, 4));
  ProblemSpec spec{LossKind::Logistic, 0.1, 0.0};
  SmoothnessInfo sm = smoothness_constants(d, spec.loss, spec.mu);
  SamplingDist u = uniform_dist(d.n(), sm.L, spec.mu);
  SolverState a = init_state(Method::Sgd, spec, d, 8);
  SolverState b = init_state(Method::SgdNU, spec, d, 8);
  StepSchedule sched = constant_schedule(Method::Sgd, 0.5);
  PerturbSource pert;
  pert.spec = {PerturbKind::Dropout, 0.3, 8};
  pert.seed = 8;
  for (int t = 0; t < 100; ++t) {
    sgd_step(a, spec, d, pert, sched);
    sgd_nu_step(b, spec, d, pert, sched, u);
    CHECK(a.x == b.x);
  }
}

TEST_CASE("nsaga keeps its gradient table consistent") {
  Dataset d = normalize_l2(synth_gaussian(7, 4, 6));
  ProblemSpec spec{LossKind::Logistic, 0.1, 0.0};
  SolverState s = init_state(Method::Nsaga, spec, d, 3);
  StepSchedule sched = constant_schedule(Method::Nsaga, 0.5);
  PerturbSource pert;
  pert.spec = {PerturbKind::Dropout, 0.2, 3};
  pert.seed = 3;
  for (int t = 0; t < 100; ++t) nsaga_step(s, spec, d, pert, sched);
  std::vector<double> mean(d.dim, 0.0);
  for (int i = 0; i < d.n(); ++i)
    for (int j = 0; j < d.dim; ++j) mean[j] += s.mem_grad[i][j] / d.n();
  CHECK(max_abs_diff(mean, s.mem_mean) < 1e-12);
}

TEST_CASE("paired index streams across methods") {
  for (long t = 1; t < 50; ++t)
    CHECK(sample_index_uniform(4, t, 13) == sample_index_uniform(4, t, 13));
  // the same (seed, t) gives each method the same index
  Dataset d = normalize_l2(synth_gaussian(5, 3, 1));
  ProblemSpec spec{LossKind::Logistic, 0.1, 0.0};
  SolverState a = init_state(Method::Smiso, spec, d, 6);
  SolverState b = init_state(Method::Nsaga, spec, d, 6);
  StepSchedule sa = constant_schedule(Method::Smiso, 0.3);
  StepSchedule sb = constant_schedule(Method::Nsaga, 0.1);
  PerturbSource pert = no_perturb(6);
  for (int t = 0; t < 50; ++t) {
    StepInfo ia = smiso_step(a, spec, d, pert, sa);
    StepInfo ib = nsaga_step(b, spec, d, pert, sb);
    CHECK(ia.index == ib.index);
    CHECK(ia.visit == ib.visit);
  }
}

TEST_CASE("run_epochs emits epoch 0 and is deterministic") {
  Dataset d = normalize_l2(synth_gaussian(6, 4, 8));
  ProblemSpec spec{LossKind::Logistic, 0.1, 0.0};
  SmoothnessInfo sm = smoothness_constants(d, spec.loss, spec.mu);
  ScheduleConfig sc{Method::Smiso, ScheduleMode::Theory, 1.0, 1, false};
  StepSchedule sched = make_schedule(sc, d.n(), spec.mu, sm);
  PerturbSource pert;
  pert.spec = {PerturbKind::Dropout, 0.3, 9};
  pert.seed = 9;

  auto collect = [&](uint64_t seed, int epochs) {
    RunConfig rc;
    rc.method = Method::Smiso;
    rc.epochs = epochs;
    rc.seed = seed;
    PerturbSource ps = pert;
    ps.seed = seed;
    std::vector<int> epochs_seen;
    std::vector<double> final_x;
    run_epochs(rc, spec, d, ps, sched, [&](const EpochInfo& info) {
      epochs_seen.push_back(info.epoch);
      final_x = info.state->x;
    });
    return std::make_pair(epochs_seen, final_x);
  };

  auto [e1, x1] = collect(9, 3);
  CHECK(e1 == std::vector<int>{0, 1, 2, 3});
  auto [e2, x2] = collect(9, 3);
  CHECK(x1 == x2);
  auto [e3, x3] = collect(10, 3);
  CHECK(x1 != x3);
  auto [e0, x0] = collect(9, 0);
  CHECK(e0 == std::vector<int>{0});
  CHECK(x0 == std::vector<double>(d.dim, 0.0));
}

TEST_CASE("guard rails") {
  Dataset d = normalize_l2(synth_gaussian(4, 3, 1));
  ProblemSpec composite{LossKind::Logistic, 0.1, 0.01};
  RunConfig rc;
  rc.method = Method::Smiso;
  rc.epochs = 1;
  PerturbSource pert = no_perturb(0);
  StepSchedule sched = constant_schedule(Method::Smiso, 0.3);
  CHECK_THROWS(run_epochs(rc, composite, d, pert, sched, nullptr));

  ProblemSpec spec{LossKind::Logistic, 0.1, 0.0};
  SolverState s = init_state(Method::Smiso, spec, d, 0);
  StepSchedule bad = constant_schedule(Method::Smiso, 1.5);  // not a convex combination
  CHECK_THROWS(smiso_step(s, spec, d, pert, bad));

  SolverState s2 = init_state(Method::SmisoNU, spec, d, 0);
  CHECK_THROWS(take_step(s2, spec, d, pert, sched, nullptr));  // needs q
}

TEST_CASE("sparse runs keep z_bar consistent with the z table") {
  Dataset d = synth_heterogeneous(20, 15, 3, 10);
  ProblemSpec spec{LossKind::Logistic, 0.1, 0.0};
  SolverState s = init_state(Method::Smiso, spec, d, 12);
  StepSchedule sched = constant_schedule(Method::Smiso, 0.4);
  PerturbSource pert;
  pert.spec = {PerturbKind::Dropout, 0.2, 12};
  pert.seed = 12;
  for (int t = 0; t < 400; ++t) smiso_step(s, spec, d, pert, sched);
  CHECK(max_abs_diff(s.z_bar, dense_z_bar(s, d)) < 1e-12);
  CHECK(max_abs_diff(s.x, s.z_bar) < 1e-12);
}
