#include "smiso/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>

namespace smiso {

namespace {

struct CellKey {
  MethodEntry entry;
  uint64_t seed;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Problem {
  ProblemSpec spec;
  Dataset data;
  SmoothnessInfo sm;
  std::optional<FinitePool> pool;
  std::optional<SamplingDist> q_nu;
  std::optional<ReferenceSolution> ref;
};

Problem build_problem(const ExperimentConfig& cfg) {
  Problem p;
  p.spec = ProblemSpec{cfg.loss, cfg.mu, cfg.l1_weight};
  p.data = materialize_dataset(cfg);
  p.sm = smoothness_constants(p.data, cfg.loss, cfg.mu);
  if (cfg.pool_size > 0)
    p.pool = build_finite_pool(p.data, cfg.perturb, cfg.pool_size, cfg.perturb.master_seed);
  bool any_nu = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                            [](const MethodEntry& m) { return is_nonuniform(m.method); });
  if (any_nu) p.q_nu = q_default(p.sm.L, cfg.mu);
  if (cfg.lyapunov && p.pool) p.ref = reference_solve(p.spec, p.data, *p.pool, 1e-12);
  return p;
}

double cell_objective(const ExperimentConfig& cfg, const Problem& p,
                      const std::vector<double>& x) {
  if (p.pool) return pool_full_objective(p.spec, p.data, *p.pool, x);
  return objective_estimate(p.spec, p.data, x, cfg.perturb, cfg.estimate_k, cfg.estimate_seed);
}

std::vector<TraceRecord> run_cell(const ExperimentConfig& cfg, const Problem& p,
                                  const MethodEntry& entry, uint64_t seed) {
  const SamplingDist* q = is_nonuniform(entry.method) ? &*p.q_nu : nullptr;
  ScheduleConfig sc{entry.method, entry.mode, entry.eta, entry.warmup_epochs, cfg.averaging};
  StepSchedule sched = make_schedule(sc, p.data.n(), cfg.mu, p.sm, q);

  PerturbSource pert;
  pert.spec = cfg.perturb;
  pert.spec.master_seed = seed;
  pert.seed = seed;
  if (p.pool) pert.pool = &*p.pool;

  RunConfig rc;
  rc.method = entry.method;
  rc.epochs = cfg.epochs;
  rc.seed = seed;
  rc.averaging = cfg.averaging && entry.method != Method::Nsaga;
  rc.q = q;

  std::vector<TraceRecord> records;
  auto start = std::chrono::steady_clock::now();
  run_epochs(rc, p.spec, p.data, pert, sched, [&](const EpochInfo& info) {
    TraceRecord r;
    r.method = method_name(entry.method);
    r.seed = seed;
    r.epoch = info.epoch;
    r.step_size = info.step_size;
    r.objective = cell_objective(cfg, p, info.state->x);
    if (info.x_avg) r.objective_avg = cell_objective(cfg, p, *info.x_avg);
    if (p.ref) {
      if (is_smiso_family(entry.method)) {
        r.lyapunov = lyapunov_smooth(*info.state, p.data, *p.ref, info.step_size).value;
      } else {
        double sq = 0;
        for (size_t j = 0; j < info.state->x.size(); ++j) {
          double dlt = info.state->x[j] - p.ref->x_star[j];
          sq += dlt * dlt;
        }
        r.lyapunov = 0.5 * sq;
      }
    }
    auto now = std::chrono::steady_clock::now();
    r.wall_ms = std::chrono::duration<double, std::milli>(now - start).count();
    records.push_back(std::move(r));
  });
  return records;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Problem p = build_problem(cfg);

  std::vector<CellKey> cells;
  for (const auto& m : cfg.methods)
    for (uint64_t s : cfg.seeds) cells.push_back({m, s});

  std::vector<std::vector<TraceRecord>> per_cell(cells.size());
  if (cfg.workers <= 1) {
    for (size_t c = 0; c < cells.size(); ++c)
      per_cell[c] = run_cell(cfg, p, cells[c].entry, cells[c].seed);
  } else {
    std::vector<std::future<std::vector<TraceRecord>>> futs(cells.size());
    size_t next = 0;
    auto launch = [&](size_t c) {
      futs[c] = std::async(std::launch::async, [&, c] {
        return run_cell(cfg, p, cells[c].entry, cells[c].seed);
      });
    };
    size_t inflight = std::min<size_t>(cfg.workers, cells.size());
    for (; next < inflight; ++next) launch(next);
    for (size_t c = 0; c < cells.size(); ++c) {
      per_cell[c] = futs[c].get();
      if (next < cells.size()) launch(next++);
    }
  }

  RunResult result;
  double best = std::numeric_limits<double>::infinity();
  for (auto& recs : per_cell)
    for (auto& r : recs) {
      best = std::min(best, r.objective);
      if (r.objective_avg) best = std::min(best, *r.objective_avg);
    }
  result.best_objective = best;
  for (auto& recs : per_cell)
    for (auto& r : recs) {
      r.suboptimality = r.objective - best;
      result.records.push_back(std::move(r));
    }
  return result;
}

std::string trace_to_csv(const RunResult& result) {
  std::string out = "method,seed,epoch,step_size,objective,objective_avg,lyapunov,suboptimality,wall_ms\n";
  for (const auto& r : result.records) {
    out += r.method + "," + std::to_string(r.seed) + "," + std::to_string(r.epoch) + "," +
           fmt(r.step_size) + "," + fmt(r.objective) + ",";
    if (r.objective_avg) out += fmt(*r.objective_avg);
    out += ",";
    if (r.lyapunov) out += fmt(*r.lyapunov);
    out += "," + fmt(r.suboptimality) + "," + fmt(r.wall_ms) + "\n";
  }
  return out;
}

int cmd_run(const ExperimentConfig& cfg, const std::string& out_override, std::ostream& log) {
  RunResult result = run_experiment(cfg);
  std::string path = out_override.empty() ? cfg.output : out_override;
  std::ofstream out(path);
  if (!out) {
    log << "error: cannot write " << path << "\n";
    return 2;
  }
  out << trace_to_csv(result);
  log << "wrote " << result.records.size() << " records to " << path
      << " (best objective " << fmt(result.best_objective) << ")\n";
  return 0;
}

int cmd_variance(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.perturb.kind == PerturbKind::None) {
    out << "no perturbation configured: sigma_p^2 = 0, ratio is infinite\n";
    return 0;
  }
  Problem p = build_problem(cfg);
  out << "perturbation variance analysis\n";
  if (auto r = analytic_ratio(cfg.perturb))
    out << "  analytic ratio (unit-norm features): " << fmt(*r) << "\n";
  else
    out << "  analytic ratio: not available for this perturbation\n";
  auto proxy = feature_variance_ratio(p.data, cfg.perturb, 100, cfg.estimate_seed);
  if (proxy)
    out << "  feature-proxy ratio (100 draws/example): " << fmt(*proxy) << "\n";
  else
    out << "  feature-proxy ratio: infinite (zero within-example variance)\n";
  if (p.pool) {
    ReferenceSolution ref = reference_solve(p.spec, p.data, *p.pool, 1e-10);
    const SamplingDist* q = p.q_nu ? &*p.q_nu : nullptr;
    VarianceReport rep = estimate_variances(p.spec, p.data, *p.pool, ref, q);
    out << "  exact pool gradient variances: sigma_p^2 = " << fmt(rep.sigma_p_sq)
        << ", sigma_tot^2 = " << fmt(rep.sigma_tot_sq) << "\n";
    if (rep.ratio) out << "  exact gradient ratio: " << fmt(*rep.ratio) << "\n";
    if (rep.sigma_q_sq) out << "  sigma_q^2 (default q): " << fmt(*rep.sigma_q_sq) << "\n";
  }
  return 0;
}

namespace {

bool boundcheck_smiso(const ExperimentConfig& cfg, const Problem& p, const MethodEntry& entry,
                      std::ostream& out) {
  const int n = p.data.n();
  // sigma_p = 0 regime: constant alpha_max gives geometric convergence
  if (cfg.perturb.kind == PerturbKind::None) {
    double alpha = alpha_max_smooth(n, p.sm.L_max / cfg.mu);
    StepSchedule sched = constant_schedule(Method::Smiso, alpha);
    PerturbSource pert;
    pert.spec = cfg.perturb;
    if (p.pool) pert.pool = &*p.pool;
    pert.seed = cfg.seeds[0];
    RunConfig rc;
    rc.method = Method::Smiso;
    rc.epochs = std::min(cfg.epochs, 100);
    rc.seed = cfg.seeds[0];
    double final_obj = 0;
    run_epochs(rc, p.spec, p.data, pert, sched,
               [&](const EpochInfo& info) { final_obj = cell_objective(cfg, p, info.state->x); });
    ReferenceSolution ref = reference_solve(p.spec, p.data, *p.pool, 1e-13);
    double gap = final_obj - ref.F_star;
    bool ok = gap < 1e-10;
    out << "  [" << (ok ? "PASS" : "FAIL") << "] zero-perturbation geometric decrease: F - F* = "
        << fmt(gap) << " (< 1e-10 required)\n";
    return ok;
  }

  // Theorem-2 check: decay from the start, alpha_1 at the theory bound
  ScheduleConfig sc{entry.method, ScheduleMode::Theory, entry.eta, 0, false};
  const SamplingDist* q = is_nonuniform(entry.method) ? &*p.q_nu : nullptr;
  StepSchedule sched = make_schedule(sc, n, cfg.mu, p.sm, q);
  ReferenceSolution ref = reference_solve(p.spec, p.data, *p.pool, 1e-12);
  VarianceReport rep = estimate_variances(p.spec, p.data, *p.pool, ref, q);

  std::vector<double> mean_C(cfg.epochs + 1, 0.0);
  for (uint64_t seed : cfg.seeds) {
    PerturbSource pert;
    pert.spec = cfg.perturb;
    pert.pool = &*p.pool;
    pert.seed = seed;
    RunConfig rc;
    rc.method = entry.method;
    rc.epochs = cfg.epochs;
    rc.seed = seed;
    rc.q = q;
    run_epochs(rc, p.spec, p.data, pert, sched, [&](const EpochInfo& info) {
      long t = static_cast<long>(info.epoch) * n;
      double alpha_t = sched.C / (sched.gamma + static_cast<double>(t));
      mean_C[info.epoch] +=
          lyapunov_smooth(*info.state, p.data, ref, alpha_t).value / cfg.seeds.size();
    });
  }
  double C0 = mean_C[0];
  double nu = theorem2_nu(sched.gamma, C0, rep.sigma_p_sq, cfg.mu);
  bool ok = true;
  out << "  Theorem-2 margins (mean C_t vs 1.1 nu/(gamma+t+1), " << cfg.seeds.size()
      << " seeds):\n";
  for (int e = 0; e <= cfg.epochs; ++e) {
    long t = static_cast<long>(e) * n;
    double bound = 1.1 * nu / (sched.gamma + static_cast<double>(t) + 1.0);
    bool pass = mean_C[e] <= bound;
    ok = ok && pass;
    out << "    epoch " << e << ": C = " << fmt(mean_C[e]) << ", bound = " << fmt(bound) << " ["
        << (pass ? "ok" : "VIOLATED") << "]\n";
  }
  out << "  [" << (ok ? "PASS" : "FAIL") << "] Theorem-2 Lyapunov bound\n";
  return ok;
}

bool boundcheck_sgd(const ExperimentConfig& cfg, const Problem& p, std::ostream& out) {
  const int n = p.data.n();
  const double eta = 1.0 / (2.0 * p.sm.L_max);
  StepSchedule sched = constant_schedule(Method::Sgd, eta);
  ReferenceSolution ref = reference_solve(p.spec, p.data, *p.pool, 1e-12);
  VarianceReport rep = estimate_variances(p.spec, p.data, *p.pool, ref, nullptr);
  const long T = std::min<long>(200, static_cast<long>(cfg.epochs) * n);

  std::vector<double> mean_B(T + 1, 0.0);
  for (uint64_t seed : cfg.seeds) {
    SolverState s = init_state(Method::Sgd, p.spec, p.data, seed);
    PerturbSource pert;
    pert.spec = cfg.perturb;
    pert.pool = &*p.pool;
    pert.seed = seed;
    auto dist_sq = [&] {
      double sq = 0;
      for (int j = 0; j < p.data.dim; ++j) {
        double dlt = s.x[j] - ref.x_star[j];
        sq += dlt * dlt;
      }
      return 0.5 * sq;
    };
    mean_B[0] += dist_sq() / cfg.seeds.size();
    for (long t = 1; t <= T; ++t) {
      sgd_step(s, p.spec, p.data, pert, sched);
      mean_B[t] += dist_sq() / cfg.seeds.size();
    }
  }
  bool ok = true;
  for (long t = 1; t <= T; ++t) {
    double rhs = (1.0 - cfg.mu * eta) * mean_B[t - 1] + 1.1 * eta * eta * rep.sigma_tot_sq;
    if (mean_B[t] > rhs) {
      ok = false;
      out << "    step " << t << ": B = " << fmt(mean_B[t]) << " > bound " << fmt(rhs) << "\n";
    }
  }
  out << "  [" << (ok ? "PASS" : "FAIL") << "] SGD distance recursion (" << T << " steps, "
      << cfg.seeds.size() << " seeds)\n";
  return ok;
}

}  // namespace

int cmd_boundcheck(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.pool_size == 0) {
    out << "boundcheck refused: theory checks need exact expectations; set pool > 0\n";
    return 1;
  }
  for (const auto& m : cfg.methods)
    if (m.mode != ScheduleMode::Theory) {
      out << "boundcheck refused: method " << method_name(m.method)
          << " is in tuned mode; theory-mode schedules are required\n";
      return 1;
    }
  if (cfg.perturb.kind != PerturbKind::None && cfg.seeds.size() < 50) {
    out << "boundcheck refused: statistical bound checks need >= 50 seeds (got "
        << cfg.seeds.size() << ")\n";
    return 1;
  }
  Problem p = build_problem(cfg);
  bool all_ok = true;
  for (const auto& m : cfg.methods) {
    out << method_name(m.method) << ":\n";
    if (is_smiso_family(m.method))
      all_ok = boundcheck_smiso(cfg, p, m, out) && all_ok;
    else if (m.method == Method::Sgd || m.method == Method::ProxSgd)
      all_ok = boundcheck_sgd(cfg, p, out) && all_ok;
    else
      out << "  (no theoretical bound check for this method)\n";
  }
  out << (all_ok ? "overall: PASS\n" : "overall: FAIL\n");
  return all_ok ? 0 : 2;
}

int cmd_synth(const ExperimentConfig& cfg, const std::string& out_path, std::ostream& log) {
  Dataset d = materialize_dataset(cfg);
  bool sparse = !d.samples.empty() && d.samples[0].features.sparse;
  std::ofstream out(out_path);
  if (!out) {
    log << "error: cannot write " << out_path << "\n";
    return 2;
  }
  out << (sparse ? serialize_libsvm(d) : serialize_dense_csv(d));
  SmoothnessInfo sm = smoothness_constants(d, cfg.loss, cfg.mu);
  log << "wrote " << d.n() << " samples (dim " << d.dim << ") to " << out_path
      << "; max L_i / mean L_i = " << fmt(sm.L_max / sm.L_bar) << "\n";
  return 0;
}

}  // namespace smiso
