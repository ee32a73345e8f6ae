#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "smiso/schedule.hpp"

using namespace smiso;

TEST_CASE("method names round trip") {
  for (Method m : {Method::Smiso, Method::SmisoNU, Method::Sgd, Method::SgdNU, Method::ProxSgd,
                   Method::Nsaga})
    CHECK(method_from_name(method_name(m)) == m);
  CHECK_THROWS(method_from_name("saga"));
  CHECK(is_smiso_family(Method::Smiso));
  CHECK(is_smiso_family(Method::SmisoNU));
  CHECK_FALSE(is_smiso_family(Method::Sgd));
  CHECK(is_nonuniform(Method::SgdNU));
  CHECK_FALSE(is_nonuniform(Method::ProxSgd));
}

TEST_CASE("step bounds on hand-computed cases") {
  // n = 2, kappa = 11: n/(2(2k-1)) = 2/42 = 1/21 < 1/2
  CHECK(alpha_max_smooth(2, 11) == doctest::Approx(1.0 / 21.0));
  CHECK(alpha_max_averaging(2, 11) == doctest::Approx(1.0 / 42.0));
  // large n: the 1/2 cap binds
  CHECK(alpha_max_smooth(1000, 2) == 0.5);
  CHECK(alpha_max_averaging(1000, 2) == 0.5);
  CHECK_THROWS(alpha_max_smooth(10, 0.5));
}

TEST_CASE("non-uniform default distribution") {
  std::vector<double> L = {1.1, 0.2, 0.2, 0.2};
  const double mu = 0.1;
  SamplingDist q = q_default(L, mu);
  const int n = 4;
  double sum = 0;
  for (double qi : q.q) sum += qi;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(q.q_min >= 1.0 / (2 * n) - 1e-15);
  // q_0 = 1/8 + (1/2)(1.0/1.3)
  CHECK(q.q[0] == doctest::Approx(0.125 + 0.5 * (1.0 / 1.3)));

  // L_q <= 2 (Lbar - mu)
  double L_bar = (1.1 + 0.2 * 3) / 4;
  CHECK(q.L_q_composite <= 2 * (L_bar - mu) + 1e-12);

  // homogeneous problems fall back to uniform
  SamplingDist u = q_default({0.5, 0.5, 0.5}, 0.5);
  CHECK(u.uniform);
  for (double qi : u.q) CHECK(qi == doctest::Approx(1.0 / 3));
}

TEST_CASE("sampling respects the distribution") {
  std::vector<double> L = {1.0, 1.0, 1.0};
  SamplingDist q = make_sampling_dist({0.7, 0.2, 0.1}, L, 0.1);
  CounterStream s(21, 0, StreamPurpose::Sampling);
  std::vector<int> counts(3, 0);
  const int T = 50000;
  for (int t = 0; t < T; ++t) ++counts[q.sample(s)];
  CHECK(counts[0] / double(T) == doctest::Approx(0.7).epsilon(0.03));
  CHECK(counts[1] / double(T) == doctest::Approx(0.2).epsilon(0.06));
  CHECK(counts[2] / double(T) == doctest::Approx(0.1).epsilon(0.1));

  // uniform dist uses the same integer draws as direct uniform sampling
  SamplingDist u = uniform_dist(5, {1, 1, 1, 1, 1}, 0.5);
  CounterStream a(9, 0, StreamPurpose::Sampling), b(9, 0, StreamPurpose::Sampling);
  for (int t = 0; t < 100; ++t)
    CHECK(u.sample(a) == static_cast<int>(b.next_below(5)));
}

TEST_CASE("sampling dist validation") {
  std::vector<double> L = {1, 1};
  CHECK_THROWS(make_sampling_dist({0.5, 0.4}, L, 0.1));   // doesn't sum to 1
  CHECK_THROWS(make_sampling_dist({1.0, 0.0}, L, 0.1));   // zero probability
  CHECK_THROWS(make_sampling_dist({0.5, 0.5}, {1.0, 0.05}, 0.1));  // L_i < mu
}

TEST_CASE("eta mapping") {
  // smiso family: eta n mu / (L - mu); sgd family: eta / L
  CHECK(eta_to_initial_step(Method::Smiso, 1.0, 100, 0.01, 0.26) ==
        doctest::Approx(100 * 0.01 / 0.25));
  CHECK(eta_to_initial_step(Method::Sgd, 2.0, 100, 0.01, 0.25) == doctest::Approx(8.0));
  CHECK_THROWS(eta_to_initial_step(Method::Smiso, 1.0, 10, 0.5, 0.5));
  CHECK_THROWS(eta_to_initial_step(Method::Sgd, 0.0, 10, 0.1, 1.0));
}

TEST_CASE("tuned schedule: warmup then matched decay") {
  // n = 100, smiso: C = 2n = 200; pick eta so abar = 0.1 -> gamma + t0 + 1 = 2000
  SmoothnessInfo sm;
  sm.L = std::vector<double>(100, 0.26);
  sm.L_max = sm.L_bar = 0.26;
  const int n = 100;
  const double mu = 0.01;
  // abar = eta n mu / (L - mu) = eta * 4; eta = 0.025 -> 0.1
  ScheduleConfig cfg{Method::Smiso, ScheduleMode::Tuned, 0.025, 2, false};
  StepSchedule s = make_schedule(cfg, n, mu, sm);
  CHECK(s.abar == doctest::Approx(0.1));
  CHECK(s.t0 == 200);
  CHECK(s.C == 200.0);
  CHECK(s.gamma == doctest::Approx(200.0 / 0.1 - 201.0));
  CHECK_FALSE(s.gamma_clamped);
  // constant through warmup, then the first decayed step equals abar
  CHECK(s.step_at(1) == doctest::Approx(0.1));
  CHECK(s.step_at(200) == doctest::Approx(0.1));
  CHECK(s.step_at(201) == doctest::Approx(0.1));
  CHECK(s.step_at(400) < 0.1);
  // monotone non-increasing
  double prev = s.step_at(1);
  for (long t = 2; t < 2000; ++t) {
    double cur = s.step_at(t);
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
  CHECK_THROWS(s.step_at(0));
}

TEST_CASE("tuned smiso step is clamped at 1") {
  SmoothnessInfo sm;
  sm.L = std::vector<double>(300, 0.26);
  sm.L_max = sm.L_bar = 0.26;
  ScheduleConfig cfg{Method::Smiso, ScheduleMode::Tuned, 1.0, 2, false};
  StepSchedule s = make_schedule(cfg, 300, 0.01, sm);  // raw mapping gives 12
  CHECK(s.abar == 1.0);
}

TEST_CASE("theory schedule caps at the bound") {
  SmoothnessInfo sm;
  sm.L = std::vector<double>(10, 1.0);
  sm.L_max = sm.L_bar = 1.0;
  const double mu = 0.01;  // kappa = 100
  ScheduleConfig cfg{Method::Smiso, ScheduleMode::Theory, 1000.0, 0, false};
  StepSchedule s = make_schedule(cfg, 10, mu, sm);
  CHECK(s.abar == doctest::Approx(alpha_max_smooth(10, 100)));
  cfg.averaging = true;
  StepSchedule sa = make_schedule(cfg, 10, mu, sm);
  CHECK(sa.abar == doctest::Approx(alpha_max_averaging(10, 100)));

  ScheduleConfig sgd{Method::Sgd, ScheduleMode::Theory, 1000.0, 0, false};
  CHECK(make_schedule(sgd, 10, mu, sm).abar == doctest::Approx(0.5));  // 1/(2L)

  // gamma clamps at zero (with the flag) when abar is too large for the decay
  SmoothnessInfo near;
  near.L = std::vector<double>(10, 0.011);
  near.L_max = near.L_bar = 0.011;
  ScheduleConfig big{Method::Smiso, ScheduleMode::Tuned, 1000.0, 0, false};
  StepSchedule sb = make_schedule(big, 10, 0.01, near);
  CHECK(sb.abar == 1.0);
  CHECK(sb.gamma >= 0.0);
}

TEST_CASE("nsaga schedule is constant") {
  SmoothnessInfo sm;
  sm.L = std::vector<double>(10, 1.0);
  sm.L_max = sm.L_bar = 1.0;
  ScheduleConfig cfg{Method::Nsaga, ScheduleMode::Tuned, 1.0, 2, false};
  StepSchedule s = make_schedule(cfg, 10, 0.01, sm);
  CHECK(s.C == 0.0);
  CHECK(s.step_at(1) == s.step_at(100000));
}

TEST_CASE("non-uniform schedules need q") {
  SmoothnessInfo sm;
  sm.L = std::vector<double>(4, 1.0);
  sm.L_max = sm.L_bar = 1.0;
  ScheduleConfig cfg{Method::SmisoNU, ScheduleMode::Theory, 1.0, 0, false};
  CHECK_THROWS(make_schedule(cfg, 4, 0.1, sm, nullptr));
  SamplingDist q = q_default(sm.L, 0.1);
  StepSchedule s = make_schedule(cfg, 4, 0.1, sm, &q);
  CHECK(s.abar <= alpha_max_composite(4, q, sm.L, 0.1) + 1e-15);
}

TEST_CASE("averaging accumulator") {
  AveragingAccumulator acc(1.0);
  acc.add({1.0, 0.0});
  acc.add({4.0, 0.0});
  // weights gamma + t = 1, 2; normalizer T(2 gamma + T - 1)/2 = 3
  CHECK(acc.weight_total() == 3.0);
  CHECK(acc.result()[0] == doctest::Approx((1.0 * 1 + 2.0 * 4) / 3.0));

  // constant sequence averages to itself
  AveragingAccumulator acc2(5.0);
  for (int t = 0; t < 17; ++t) acc2.add({2.5, -1.0});
  CHECK(acc2.result()[0] == doctest::Approx(2.5));
  CHECK(acc2.result()[1] == doctest::Approx(-1.0));

  CHECK_THROWS(AveragingAccumulator(0.5));
  CHECK_THROWS(AveragingAccumulator(1.0).result());
}
