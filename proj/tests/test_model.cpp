#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "smiso/model.hpp"
#include "smiso/rng.hpp"

using namespace smiso;

TEST_CASE("loss values") {
  CHECK(loss_value(LossKind::Logistic, 1, 0) == doctest::Approx(std::log(2.0)));
  CHECK(loss_value(LossKind::Logistic, -1, 0) == doctest::Approx(std::log(2.0)));
  CHECK(loss_value(LossKind::SquaredHinge, 1, 0) == doctest::Approx(0.5));
  CHECK(loss_value(LossKind::SquaredHinge, 1, 2) == 0.0);   // past the margin
  CHECK(loss_value(LossKind::SquaredHinge, -1, -2) == 0.0);
  CHECK(loss_value(LossKind::SquaredHinge, 1, -1) == doctest::Approx(2.0));
}

TEST_CASE("logistic is numerically stable at extreme margins") {
  CHECK(std::isfinite(loss_value(LossKind::Logistic, 1, -1000)));
  CHECK(loss_value(LossKind::Logistic, 1, 1000) == doctest::Approx(0.0));
  CHECK(loss_value(LossKind::Logistic, 1, -1000) == doctest::Approx(1000.0));
  double dv = loss_deriv(LossKind::Logistic, 1, -1000);
  CHECK(std::isfinite(dv));
  CHECK(dv == doctest::Approx(-1.0));
  CHECK(loss_deriv(LossKind::Logistic, 1, 1000) == doctest::Approx(0.0));
}

TEST_CASE("loss derivative matches finite differences") {
  const double h = 1e-6;
  for (LossKind kind : {LossKind::Logistic, LossKind::SquaredHinge}) {
    for (double y : {-1.0, 1.0}) {
      for (double z = -3.0; z <= 3.0; z += 0.37) {
        double fd = (loss_value(kind, y, z + h) - loss_value(kind, y, z - h)) / (2 * h);
        CHECK(loss_deriv(kind, y, z) == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("losses are convex with second derivative bounded by L_phi") {
  const double h = 1e-4;
  for (LossKind kind : {LossKind::Logistic, LossKind::SquaredHinge}) {
    double L_phi = loss_smoothness(kind);
    for (double y : {-1.0, 1.0}) {
      for (double z = -4.0; z <= 4.0; z += 0.111) {
        double second = (loss_value(kind, y, z + h) - 2 * loss_value(kind, y, z) +
                         loss_value(kind, y, z - h)) /
                        (h * h);
        CHECK(second >= -1e-5);            // convexity
        CHECK(second <= L_phi + 1e-3);     // smoothness
      }
    }
  }
}

TEST_CASE("perturbed gradient matches finite differences of the component") {
  ProblemSpec spec{LossKind::Logistic, 0.3, 0.0};
  FeatureVector xi = FeatureVector::make_sparse(4, {0, 2}, {1.5, -0.5});
  std::vector<double> x = {0.2, -1.0, 0.7, 0.1};
  double y = -1.0;
  auto f = [&](const std::vector<double>& v) {
    double sq = 0;
    for (double a : v) sq += a * a;
    return loss_value(spec.loss, y, xi.dot(v)) + 0.5 * spec.mu * sq;
  };
  std::vector<double> g = perturbed_grad(spec, x, y, xi);
  const double h = 1e-6;
  for (size_t j = 0; j < x.size(); ++j) {
    auto xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    CHECK(g[j] == doctest::Approx((f(xp) - f(xm)) / (2 * h)).epsilon(1e-5));
  }

  // loss_grad_only keeps the sparse layout and omits the mu x term
  FeatureVector lg = loss_grad_only(spec, x, y, xi);
  CHECK(lg.sparse);
  CHECK(lg.indices == xi.indices);
  auto dense = lg.densify();
  for (size_t j = 0; j < x.size(); ++j)
    CHECK(dense[j] + spec.mu * x[j] == doctest::Approx(g[j]).epsilon(1e-12));
}

TEST_CASE("prox_l1 unit cases") {
  CHECK(prox_l1({2.0}, 1.0)[0] == 1.0);
  CHECK(prox_l1({-2.0}, 1.0)[0] == -1.0);
  CHECK(prox_l1({0.5}, 1.0)[0] == 0.0);
  CHECK(prox_l1({-0.5}, 1.0)[0] == 0.0);
  CHECK(prox_l1({1.0}, 1.0)[0] == 0.0);

  // threshold 0 is the exact identity, signs included
  std::vector<double> v = {0.0, -0.0, 3.25, -7.5, 1e-300};
  auto out = prox_l1(v, 0.0);
  for (size_t j = 0; j < v.size(); ++j) {
    CHECK(out[j] == v[j]);
    CHECK(std::signbit(out[j]) == std::signbit(v[j]));
  }
}

TEST_CASE("prox_l1 is non-expansive") {
  CounterStream rs(99, 0, StreamPurpose::Generic);
  for (int trial = 0; trial < 200; ++trial) {
    double thr = rs.next_uniform(0, 2);
    std::vector<double> a(8), b(8);
    for (int j = 0; j < 8; ++j) {
      a[j] = rs.next_uniform(-3, 3);
      b[j] = rs.next_uniform(-3, 3);
    }
    auto pa = prox_l1(a, thr), pb = prox_l1(b, thr);
    double num = 0, den = 0;
    for (int j = 0; j < 8; ++j) {
      num += (pa[j] - pb[j]) * (pa[j] - pb[j]);
      den += (a[j] - b[j]) * (a[j] - b[j]);
    }
    CHECK(num <= den + 1e-12);
  }
}

TEST_CASE("prox_l1 solves its variational problem") {
  // prox(z) minimizes (1/2)||u - z||^2 + thr ||u||_1: check against a grid scan
  CounterStream rs(7, 0, StreamPurpose::Generic);
  for (int trial = 0; trial < 20; ++trial) {
    double z = rs.next_uniform(-2, 2);
    double thr = rs.next_uniform(0, 1.5);
    double p = prox_l1({z}, thr)[0];
    auto obj = [&](double u) { return 0.5 * (u - z) * (u - z) + thr * std::abs(u); };
    for (double u = -2.5; u <= 2.5; u += 1e-3) CHECK(obj(p) <= obj(u) + 1e-9);
  }
}

TEST_CASE("regularizer and vector helpers") {
  ProblemSpec spec{LossKind::Logistic, 2.0, 0.5};
  std::vector<double> x = {3.0, -4.0};
  CHECK(regularizer_value(spec, x) == doctest::Approx(25.0 + 3.5));
  CHECK(l1_norm(x) == 7.0);
  CHECK(squared_norm(x) == 25.0);
  CHECK(dot(x, {1.0, 1.0}) == -1.0);
  CHECK(spec.composite());
  CHECK_FALSE(ProblemSpec{LossKind::Logistic, 1.0, 0.0}.composite());
  CHECK_THROWS(ProblemSpec{LossKind::Logistic, 0.0, 0.0}.validate());
  CHECK_THROWS(ProblemSpec{LossKind::Logistic, 1.0, -1.0}.validate());
}
