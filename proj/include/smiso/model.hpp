#pragma once

#include <vector>

#include "smiso/data.hpp"

namespace smiso {

// Composite objective F(x) = (1/n) sum_i E_rho[phi(x' xi_i^rho)] +
// (mu/2)||x||^2 + l1_weight ||x||_1. The l2 term belongs to the smooth part
// f_i; h is pure l1. Squared hinge carries a 1/2 factor so that L_phi = 1
// (note: some codebases define it without the 1/2).
struct ProblemSpec {
  LossKind loss = LossKind::Logistic;
  double mu = 0;
  double l1_weight = 0;

  bool composite() const { return l1_weight > 0; }
  void validate() const {
    if (mu <= 0) throw std::invalid_argument("mu must be positive");
    if (l1_weight < 0) throw std::invalid_argument("l1_weight must be >= 0");
  }
};

// logistic: log(1 + exp(-y z)); squared hinge: (1/2) max(0, 1 - y z)^2
double loss_value(LossKind kind, double y, double z);

// derivative w.r.t. z
double loss_deriv(LossKind kind, double y, double z);

// phi'(x' xi) * xi + mu x  (dense)
std::vector<double> perturbed_grad(const ProblemSpec& spec, const std::vector<double>& x,
                                   double label, const FeatureVector& pert_features);

// phi'(x' xi) * xi, keeping the perturbed features' storage layout
FeatureVector loss_grad_only(const ProblemSpec& spec, const std::vector<double>& x,
                             double label, const FeatureVector& pert_features);

// componentwise soft-threshold
std::vector<double> prox_l1(const std::vector<double>& z, double threshold);
void prox_l1_inplace(const std::vector<double>& z, double threshold, std::vector<double>& out);

double l1_norm(const std::vector<double>& v);
double squared_norm(const std::vector<double>& v);
double dot(const std::vector<double>& a, const std::vector<double>& b);

// regularizer value (mu/2)||x||^2 + l1_weight ||x||_1
double regularizer_value(const ProblemSpec& spec, const std::vector<double>& x);

}  // namespace smiso
