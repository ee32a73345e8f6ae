#include "smiso/model.hpp"

#include <algorithm>
#include <cmath>

namespace smiso {

double loss_value(LossKind kind, double y, double z) {
  double m = y * z;
  if (kind == LossKind::Logistic) {
    // stable log(1 + exp(-m))
    if (m > 0) return std::log1p(std::exp(-m));
    return -m + std::log1p(std::exp(m));
  }
  double g = std::max(0.0, 1.0 - m);
  return 0.5 * g * g;
}

double loss_deriv(LossKind kind, double y, double z) {
  double m = y * z;
  if (kind == LossKind::Logistic) {
    if (m > 0) {
      double e = std::exp(-m);
      return -y * e / (1.0 + e);
    }
    return -y / (1.0 + std::exp(m));
  }
  return -y * std::max(0.0, 1.0 - m);
}

std::vector<double> perturbed_grad(const ProblemSpec& spec, const std::vector<double>& x,
                                   double label, const FeatureVector& pert_features) {
  if (static_cast<int>(x.size()) != pert_features.dim)
    throw std::invalid_argument("perturbed_grad: dimension mismatch");
  double dphi = loss_deriv(spec.loss, label, pert_features.dot(x));
  std::vector<double> g(x.size());
  for (size_t j = 0; j < x.size(); ++j) g[j] = spec.mu * x[j];
  pert_features.add_to(dphi, g);
  return g;
}

FeatureVector loss_grad_only(const ProblemSpec& spec, const std::vector<double>& x,
                             double label, const FeatureVector& pert_features) {
  if (static_cast<int>(x.size()) != pert_features.dim)
    throw std::invalid_argument("loss_grad_only: dimension mismatch");
  double dphi = loss_deriv(spec.loss, label, pert_features.dot(x));
  FeatureVector g = pert_features;
  g.scale(dphi);
  return g;
}

std::vector<double> prox_l1(const std::vector<double>& z, double threshold) {
  std::vector<double> out(z.size());
  prox_l1_inplace(z, threshold, out);
  return out;
}

void prox_l1_inplace(const std::vector<double>& z, double threshold, std::vector<double>& out) {
  if (threshold < 0) throw std::invalid_argument("prox_l1: negative threshold");
  out.resize(z.size());
  if (threshold == 0) {  // exact identity, signed zeros included
    if (&out != &z) std::copy(z.begin(), z.end(), out.begin());
    return;
  }
  for (size_t j = 0; j < z.size(); ++j) {
    double a = std::abs(z[j]) - threshold;
    out[j] = a > 0 ? (z[j] > 0 ? a : -a) : 0.0;
  }
}

double l1_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += std::abs(x);
  return s;
}

double squared_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double regularizer_value(const ProblemSpec& spec, const std::vector<double>& x) {
  return 0.5 * spec.mu * squared_norm(x) + spec.l1_weight * l1_norm(x);
}

}  // namespace smiso
