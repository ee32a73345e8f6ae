#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace smiso {

// Feature vector with either dense or sparse storage. Sparse storage keeps a
// strictly increasing index list; `values` is aligned with `indices` in the
// sparse case and has size `dim` in the dense case.
struct FeatureVector {
  int dim = 0;
  bool sparse = false;
  std::vector<int> indices;
  std::vector<double> values;

  static FeatureVector dense(std::vector<double> v) {
    FeatureVector fv;
    fv.dim = static_cast<int>(v.size());
    fv.values = std::move(v);
    return fv;
  }

  static FeatureVector make_sparse(int dim, std::vector<int> idx,
                                   std::vector<double> val);

  double dot(const std::vector<double>& x) const;
  double squared_norm() const;
  // y += a * this
  void add_to(double a, std::vector<double>& y) const;
  void scale(double a);
  std::vector<double> densify() const;
  void validate() const;
};

struct Sample {
  FeatureVector features;
  double label = 1.0;  // exactly -1 or +1
};

enum class LossKind { Logistic, SquaredHinge };

// Immutable after construction; norms_sq cached.
struct Dataset {
  std::vector<Sample> samples;
  int dim = 0;
  std::vector<double> norms_sq;

  int n() const { return static_cast<int>(samples.size()); }
  static Dataset from_samples(std::vector<Sample> samples, int dim = 0);
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SmoothnessInfo {
  std::vector<double> L;
  double L_max = 0;
  double L_bar = 0;
};

// LIBSVM text: "<label> <idx>:<val> ...", 1-based strictly increasing indices
// on disk, stored 0-based. Any positive label maps to +1, the rest to -1.
Dataset parse_libsvm(const std::string& text, int dim_override = 0);
std::string serialize_libsvm(const Dataset& d);

// Dense CSV: one row per sample, last column the +/-1 label, no header.
Dataset parse_dense_csv(const std::string& text);
std::string serialize_dense_csv(const Dataset& d);

Dataset load_dataset_file(const std::string& path, bool csv, int dim_override = 0);

Dataset normalize_l2(const Dataset& d);

double loss_smoothness(LossKind kind);  // L_phi: logistic 1/4, squared hinge 1

// L_i = L_phi * ||xi_i||^2 + mu
SmoothnessInfo smoothness_constants(const Dataset& d, LossKind kind, double mu);

// Dense standard-normal features, l2-normalized, labels from a fixed random
// hyperplane with optional flip noise.
Dataset synth_gaussian(int n, int d, uint64_t seed, double flip_prob = 0.0);

// Sparse data with heavy-tailed per-example norms targeting
// max_i ||xi_i||^2 / mean ||xi_i||^2 = norm_spread.
Dataset synth_heterogeneous(int n, int d, uint64_t seed, double norm_spread);

}  // namespace smiso
