#include "smiso/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smiso/rng.hpp"

namespace smiso {

FeatureVector FeatureVector::make_sparse(int dim, std::vector<int> idx,
                                         std::vector<double> val) {
  FeatureVector fv;
  fv.dim = dim;
  fv.sparse = true;
  fv.indices = std::move(idx);
  fv.values = std::move(val);
  fv.validate();
  return fv;
}

void FeatureVector::validate() const {
  if (sparse) {
    if (indices.size() != values.size())
      throw std::invalid_argument("sparse index/value size mismatch");
    for (size_t k = 0; k < indices.size(); ++k) {
      if (indices[k] < 0 || indices[k] >= dim)
        throw std::invalid_argument("sparse index out of range");
      if (k > 0 && indices[k] <= indices[k - 1])
        throw std::invalid_argument("sparse indices not strictly increasing");
    }
  } else if (static_cast<int>(values.size()) != dim) {
    throw std::invalid_argument("dense size mismatch");
  }
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
}

double FeatureVector::dot(const std::vector<double>& x) const {
  double s = 0;
  if (sparse) {
    for (size_t k = 0; k < indices.size(); ++k) s += values[k] * x[indices[k]];
  } else {
    for (int j = 0; j < dim; ++j) s += values[j] * x[j];
  }
  return s;
}

double FeatureVector::squared_norm() const {
  double s = 0;
  for (double v : values) s += v * v;
  return s;
}

void FeatureVector::add_to(double a, std::vector<double>& y) const {
  if (sparse) {
    for (size_t k = 0; k < indices.size(); ++k) y[indices[k]] += a * values[k];
  } else {
    for (int j = 0; j < dim; ++j) y[j] += a * values[j];
  }
}

void FeatureVector::scale(double a) {
  for (double& v : values) v *= a;
}

std::vector<double> FeatureVector::densify() const {
  if (!sparse) return values;
  std::vector<double> out(dim, 0.0);
  for (size_t k = 0; k < indices.size(); ++k) out[indices[k]] = values[k];
  return out;
}

Dataset Dataset::from_samples(std::vector<Sample> samples, int dim) {
  Dataset d;
  for (auto& s : samples) dim = std::max(dim, s.features.dim);
  for (auto& s : samples) {
    if (s.features.dim != dim) {
      if (s.features.sparse)
        s.features.dim = dim;
      else
        throw std::invalid_argument("dense samples must share dim");
    }
    if (s.label != 1.0 && s.label != -1.0)
      throw std::invalid_argument("label must be exactly -1 or +1");
  }
  d.samples = std::move(samples);
  d.dim = dim;
  d.norms_sq.reserve(d.samples.size());
  for (const auto& s : d.samples) d.norms_sq.push_back(s.features.squared_norm());
  return d;
}

namespace {

double parse_double_tok(const std::string& tok, int line_no) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  }
  if (pos != tok.size())
    throw ParseError("line " + std::to_string(line_no) + ": trailing characters in '" + tok + "'");
  return v;
}

}  // namespace

Dataset parse_libsvm(const std::string& text, int dim_override) {
  std::vector<Sample> samples;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int max_dim = dim_override;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    double raw_label = parse_double_tok(tok, line_no);
    Sample s;
    s.label = raw_label > 0 ? 1.0 : -1.0;
    std::vector<int> idx;
    std::vector<double> val;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError("line " + std::to_string(line_no) + ": expected idx:val, got '" + tok + "'");
      double di = parse_double_tok(tok.substr(0, colon), line_no);
      int i = static_cast<int>(di);
      if (i < 1 || di != i)
        throw ParseError("line " + std::to_string(line_no) + ": bad index '" + tok + "'");
      if (!idx.empty() && i - 1 <= idx.back())
        throw ParseError("line " + std::to_string(line_no) + ": indices not strictly increasing");
      idx.push_back(i - 1);
      val.push_back(parse_double_tok(tok.substr(colon + 1), line_no));
      max_dim = std::max(max_dim, i);
    }
    s.features.sparse = true;
    s.features.indices = std::move(idx);
    s.features.values = std::move(val);
    samples.push_back(std::move(s));
  }
  for (auto& s : samples) {
    s.features.dim = max_dim;
    s.features.validate();
  }
  return Dataset::from_samples(std::move(samples), max_dim);
}

namespace {

std::string fmt_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize_libsvm(const Dataset& d) {
  std::string out;
  for (const auto& s : d.samples) {
    out += s.label > 0 ? "+1" : "-1";
    const auto& fv = s.features;
    if (fv.sparse) {
      for (size_t k = 0; k < fv.indices.size(); ++k)
        out += " " + std::to_string(fv.indices[k] + 1) + ":" + fmt_value(fv.values[k]);
    } else {
      for (int j = 0; j < fv.dim; ++j)
        if (fv.values[j] != 0.0)
          out += " " + std::to_string(j + 1) + ":" + fmt_value(fv.values[j]);
    }
    out += "\n";
  }
  return out;
}

Dataset parse_dense_csv(const std::string& text) {
  std::vector<Sample> samples;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  size_t ncols = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(parse_double_tok(cell, line_no));
    if (row.size() < 2)
      throw ParseError("line " + std::to_string(line_no) + ": need at least one feature and a label");
    if (ncols == 0)
      ncols = row.size();
    else if (row.size() != ncols)
      throw ParseError("line " + std::to_string(line_no) + ": inconsistent column count");
    Sample s;
    double lbl = row.back();
    if (lbl != 1.0 && lbl != -1.0)
      throw ParseError("line " + std::to_string(line_no) + ": label must be +/-1");
    s.label = lbl;
    row.pop_back();
    s.features = FeatureVector::dense(std::move(row));
    samples.push_back(std::move(s));
  }
  return Dataset::from_samples(std::move(samples));
}

std::string serialize_dense_csv(const Dataset& d) {
  std::string out;
  for (const auto& s : d.samples) {
    auto v = s.features.densify();
    for (double x : v) out += fmt_value(x) + ",";
    out += s.label > 0 ? "1" : "-1";
    out += "\n";
  }
  return out;
}

Dataset load_dataset_file(const std::string& path, bool csv, int dim_override) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return csv ? parse_dense_csv(ss.str()) : parse_libsvm(ss.str(), dim_override);
}

Dataset normalize_l2(const Dataset& d) {
  std::vector<Sample> out = d.samples;
  for (int i = 0; i < d.n(); ++i) {
    double nrm = std::sqrt(d.norms_sq[i]);
    if (nrm == 0.0)
      throw std::invalid_argument("normalize_l2: zero-norm sample at index " + std::to_string(i));
    out[i].features.scale(1.0 / nrm);
  }
  return Dataset::from_samples(std::move(out), d.dim);
}

double loss_smoothness(LossKind kind) {
  return kind == LossKind::Logistic ? 0.25 : 1.0;
}

SmoothnessInfo smoothness_constants(const Dataset& d, LossKind kind, double mu) {
  if (mu <= 0) throw std::invalid_argument("mu must be positive");
  SmoothnessInfo info;
  double lphi = loss_smoothness(kind);
  info.L.reserve(d.n());
  double sum = 0;
  for (int i = 0; i < d.n(); ++i) {
    double li = lphi * d.norms_sq[i] + mu;
    info.L.push_back(li);
    info.L_max = std::max(info.L_max, li);
    sum += li;
  }
  info.L_bar = d.n() > 0 ? sum / d.n() : 0.0;
  return info;
}

Dataset synth_gaussian(int n, int d, uint64_t seed, double flip_prob) {
  if (n < 1 || d < 1) throw std::invalid_argument("synth_gaussian: n, d must be >= 1");
  CounterStream wstream(seed, 0, StreamPurpose::SynthHyperplane);
  std::vector<double> w(d);
  for (int j = 0; j < d; ++j) w[j] = wstream.next_normal();
  std::vector<Sample> samples(n);
  for (int i = 0; i < n; ++i) {
    CounterStream fs(seed, static_cast<uint64_t>(i), StreamPurpose::SynthFeatures);
    std::vector<double> v(d);
    double nrm2 = 0;
    for (int j = 0; j < d; ++j) {
      v[j] = fs.next_normal();
      nrm2 += v[j] * v[j];
    }
    double nrm = std::sqrt(nrm2);
    if (nrm == 0) {
      v[0] = 1.0;
      nrm = 1.0;
    }
    for (int j = 0; j < d; ++j) v[j] /= nrm;
    double margin = 0;
    for (int j = 0; j < d; ++j) margin += w[j] * v[j];
    double label = margin >= 0 ? 1.0 : -1.0;
    if (flip_prob > 0 && fs.next_uniform() < flip_prob) label = -label;
    samples[i].features = FeatureVector::dense(std::move(v));
    samples[i].label = label;
  }
  return Dataset::from_samples(std::move(samples), d);
}

namespace {

// Ratio max/mean of r2_i = base_i^p for a fixed base draw.
double spread_ratio(const std::vector<double>& base, double p) {
  double mx = 0, sum = 0;
  for (double b : base) {
    double r = std::pow(b, p);
    mx = std::max(mx, r);
    sum += r;
  }
  return mx * base.size() / sum;
}

}  // namespace

Dataset synth_heterogeneous(int n, int d, uint64_t seed, double norm_spread) {
  if (n < 1 || d < 1) throw std::invalid_argument("synth_heterogeneous: n, d must be >= 1");
  if (norm_spread < 1) throw std::invalid_argument("norm_spread must be >= 1");
  // Lognormal base magnitudes; exponent p tuned by bisection so that the
  // realized max/mean squared-norm ratio hits norm_spread.
  std::vector<double> base(n);
  for (int i = 0; i < n; ++i) {
    CounterStream s(seed, static_cast<uint64_t>(i), StreamPurpose::SynthHyperplane);
    base[i] = std::exp(s.next_normal());
  }
  double p = 0.0;
  if (norm_spread > 1.0 + 1e-9) {
    double lo = 0.0, hi = 1.0;
    while (spread_ratio(base, hi) < norm_spread && hi < 256) hi *= 2;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (spread_ratio(base, mid) < norm_spread ? lo : hi) = mid;
    }
    p = 0.5 * (lo + hi);
  }
  int nnz = std::max(1, d / 10);
  std::vector<Sample> samples(n);
  for (int i = 0; i < n; ++i) {
    CounterStream fs(seed, static_cast<uint64_t>(i), StreamPurpose::SynthFeatures);
    // distinct sorted indices
    std::vector<int> idx;
    while (static_cast<int>(idx.size()) < nnz) {
      int j = static_cast<int>(fs.next_below(static_cast<uint64_t>(d)));
      if (std::find(idx.begin(), idx.end(), j) == idx.end()) idx.push_back(j);
    }
    std::sort(idx.begin(), idx.end());
    std::vector<double> val(idx.size());
    double nrm2 = 0;
    for (auto& v : val) {
      v = fs.next_normal();
      nrm2 += v * v;
    }
    double target = std::pow(base[i], p);
    double sc = std::sqrt(target / std::max(nrm2, 1e-300));
    for (auto& v : val) v *= sc;
    samples[i].features = FeatureVector::make_sparse(d, std::move(idx), std::move(val));
    CounterStream ls(seed, static_cast<uint64_t>(i), StreamPurpose::Generic);
    samples[i].label = ls.next_uniform() < 0.5 ? -1.0 : 1.0;
  }
  return Dataset::from_samples(std::move(samples), d);
}

}  // namespace smiso
