#include "smiso/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace smiso {

bool is_smiso_family(Method m) { return m == Method::Smiso || m == Method::SmisoNU; }

bool is_nonuniform(Method m) { return m == Method::SmisoNU || m == Method::SgdNU; }

const char* method_name(Method m) {
  switch (m) {
    case Method::Smiso: return "smiso";
    case Method::SmisoNU: return "smiso_nu";
    case Method::Sgd: return "sgd";
    case Method::SgdNU: return "sgd_nu";
    case Method::ProxSgd: return "prox_sgd";
    case Method::Nsaga: return "nsaga";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "smiso") return Method::Smiso;
  if (name == "smiso_nu") return Method::SmisoNU;
  if (name == "sgd") return Method::Sgd;
  if (name == "sgd_nu") return Method::SgdNU;
  if (name == "prox_sgd") return Method::ProxSgd;
  if (name == "nsaga") return Method::Nsaga;
  throw std::invalid_argument("unknown method '" + name + "'");
}

void SamplingDist::validate() const {
  double s = 0;
  for (double qi : q) {
    if (qi <= 0) throw std::invalid_argument("sampling probabilities must be positive");
    s += qi;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("sampling probabilities must sum to 1");
}

int SamplingDist::sample(CounterStream& stream) const {
  // Uniform distributions draw through the integer path so that uniform-q
  // runs reproduce the exact index sequence of the uniform-sampling methods.
  if (uniform) return static_cast<int>(stream.next_below(static_cast<uint64_t>(n())));
  double u = stream.next_uniform();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  int i = static_cast<int>(it - cdf.begin());
  return std::min(i, n() - 1);
}

SamplingDist make_sampling_dist(std::vector<double> q, const std::vector<double>& L_list,
                                double mu) {
  SamplingDist dist;
  dist.q = std::move(q);
  dist.validate();
  int n = dist.n();
  dist.q_min = *std::min_element(dist.q.begin(), dist.q.end());
  for (int i = 0; i < n; ++i) {
    if (L_list[i] < mu) throw std::invalid_argument("L_i < mu");
    dist.L_q_composite = std::max(dist.L_q_composite, (L_list[i] - mu) / (dist.q[i] * n));
    dist.L_q_sgd = std::max(dist.L_q_sgd, L_list[i] / (dist.q[i] * n));
  }
  dist.cdf.resize(n);
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    acc += dist.q[i];
    dist.cdf[i] = acc;
  }
  dist.cdf.back() = 1.0;
  return dist;
}

SamplingDist uniform_dist(int n, const std::vector<double>& L_list, double mu) {
  SamplingDist dist = make_sampling_dist(std::vector<double>(n, 1.0 / n), L_list, mu);
  dist.uniform = true;
  return dist;
}

SamplingDist q_default(const std::vector<double>& L_list, double mu) {
  int n = static_cast<int>(L_list.size());
  double sum = 0;
  for (double li : L_list) sum += li - mu;
  if (sum <= 0) return uniform_dist(n, L_list, mu);
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = 0.5 / n + 0.5 * (L_list[i] - mu) / sum;
  return make_sampling_dist(std::move(q), L_list, mu);
}

double alpha_max_smooth(int n, double kappa) {
  if (kappa < 1) throw std::invalid_argument("kappa must be >= 1");
  return std::min(0.5, n / (2.0 * (2.0 * kappa - 1.0)));
}

double alpha_max_averaging(int n, double kappa) {
  if (kappa < 1) throw std::invalid_argument("kappa must be >= 1");
  return std::min(0.5, n / (4.0 * (2.0 * kappa - 1.0)));
}

double alpha_max_composite(int n, const SamplingDist& q, const std::vector<double>& L_list,
                           double mu) {
  for (double li : L_list)
    if (li < mu) throw std::invalid_argument("L_i < mu");
  return std::min(n * q.q_min / 2.0, n * mu / (4.0 * q.L_q_composite));
}

double eta_to_initial_step(Method method, double eta, int n, double mu, double L_or_Lbar) {
  if (eta <= 0) throw std::invalid_argument("eta must be positive");
  if (L_or_Lbar <= mu) throw std::invalid_argument("need L > mu");
  if (is_smiso_family(method)) return eta * n * mu / (L_or_Lbar - mu);
  return eta / L_or_Lbar;
}

double StepSchedule::step_at(long t) const {
  if (t < 1) throw std::invalid_argument("step_at: t must be >= 1");
  if (C == 0 || t <= t0) return abar;
  return C / (gamma + static_cast<double>(t));
}

StepSchedule make_schedule(const ScheduleConfig& cfg, int n, double mu,
                           const SmoothnessInfo& sm, const SamplingDist* q) {
  StepSchedule s;
  s.method = cfg.method;
  s.mode = cfg.mode;
  double L_for_eta = is_nonuniform(cfg.method) ? sm.L_bar : sm.L_max;
  double abar = eta_to_initial_step(cfg.method, cfg.eta, n, mu, L_for_eta);

  if (cfg.mode == ScheduleMode::Theory) {
    double cap;
    switch (cfg.method) {
      case Method::Smiso:
        cap = cfg.averaging ? alpha_max_averaging(n, sm.L_max / mu)
                            : alpha_max_smooth(n, sm.L_max / mu);
        break;
      case Method::SmisoNU:
        if (!q) throw std::invalid_argument("non-uniform schedule needs a sampling distribution");
        cap = alpha_max_composite(n, *q, sm.L, mu);
        break;
      case Method::SgdNU:
        if (!q) throw std::invalid_argument("non-uniform schedule needs a sampling distribution");
        cap = 1.0 / (2.0 * q->L_q_sgd);
        break;
      default:
        cap = 1.0 / (2.0 * sm.L_max);
        break;
    }
    abar = std::min(abar, cap);
  }
  // The z-update is a convex combination; alpha cannot exceed 1.
  if (is_smiso_family(cfg.method)) abar = std::min(abar, 1.0);
  s.abar = abar;

  if (cfg.method == Method::Nsaga) {
    s.C = 0;  // constant step throughout
    return s;
  }
  s.t0 = static_cast<long>(cfg.warmup_epochs) * n;
  s.C = is_smiso_family(cfg.method) ? 2.0 * n : 2.0 / mu;
  s.gamma = s.C / s.abar - static_cast<double>(s.t0 + 1);
  if (s.gamma < 0) {
    s.gamma = 0;
    s.gamma_clamped = true;
  }
  return s;
}

void AveragingAccumulator::add(const std::vector<double>& x) {
  if (weighted_sum_.empty()) weighted_sum_.assign(x.size(), 0.0);
  double w = gamma_ + static_cast<double>(count_);
  for (size_t j = 0; j < x.size(); ++j) weighted_sum_[j] += w * x[j];
  weight_total_ += w;
  ++count_;
}

std::vector<double> AveragingAccumulator::result() const {
  if (count_ == 0) throw std::logic_error("averaging result requested with no iterates");
  std::vector<double> out = weighted_sum_;
  for (double& v : out) v /= weight_total_;
  return out;
}

}  // namespace smiso
