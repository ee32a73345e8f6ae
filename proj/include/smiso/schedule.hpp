#pragma once

#include <cstdint>
#include <vector>

#include "smiso/data.hpp"
#include "smiso/rng.hpp"

namespace smiso {

enum class Method { Smiso, SmisoNU, Sgd, SgdNU, ProxSgd, Nsaga };
enum class ScheduleMode { Theory, Tuned };

bool is_smiso_family(Method m);
bool is_nonuniform(Method m);
const char* method_name(Method m);
Method method_from_name(const std::string& name);

// Non-uniform sampling distribution with its derived constants.
struct SamplingDist {
  std::vector<double> q;
  bool uniform = false;
  double q_min = 0;
  double L_q_composite = 0;  // max_i (L_i - mu) / (q_i n)
  double L_q_sgd = 0;        // max_i L_i / (q_i n)
  std::vector<double> cdf;

  int n() const { return static_cast<int>(q.size()); }
  int sample(CounterStream& stream) const;
  void validate() const;
};

SamplingDist make_sampling_dist(std::vector<double> q, const std::vector<double>& L_list,
                                double mu);
SamplingDist uniform_dist(int n, const std::vector<double>& L_list, double mu);

// q_i = 1/(2n) + (L_i - mu) / (2 sum_j (L_j - mu)); falls back to uniform when
// all L_i equal mu.
SamplingDist q_default(const std::vector<double>& L_list, double mu);

// Step-size upper bounds.
double alpha_max_smooth(int n, double kappa);     // min{1/2, n/(2(2k-1))}
double alpha_max_averaging(int n, double kappa);  // min{1/2, n/(4(2k-1))}
double alpha_max_composite(int n, const SamplingDist& q, const std::vector<double>& L_list,
                           double mu);  // min{n q_min/2, n mu/(4 L_q)}

// eta = 1 maps to an initial step n mu/(L - mu) for the S-MISO family and 1/L
// for SGD-type methods (L replaced by Lbar for the non-uniform variants).
double eta_to_initial_step(Method method, double eta, int n, double mu, double L_or_Lbar);

struct StepSchedule {
  Method method = Method::Smiso;
  ScheduleMode mode = ScheduleMode::Tuned;
  double abar = 0;        // constant warmup step
  long t0 = 0;            // last warmup iteration (warmup_epochs * n)
  double C = 0;           // decay numerator; 0 means constant throughout
  double gamma = 0;
  bool gamma_clamped = false;  // abar was larger than C/(t0+1)

  double step_at(long t) const;
};

struct ScheduleConfig {
  Method method = Method::Smiso;
  ScheduleMode mode = ScheduleMode::Tuned;
  double eta = 1.0;
  int warmup_epochs = 2;
  bool averaging = false;  // use the averaging step bound in theory mode
};

StepSchedule make_schedule(const ScheduleConfig& cfg, int n, double mu,
                           const SmoothnessInfo& sm, const SamplingDist* q = nullptr);

// Weighted iterate average sum_t (gamma + t) x_t normalized by
// T (2 gamma + T - 1) / 2, accumulated incrementally.
class AveragingAccumulator {
 public:
  explicit AveragingAccumulator(double gamma) : gamma_(gamma) {
    if (gamma < 1) throw std::invalid_argument("averaging gamma must be >= 1");
  }

  void add(const std::vector<double>& x);
  std::vector<double> result() const;
  long count() const { return count_; }
  double weight_total() const { return weight_total_; }

 private:
  double gamma_;
  std::vector<double> weighted_sum_;
  double weight_total_ = 0;
  long count_ = 0;
};

}  // namespace smiso
