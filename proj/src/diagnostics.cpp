#include "smiso/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace smiso {

namespace {

double pool_max_norm_sq(const FinitePool& pool) {
  double m = 0;
  for (const auto& row : pool.draws)
    for (const auto& fv : row) m = std::max(m, fv.squared_norm());
  return m;
}

}  // namespace

ReferenceSolution reference_solve(const ProblemSpec& spec, const Dataset& d,
                                  const FinitePool& pool, double tol, long max_iter) {
  spec.validate();
  const double L = loss_smoothness(spec.loss) * pool_max_norm_sq(pool) + spec.mu;
  const double step = 1.0 / L;
  const double kappa = L / spec.mu;
  const double beta = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);

  std::vector<double> x(d.dim, 0.0), y(d.dim, 0.0), x_prev(d.dim, 0.0);
  ReferenceSolution ref;
  for (long it = 0; it < max_iter; ++it) {
    std::vector<double> g = pool_full_grad(spec, d, pool, y);
    x_prev = x;
    for (int j = 0; j < d.dim; ++j) x[j] = y[j] - step * g[j];
    if (spec.composite()) prox_l1_inplace(x, step * spec.l1_weight, x);
    for (int j = 0; j < d.dim; ++j) y[j] = x[j] + beta * (x[j] - x_prev[j]);

    // prox-mapped optimality residual at x
    std::vector<double> gx = pool_full_grad(spec, d, pool, x);
    double res = 0;
    if (spec.composite()) {
      std::vector<double> xn(d.dim);
      for (int j = 0; j < d.dim; ++j) xn[j] = x[j] - step * gx[j];
      prox_l1_inplace(xn, step * spec.l1_weight, xn);
      for (int j = 0; j < d.dim; ++j) {
        double r = (x[j] - xn[j]) / step;
        res += r * r;
      }
    } else {
      res = squared_norm(gx);
    }
    ref.residual = std::sqrt(res);
    if (ref.residual <= tol) {
      ref.converged = true;
      break;
    }
  }
  ref.x_star = x;
  ref.F_star = pool_full_objective(spec, d, pool, x);
  ref.z_star.resize(d.n());
  for (int i = 0; i < d.n(); ++i) {
    std::vector<double> gi = pool_component_grad(spec, d, pool, i, x);
    ref.z_star[i].resize(d.dim);
    for (int j = 0; j < d.dim; ++j) ref.z_star[i][j] = x[j] - gi[j] / spec.mu;
  }
  return ref;
}

VarianceReport estimate_variances(const ProblemSpec& spec, const Dataset& d,
                                  const FinitePool& pool, const ReferenceSolution& ref,
                                  const SamplingDist* q) {
  const auto& x = ref.x_star;
  VarianceReport rep;
  rep.sigma_i_sq.resize(d.n());
  double between = 0;
  for (int i = 0; i < d.n(); ++i) {
    std::vector<double> gi = pool_component_grad(spec, d, pool, i, x);
    double si = 0;
    for (int k = 0; k < pool.K; ++k) {
      const FeatureVector& xi = pool.at(i, k);
      double dphi = loss_deriv(spec.loss, d.samples[i].label, xi.dot(x));
      // || dphi xi + mu x - gi ||^2
      std::vector<double> diff(d.dim);
      for (int j = 0; j < d.dim; ++j) diff[j] = spec.mu * x[j] - gi[j];
      xi.add_to(dphi, diff);
      si += squared_norm(diff);
    }
    rep.sigma_i_sq[i] = si / pool.K;
    rep.sigma_p_sq += rep.sigma_i_sq[i];
    between += squared_norm(gi);
  }
  rep.sigma_p_sq /= d.n();
  rep.sigma_tot_sq = rep.sigma_p_sq + between / d.n();
  // guard against pure round-off when every draw of an example coincides
  if (rep.sigma_p_sq > 1e-15 * std::max(1.0, rep.sigma_tot_sq))
    rep.ratio = rep.sigma_tot_sq / rep.sigma_p_sq;
  if (q) {
    double sq = 0;
    for (int i = 0; i < d.n(); ++i) sq += rep.sigma_i_sq[i] / (q->q[i] * d.n());
    rep.sigma_q_sq = sq / d.n();
  }
  return rep;
}

std::optional<double> feature_variance_ratio(const Dataset& d, const PerturbationSpec& pert,
                                             int k_draws, uint64_t seed) {
  if (k_draws < 2) throw std::invalid_argument("feature_variance_ratio: k_draws must be >= 2");
  const int n = d.n();
  std::vector<double> m_tot(d.dim, 0.0);
  double mean_sq = 0;  // E ||xi^rho||^2 over all (i, draw)
  double within = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> m_i(d.dim, 0.0);
    double sq_i = 0;
    for (int k = 0; k < k_draws; ++k) {
      CounterStream s(pert.master_seed ^ seed, static_cast<uint64_t>(i),
                      StreamPurpose::Perturbation, static_cast<uint64_t>(k));
      FeatureVector xi = draw(pert, d.samples[i].features, s);
      xi.add_to(1.0 / k_draws, m_i);
      sq_i += xi.squared_norm() / k_draws;
    }
    within += sq_i - squared_norm(m_i);
    mean_sq += sq_i;
    for (int j = 0; j < d.dim; ++j) m_tot[j] += m_i[j] / n;
  }
  within /= n;
  mean_sq /= n;
  double total = mean_sq - squared_norm(m_tot);
  if (within <= 0) return std::nullopt;
  return total / within;
}

namespace {

double z_table_distance_sq(const SolverState& s, const Dataset& d, const ReferenceSolution& ref,
                           int i) {
  const FeatureVector& fv = d.samples[i].features;
  const auto& z = s.z_vals[i];
  const auto& zs = ref.z_star[i];
  double acc = squared_norm(zs);
  if (fv.sparse) {
    for (size_t k = 0; k < fv.indices.size(); ++k) {
      double zj = z[k], zsj = zs[fv.indices[k]];
      acc += zj * zj - 2.0 * zj * zsj;
    }
  } else {
    acc = 0;
    for (size_t k = 0; k < z.size(); ++k) {
      double r = z[k] - zs[k];
      acc += r * r;
    }
  }
  return acc;
}

}  // namespace

LyapunovValue lyapunov_smooth(const SolverState& s, const Dataset& d,
                              const ReferenceSolution& ref, double alpha_t) {
  if (s.x.size() != ref.x_star.size())
    throw std::invalid_argument("lyapunov: dimension mismatch");
  LyapunovValue v;
  double it = 0;
  for (size_t j = 0; j < s.x.size(); ++j) {
    double r = s.x[j] - ref.x_star[j];
    it += r * r;
  }
  v.iterate_term = 0.5 * it;
  double zt = 0;
  const int n = d.n();
  for (int i = 0; i < n; ++i) zt += z_table_distance_sq(s, d, ref, i);
  v.z_term = alpha_t / (static_cast<double>(n) * n) * zt;
  v.value = v.iterate_term + v.z_term;
  return v;
}

LyapunovValue lyapunov_composite(const SolverState& s, const ProblemSpec& spec, const Dataset& d,
                                 const ReferenceSolution& ref, double alpha_t,
                                 const SamplingDist& q, double D_t_at_x_t) {
  LyapunovValue v;
  double F_star = ref.F_star;
  v.iterate_term = F_star - D_t_at_x_t;
  double zt = 0;
  const int n = d.n();
  for (int i = 0; i < n; ++i) zt += z_table_distance_sq(s, d, ref, i) / (q.q[i] * n);
  v.z_term = spec.mu * alpha_t / (static_cast<double>(n) * n) * zt;
  v.value = v.iterate_term + v.z_term;
  return v;
}

LowerBoundTracker::LowerBoundTracker(const ProblemSpec& spec, const Dataset& d)
    : spec_(spec), d_(&d), z_bar_(d.dim, 0.0), c_i_(d.n(), 0.0) {
  z_.resize(d.n());
  for (int i = 0; i < d.n(); ++i) z_[i].assign(d.samples[i].features.values.size(), 0.0);
}

void LowerBoundTracker::update(long t, int index, const FeatureVector& xi,
                               const std::vector<double>& x_prev, double a) {
  if (t != t_ + 1) throw std::logic_error("lower-bound tracker out of lockstep with solver");
  t_ = t;
  const Sample& sample = d_->samples[index];
  const double mu = spec_.mu;
  double margin = xi.dot(x_prev);
  double dphi = loss_deriv(spec_.loss, sample.label, margin);
  double fval = loss_value(spec_.loss, sample.label, margin) + 0.5 * mu * squared_norm(x_prev);
  // full gradient norm: ||dphi xi + mu x_prev||^2
  double gsq = dphi * dphi * xi.squared_norm() + 2.0 * dphi * mu * margin +
               mu * mu * squared_norm(x_prev);
  double c_l = fval - gsq / (2.0 * mu);

  auto& z = z_[index];
  const int n = d_->n();
  double z_old_sq = 0, z_new_sq = 0, dist_sq = 0;
  for (size_t k = 0; k < z.size(); ++k) {
    double w = -dphi / mu * xi.values[k];  // k-th entry of x_prev - grad/mu
    double r = z[k] - w;
    dist_sq += r * r;
    z_old_sq += z[k] * z[k];
    double zn = (1.0 - a) * z[k] + a * w;
    z_new_sq += zn * zn;
    double delta = zn - z[k];
    z[k] = zn;
    int j = xi.sparse ? xi.indices[k] : static_cast<int>(k);
    z_bar_[j] += delta / n;
  }
  // combining two mu-quadratics shifts the offset by the cross term
  double c_old = c_i_[index];
  double c_new = (1.0 - a) * c_old + a * c_l + 0.5 * mu * a * (1.0 - a) * dist_sq;
  c_i_[index] = c_new;
  c_bar_ += (c_new - c_old) / n;
  z_sq_mean_ += (z_new_sq - z_old_sq) / n;
}

double LowerBoundTracker::evaluate(const std::vector<double>& x) const {
  double quad = squared_norm(x) - 2.0 * dot(x, z_bar_) + z_sq_mean_;
  double h = spec_.l1_weight * l1_norm(x);
  return c_bar_ + 0.5 * spec_.mu * quad + h;
}

std::vector<double> LowerBoundTracker::argmin_smooth() const { return z_bar_; }

double objective_estimate(const ProblemSpec& spec, const Dataset& d,
                          const std::vector<double>& x, const PerturbationSpec& pert, int k,
                          uint64_t seed) {
  return mc_full_objective(spec, d, pert, x, k, seed);
}

double theorem2_nu(double gamma, double C0, double sigma_p_sq, double mu) {
  if (gamma < 0 || C0 < 0 || sigma_p_sq < 0 || mu <= 0)
    throw std::invalid_argument("theorem2_nu: invalid inputs");
  return std::max(8.0 * sigma_p_sq / (mu * mu), (gamma + 1.0) * C0);
}

bool theorem2_bound_holds(double C_t, long t, double nu, double gamma, double slack) {
  return C_t <= slack * nu / (gamma + static_cast<double>(t) + 1.0);
}

}  // namespace smiso
