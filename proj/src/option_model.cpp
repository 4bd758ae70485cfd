#include "optdiverse/option_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace optdiverse {

OptionModel OptionModel::init(int n_options, int n_states, int n_actions, double temperature,
                              const InitSpec& spec) {
  if (n_options < 2) throw ConfigError("option model: need at least 2 options, got " + std::to_string(n_options));
  if (n_actions < 2) throw ConfigError("option model: need at least 2 actions, got " + std::to_string(n_actions));
  if (n_states < 1) throw ConfigError("option model: need at least 1 state");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw ConfigError("option model: temperature must be positive");

  OptionModel m;
  m.n_options_ = n_options;
  m.n_states_ = n_states;
  m.n_actions_ = n_actions;
  m.temperature_ = temperature;
  const auto no = static_cast<std::size_t>(n_options);
  const auto ns = static_cast<std::size_t>(n_states);
  const auto na = static_cast<std::size_t>(n_actions);
  m.theta_pi_.assign(no * ns * na, spec.theta_pi);
  m.theta_beta_.assign(no * ns, spec.theta_beta);
  m.q_omega_.assign(ns * no, spec.q_omega);
  m.q_u_.assign(ns * no * na, spec.q_u);
  return m;
}

bool OptionModel::all_finite() const {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(theta_pi_) && finite(theta_beta_) && finite(q_omega_) && finite(q_u_);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void policy_dist_into(const OptionModel& m, int o, StateId s, std::span<double> probs,
                      std::span<double> log_probs) {
  auto theta = m.theta_pi(o, s);
  const double inv_t = 1.0 / m.temperature();
  double mx = theta[0];
  for (double t : theta) mx = std::max(mx, t);
  double z = 0.0;
  for (std::size_t a = 0; a < theta.size(); ++a) {
    log_probs[a] = (theta[a] - mx) * inv_t;
    probs[a] = std::exp(log_probs[a]);
    z += probs[a];
  }
  const double log_z = std::log(z);
  for (std::size_t a = 0; a < theta.size(); ++a) {
    probs[a] /= z;
    log_probs[a] -= log_z;
  }
}

ActionDistribution policy_dist(const OptionModel& m, int o, StateId s) {
  ActionDistribution d;
  d.probs.resize(static_cast<std::size_t>(m.n_actions()));
  d.log_probs.resize(d.probs.size());
  policy_dist_into(m, o, s, d.probs, d.log_probs);
  return d;
}

double termination_prob(const OptionModel& m, int o, StateId s) {
  return sigmoid(m.theta_beta(o, s));
}

int greedy_option(const OptionModel& m, StateId s) {
  auto q = m.q_omega(s);
  // max_element returns the first maximum, which is the lowest index.
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

int select_option(const OptionModel& m, StateId s, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, m.n_options() - 1);
    return pick(rng);
  }
  return greedy_option(m, s);
}

double option_value_v(const OptionModel& m, StateId s) {
  auto q = m.q_omega(s);
  return *std::max_element(q.begin(), q.end());
}

double option_value_v_epsilon(const OptionModel& m, StateId s, double epsilon) {
  auto q = m.q_omega(s);
  double mean = 0.0;
  for (double v : q) mean += v;
  mean /= static_cast<double>(q.size());
  return (1.0 - epsilon) * option_value_v(m, s) + epsilon * mean;
}

int sample_index(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] > 0.0) last_positive = static_cast<int>(a);
    cum += probs[a];
    if (u < cum) return static_cast<int>(a);
  }
  return last_positive;
}

int sample_action(const OptionModel& m, int o, StateId s, Rng& rng) {
  constexpr std::size_t kStack = 16;
  const auto na = static_cast<std::size_t>(m.n_actions());
  if (na <= kStack) {
    std::array<double, kStack> p{}, lp{};
    policy_dist_into(m, o, s, std::span(p).first(na), std::span(lp).first(na));
    return sample_index(std::span<const double>(p).first(na), rng);
  }
  auto d = policy_dist(m, o, s);
  return sample_index(d.probs, rng);
}

}  // namespace optdiverse
