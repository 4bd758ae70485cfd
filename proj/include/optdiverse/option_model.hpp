#pragma once

#include <span>
#include <vector>

#include "optdiverse/grid.hpp"

namespace optdiverse {

/// Action probabilities together with their logarithms. Log-probabilities are
/// computed directly from the logits so they stay finite when a probability
/// underflows to zero at low temperatures.
struct ActionDistribution {
  std::vector<double> probs;
  std::vector<double> log_probs;

  std::size_t size() const { return probs.size(); }
};

/// Constant initial values for each table.
struct InitSpec {
  double theta_pi = 0.0;
  double theta_beta = 0.0;
  double q_omega = 0.0;
  double q_u = 0.0;
};

/// All learnable tables of a tabular option set:
///   theta_pi   [option][state][action]  softmax policy parameters
///   theta_beta [option][state]          sigmoid termination parameters
///   q_omega    [state][option]          option values
///   q_u        [state][option][action]  state-option-action values
class OptionModel {
 public:
  static OptionModel init(int n_options, int n_states, int n_actions, double temperature,
                          const InitSpec& spec = {});

  int n_options() const { return n_options_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  double temperature() const { return temperature_; }

  std::span<double> theta_pi(int o, StateId s) {
    return {theta_pi_.data() + pi_offset(o, s), static_cast<std::size_t>(n_actions_)};
  }
  std::span<const double> theta_pi(int o, StateId s) const {
    return {theta_pi_.data() + pi_offset(o, s), static_cast<std::size_t>(n_actions_)};
  }
  double& theta_beta(int o, StateId s) { return theta_beta_[beta_offset(o, s)]; }
  double theta_beta(int o, StateId s) const { return theta_beta_[beta_offset(o, s)]; }

  std::span<double> q_omega(StateId s) {
    return {q_omega_.data() + static_cast<std::size_t>(s.index) * n_options_,
            static_cast<std::size_t>(n_options_)};
  }
  std::span<const double> q_omega(StateId s) const {
    return {q_omega_.data() + static_cast<std::size_t>(s.index) * n_options_,
            static_cast<std::size_t>(n_options_)};
  }
  std::span<double> q_u(StateId s, int o) {
    return {q_u_.data() + qu_offset(s, o), static_cast<std::size_t>(n_actions_)};
  }
  std::span<const double> q_u(StateId s, int o) const {
    return {q_u_.data() + qu_offset(s, o), static_cast<std::size_t>(n_actions_)};
  }

  // Flat views, used for snapshots and for checking which tables an update touched.
  std::span<const double> theta_pi_data() const { return theta_pi_; }
  std::span<const double> theta_beta_data() const { return theta_beta_; }
  std::span<const double> q_omega_data() const { return q_omega_; }
  std::span<const double> q_u_data() const { return q_u_; }
  std::span<double> theta_pi_data() { return theta_pi_; }
  std::span<double> theta_beta_data() { return theta_beta_; }
  std::span<double> q_omega_data() { return q_omega_; }
  std::span<double> q_u_data() { return q_u_; }

  bool all_finite() const;

  bool operator==(const OptionModel&) const = default;

 private:
  std::size_t pi_offset(int o, StateId s) const {
    return (static_cast<std::size_t>(o) * n_states_ + s.index) * n_actions_;
  }
  std::size_t beta_offset(int o, StateId s) const {
    return static_cast<std::size_t>(o) * n_states_ + s.index;
  }
  std::size_t qu_offset(StateId s, int o) const {
    return (static_cast<std::size_t>(s.index) * n_options_ + o) * n_actions_;
  }

  int n_options_ = 0;
  int n_states_ = 0;
  int n_actions_ = 0;
  double temperature_ = 1.0;
  std::vector<double> theta_pi_;
  std::vector<double> theta_beta_;
  std::vector<double> q_omega_;
  std::vector<double> q_u_;
};

double sigmoid(double x);

/// Boltzmann distribution over theta_pi[o][s] / temperature, max-subtracted.
ActionDistribution policy_dist(const OptionModel& m, int o, StateId s);
/// Allocation-free variant writing into caller storage of size n_actions.
void policy_dist_into(const OptionModel& m, int o, StateId s, std::span<double> probs,
                      std::span<double> log_probs);

double termination_prob(const OptionModel& m, int o, StateId s);

/// Epsilon-greedy over q_omega[s]; ties go to the lowest option index.
int select_option(const OptionModel& m, StateId s, double epsilon, Rng& rng);
int greedy_option(const OptionModel& m, StateId s);

/// max_o q_omega[s][o]
double option_value_v(const OptionModel& m, StateId s);
/// Expected q_omega[s] under the epsilon-greedy policy over options.
double option_value_v_epsilon(const OptionModel& m, StateId s, double epsilon);

int sample_action(const OptionModel& m, int o, StateId s, Rng& rng);
/// Inverse-CDF draw from a probability vector.
int sample_index(std::span<const double> probs, Rng& rng);

}  // namespace optdiverse
