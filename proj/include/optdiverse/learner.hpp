#pragma once

#include <cstdint>
#include <vector>

#include "optdiverse/diversity.hpp"
#include "optdiverse/grid.hpp"
#include "optdiverse/option_model.hpp"

namespace optdiverse {

enum class Algorithm { oc, deoc, tdeoc };

struct LearningRates {
  double alpha_critic = 0.5;
  double alpha_pi = 1e-2;
  double alpha_beta = 5e-2;

  void validate() const;
  bool operator==(const LearningRates&) const = default;
};

/// Direction of the intra-option policy step.
///   logit:     dtheta = alpha Q_U d log pi / dz,     z = theta / temperature
///   parameter: dtheta = alpha Q_U d log pi / dtheta  (= logit step / temperature)
enum class PolicyStep { logit, parameter };

/// How V(s) in the termination advantage is formed from q_omega[s].
enum class OptionValueMode { max, epsilon_greedy };

/// OC, DEOC and TDEOC differ only in the flags below.
struct AlgorithmVariant {
  Algorithm tag = Algorithm::tdeoc;
  double tau = 0.0;
  BonusSpec bonus;
  bool augment_reward = false;
  bool update_terminations = true;
  OptionValueMode value_mode = OptionValueMode::max;
  PolicyStep policy_step = PolicyStep::logit;

  static AlgorithmVariant oc();
  static AlgorithmVariant deoc(double tau);
  static AlgorithmVariant tdeoc();

  /// `sparse_reward` tasks forbid reward augmentation for TDEOC.
  void validate(bool sparse_reward = true) const;
  bool uses_bonus() const { return augment_reward || tag == Algorithm::tdeoc; }
  bool operator==(const AlgorithmVariant&) const = default;
};

struct Transition {
  StateId s;
  int o = 0;
  int a = 0;
  double r = 0.0;
  double r_aug = 0.0;
  StateId s_next;
  bool terminal = false;
  double bonus_next = 0.0;
  double d_next = 0.0;
};

/// Independent generator streams of one run, so that the diversity
/// computation never perturbs the behaviour stream.
struct RunRngs {
  Rng env;
  Rng agent;
  Rng diversity;

  static RunRngs from_seed(std::uint64_t seed);
};

/// r_aug + gamma [(1 - beta) Q_omega(s', o) + beta max Q_omega(s', .)], or
/// r_aug alone on terminal transitions.
double q_u_target(const OptionModel& m, const Transition& tr, double gamma);

/// TD step on Q_U[s][o][a], then Q_omega[s][o] recomputed from Q_U.
void q_u_update(OptionModel& m, const Transition& tr, double gamma, const LearningRates& rates);

/// Q_omega[s][o] = sum_a pi_o(a|s) Q_U[s][o][a]
void refresh_option_value(OptionModel& m, StateId s, int o);

/// Likelihood-ratio step on theta_pi[o][s] weighted by Q_U[s][o][a].
void policy_update(OptionModel& m, const Transition& tr, const LearningRates& rates,
                   PolicyStep mode = PolicyStep::logit);

double advantage(const OptionModel& m, StateId s, int o);
double advantage(const OptionModel& m, StateId s, int o, OptionValueMode mode, double epsilon);

/// Option-critic termination step at s_next: descent on beta * advantage.
void termination_update_oc(OptionModel& m, const Transition& tr, const LearningRates& rates,
                           OptionValueMode mode = OptionValueMode::max, double epsilon = 0.0);
/// Diversity termination step at s_next: ascent on beta * D(s_next).
void termination_update_tdeoc(OptionModel& m, const Transition& tr, const LearningRates& rates);

struct StepRecord {
  StateId s;
  int option = 0;
  int action = 0;
  double reward = 0.0;
  double reward_aug = 0.0;
  bool option_terminated = false;
};

struct EpisodeLog {
  int steps = 0;
  bool reached_goal = false;
  StateId final_state;
  std::vector<StepRecord> records;
};

struct EpisodeParams {
  double gamma = 0.99;
  double epsilon = 0.01;
  int max_steps = 1000;
  double slip_probability = 0.0;
};

/// One episode of intra-option learning with the variant's termination rule.
EpisodeLog run_episode(OptionModel& m, const Grid& grid, const AlgorithmVariant& variant,
                       const LearningRates& rates, const EpisodeParams& params,
                       DiversityTracker& tracker, RunRngs& rngs);

}  // namespace optdiverse
