#include "optdiverse/learner.hpp"

#include <array>
#include <cassert>
#include <cmath>

namespace optdiverse {

void LearningRates::validate() const {
  if (!(alpha_critic > 0.0)) throw ConfigError("critic_lr must be > 0");
  if (!(alpha_pi > 0.0)) throw ConfigError("intra_option_lr must be > 0");
  if (!(alpha_beta > 0.0)) throw ConfigError("termination_lr must be > 0");
}

AlgorithmVariant AlgorithmVariant::oc() {
  AlgorithmVariant v;
  v.tag = Algorithm::oc;
  return v;
}

AlgorithmVariant AlgorithmVariant::deoc(double tau) {
  AlgorithmVariant v;
  v.tag = Algorithm::deoc;
  v.tau = tau;
  v.augment_reward = true;
  return v;
}

AlgorithmVariant AlgorithmVariant::tdeoc() {
  AlgorithmVariant v;
  v.tag = Algorithm::tdeoc;
  return v;
}

void AlgorithmVariant::validate(bool sparse_reward) const {
  (void)Tau(tau);
  bonus.validate();
  if (tag == Algorithm::oc && augment_reward)
    throw ConfigError("augment_reward: option-critic does not augment rewards");
  if (tag == Algorithm::tdeoc && sparse_reward && augment_reward)
    throw ConfigError("augment_reward: TDEOC skips reward augmentation on sparse-reward tasks");
}

RunRngs RunRngs::from_seed(std::uint64_t seed) {
  auto stream = [seed](std::uint32_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
    return Rng(seq);
  };
  return RunRngs{stream(1), stream(2), stream(3)};
}

double q_u_target(const OptionModel& m, const Transition& tr, double gamma) {
  if (tr.terminal) return tr.r_aug;
  const double beta = termination_prob(m, tr.o, tr.s_next);
  const double continue_value = m.q_omega(tr.s_next)[tr.o];
  const double switch_value = option_value_v(m, tr.s_next);
  return tr.r_aug + gamma * ((1.0 - beta) * continue_value + beta * switch_value);
}

void refresh_option_value(OptionModel& m, StateId s, int o) {
  constexpr std::size_t kStack = 16;
  const auto na = static_cast<std::size_t>(m.n_actions());
  std::vector<double> heap_p, heap_lp;
  std::array<double, kStack> stack_p{}, stack_lp{};
  std::span<double> p, lp;
  if (na <= kStack) {
    p = std::span(stack_p).first(na);
    lp = std::span(stack_lp).first(na);
  } else {
    heap_p.resize(na);
    heap_lp.resize(na);
    p = heap_p;
    lp = heap_lp;
  }
  policy_dist_into(m, o, s, p, lp);
  auto q = m.q_u(s, o);
  double v = 0.0;
  for (std::size_t a = 0; a < na; ++a) v += p[a] * q[a];
  m.q_omega(s)[o] = v;
}

void q_u_update(OptionModel& m, const Transition& tr, double gamma, const LearningRates& rates) {
  const double target = q_u_target(m, tr, gamma);
  double& q = m.q_u(tr.s, tr.o)[tr.a];
  q += rates.alpha_critic * (target - q);
  refresh_option_value(m, tr.s, tr.o);
  assert(m.all_finite());
}

void policy_update(OptionModel& m, const Transition& tr, const LearningRates& rates, PolicyStep mode) {
  const double critic = m.q_u(tr.s, tr.o)[tr.a];
  if (critic == 0.0) return;
  auto d = policy_dist(m, tr.o, tr.s);
  auto theta = m.theta_pi(tr.o, tr.s);
  double scale = rates.alpha_pi * critic;
  if (mode == PolicyStep::parameter) scale /= m.temperature();
  for (std::size_t b = 0; b < theta.size(); ++b) {
    const double indicator = static_cast<int>(b) == tr.a ? 1.0 : 0.0;
    theta[b] += scale * (indicator - d.probs[b]);
  }
  assert(m.all_finite());
}

double advantage(const OptionModel& m, StateId s, int o) {
  return m.q_omega(s)[o] - option_value_v(m, s);
}

double advantage(const OptionModel& m, StateId s, int o, OptionValueMode mode, double epsilon) {
  if (mode == OptionValueMode::max) return advantage(m, s, o);
  return m.q_omega(s)[o] - option_value_v_epsilon(m, s, epsilon);
}

void termination_update_oc(OptionModel& m, const Transition& tr, const LearningRates& rates,
                           OptionValueMode mode, double epsilon) {
  const double beta = termination_prob(m, tr.o, tr.s_next);
  const double adv = advantage(m, tr.s_next, tr.o, mode, epsilon);
  m.theta_beta(tr.o, tr.s_next) -= rates.alpha_beta * beta * (1.0 - beta) * adv;
}

void termination_update_tdeoc(OptionModel& m, const Transition& tr, const LearningRates& rates) {
  const double beta = termination_prob(m, tr.o, tr.s_next);
  m.theta_beta(tr.o, tr.s_next) += rates.alpha_beta * beta * (1.0 - beta) * tr.d_next;
}

EpisodeLog run_episode(OptionModel& m, const Grid& grid, const AlgorithmVariant& variant,
                       const LearningRates& rates, const EpisodeParams& params,
                       DiversityTracker& tracker, RunRngs& rngs) {
  EpisodeLog log;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const PolicyView policies(m);
  const Tau tau(variant.tau);

  StateId s = reset(grid, rngs.env);
  int o = select_option(m, s, params.epsilon, rngs.agent);
  for (int t = 0; t < params.max_steps; ++t) {
    const int a = sample_action(m, o, s, rngs.agent);
    const StepOutcome out =
        step_with_slip(grid, s, static_cast<Action>(a), params.slip_probability, rngs.env);

    Transition tr;
    tr.s = s;
    tr.o = o;
    tr.a = a;
    tr.r = out.reward;
    tr.s_next = out.next_state;
    tr.terminal = out.terminal;
    tr.r_aug = tr.r;
    if (variant.augment_reward) {
      const double bonus_s = pseudo_reward(policies, s, variant.bonus, params.epsilon, rngs.diversity);
      tr.r_aug = augment(tr.r, bonus_s, tau);
    }
    if (variant.tag == Algorithm::tdeoc && !tr.terminal) {
      tr.bonus_next = pseudo_reward(policies, tr.s_next, variant.bonus, params.epsilon, rngs.diversity);
      tracker.record(tr.bonus_next);
      tr.d_next = tracker.relative_diversity(tr.bonus_next);
    }

    bool terminated = false;
    int o_next = o;
    if (!tr.terminal) {
      terminated = unit(rngs.agent) < termination_prob(m, o, tr.s_next);
      if (terminated) o_next = select_option(m, tr.s_next, params.epsilon, rngs.agent);
    }

    q_u_update(m, tr, params.gamma, rates);
    policy_update(m, tr, rates, variant.policy_step);
    refresh_option_value(m, tr.s, tr.o);
    if (!tr.terminal && variant.update_terminations) {
      if (variant.tag == Algorithm::tdeoc)
        termination_update_tdeoc(m, tr, rates);
      else
        termination_update_oc(m, tr, rates, variant.value_mode, params.epsilon);
    }

    log.records.push_back({s, o, a, tr.r, tr.r_aug, terminated});
    log.steps = t + 1;
    s = tr.s_next;
    o = o_next;
    if (tr.terminal) {
      log.reached_goal = true;
      break;
    }
  }
  log.final_state = s;
  return log;
}

}  // namespace optdiverse
