#include "optdiverse/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "optdiverse/diversity.hpp"

namespace optdiverse {

namespace {

// Reference formulas written out directly, independent of the library paths
// they check.
double naive_log_softmax(std::span<const double> theta, double temperature, int a) {
  double z = 0.0;
  for (double t : theta) z += std::exp(t / temperature);
  return theta[a] / temperature - std::log(z);
}

double naive_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

Transition random_transition(const OptionModel& m, Rng& rng) {
  std::uniform_int_distribution<int> pick_o(0, m.n_options() - 1);
  std::uniform_int_distribution<int> pick_s(0, m.n_states() - 1);
  std::uniform_int_distribution<int> pick_a(0, m.n_actions() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Transition tr;
  tr.o = pick_o(rng);
  tr.a = pick_a(rng);
  tr.s = StateId{pick_s(rng)};
  do {
    tr.s_next = StateId{pick_s(rng)};
  } while (tr.s_next == tr.s);
  tr.r = tr.r_aug = normal(rng);
  tr.d_next = normal(rng);
  tr.bonus_next = std::abs(normal(rng));
  return tr;
}

constexpr double kFdStep = 1e-5;
constexpr double kGradTolerance = 1e-6;

}  // namespace

OptionModel random_model(int n_options, int n_states, int n_actions, double temperature, Rng& rng) {
  OptionModel m = OptionModel::init(n_options, n_states, n_actions, temperature);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : m.theta_pi_data()) v = normal(rng);
  for (double& v : m.theta_beta_data()) v = normal(rng);
  for (double& v : m.q_omega_data()) v = normal(rng);
  for (double& v : m.q_u_data()) v = normal(rng);
  return m;
}

namespace {

// Finite-difference step in theta for the chosen convention: the logit step
// differentiates with respect to z = theta / temperature.
PropertyResult check_policy_step(const char* name, const UpdateFn& update, PolicyStep mode, int trials,
                                 Rng& rng) {
  PropertyResult res{name, true, ""};
  std::uniform_real_distribution<double> temp_dist(0.5, 2.0);
  std::uniform_real_distribution<double> lr_dist(1e-3, 1e-1);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    OptionModel m = random_model(3, 5, 4, temp_dist(rng), rng);
    const Transition tr = random_transition(m, rng);
    LearningRates rates{0.5, lr_dist(rng), 0.1};
    OptionModel updated = m;
    update(updated, tr, rates);

    const double critic = m.q_u(tr.s, tr.o)[tr.a];
    const double h = mode == PolicyStep::logit ? kFdStep * m.temperature() : kFdStep;
    std::vector<double> expected(static_cast<std::size_t>(m.n_actions()));
    double scale = 0.0;
    for (int b = 0; b < m.n_actions(); ++b) {
      std::vector<double> theta(m.theta_pi(tr.o, tr.s).begin(), m.theta_pi(tr.o, tr.s).end());
      theta[b] += h;
      const double up = naive_log_softmax(theta, m.temperature(), tr.a);
      theta[b] -= 2 * h;
      const double down = naive_log_softmax(theta, m.temperature(), tr.a);
      const double dlog = (up - down) / (2 * h) * (mode == PolicyStep::logit ? m.temperature() : 1.0);
      expected[b] = rates.alpha_pi * critic * dlog;
      scale = std::max(scale, std::abs(expected[b]));
    }
    for (int b = 0; b < m.n_actions(); ++b) {
      const double got = updated.theta_pi(tr.o, tr.s)[b] - m.theta_pi(tr.o, tr.s)[b];
      worst = std::max(worst, std::abs(got - expected[b]) / scale);
    }
    // Only theta_pi[o][s] may change.
    OptionModel restored = updated;
    std::copy(m.theta_pi(tr.o, tr.s).begin(), m.theta_pi(tr.o, tr.s).end(), restored.theta_pi(tr.o, tr.s).begin());
    if (!(restored == m)) {
      res.passed = false;
      res.detail = "policy update touched tables other than theta_pi[o][s]";
      return res;
    }
  }
  res.passed = worst <= kGradTolerance;
  res.detail = fmt("max relative error %.3e over %g models", worst, trials);
  return res;
}

}  // namespace

PropertyResult check_policy_gradient(const UpdateHooks& hooks, int trials, Rng& rng) {
  PropertyResult logit = check_policy_step("", hooks.policy_logit, PolicyStep::logit, trials, rng);
  PropertyResult param = check_policy_step("", hooks.policy_parameter, PolicyStep::parameter, trials, rng);
  PropertyResult res{"policy_gradient_matches_finite_differences", logit.passed && param.passed,
                     "logit step: " + logit.detail + "; parameter step: " + param.detail};
  return res;
}

namespace {

PropertyResult check_termination(const char* name, const UpdateFn& update, bool diversity_rule, int trials,
                                 Rng& rng) {
  PropertyResult res{name, true, ""};
  std::uniform_real_distribution<double> lr_dist(1e-3, 2e-1);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    OptionModel m = random_model(3, 5, 4, 1.0, rng);
    const Transition tr = random_transition(m, rng);
    LearningRates rates{0.5, 1e-2, lr_dist(rng)};
    OptionModel updated = m;
    update(updated, tr, rates);

    const double theta = m.theta_beta(tr.o, tr.s_next);
    const double dbeta = (naive_sigmoid(theta + kFdStep) - naive_sigmoid(theta - kFdStep)) / (2 * kFdStep);
    double expected = 0.0;
    if (diversity_rule) {
      expected = rates.alpha_beta * dbeta * tr.d_next;
    } else {
      auto q = m.q_omega(tr.s_next);
      const double adv = q[tr.o] - *std::max_element(q.begin(), q.end());
      expected = -rates.alpha_beta * dbeta * adv;
    }
    const double got = updated.theta_beta(tr.o, tr.s_next) - theta;
    if (expected == 0.0) {
      worst = std::max(worst, std::abs(got) > 0.0 ? 1.0 : 0.0);
    } else {
      worst = std::max(worst, std::abs(got - expected) / std::abs(expected));
    }
    OptionModel restored = updated;
    restored.theta_beta(tr.o, tr.s_next) = theta;
    if (!(restored == m)) {
      res.passed = false;
      res.detail = "termination update touched tables other than theta_beta[o][s']";
      return res;
    }
  }
  res.passed = worst <= kGradTolerance;
  res.detail = fmt("max relative error %.3e over %g models", worst, trials);
  return res;
}

}  // namespace

PropertyResult check_termination_gradient_oc(const UpdateHooks& hooks, int trials, Rng& rng) {
  return check_termination("oc_termination_gradient_matches_finite_differences", hooks.termination_oc, false,
                           trials, rng);
}

PropertyResult check_termination_gradient_tdeoc(const UpdateHooks& hooks, int trials, Rng& rng) {
  return check_termination("tdeoc_termination_gradient_matches_finite_differences", hooks.termination_tdeoc, true,
                           trials, rng);
}

namespace {

ActionDistribution random_softmax(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<double> logits(static_cast<std::size_t>(n));
  double z = 0.0;
  for (auto& l : logits) {
    l = normal(rng);
    z += std::exp(l);
  }
  ActionDistribution d;
  for (double l : logits) {
    d.probs.push_back(std::exp(l) / z);
    d.log_probs.push_back(l - std::log(z));
  }
  return d;
}

}  // namespace

PropertyResult check_gibbs_inequality(int trials, Rng& rng) {
  PropertyResult res{"gibbs_inequality", true, ""};
  std::uniform_int_distribution<int> size_dist(2, 8);
  double min_gap = std::numeric_limits<double>::infinity();
  double max_self_err = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int n = size_dist(rng);
    const auto p = random_softmax(n, rng);
    const auto q = random_softmax(n, rng);
    const double gap = cross_entropy(p, q) - entropy(p);
    min_gap = std::min(min_gap, gap);
    max_self_err = std::max(max_self_err, std::abs(cross_entropy(p, p) - entropy(p)));
  }
  // Distinct random pairs must sit strictly above the entropy; identical
  // pairs must meet it.
  res.passed = min_gap > 1e-9 && max_self_err <= 1e-9;
  res.detail = fmt("min H(p;q)-H(p) = %.3e, max |H(p;p)-H(p)| = %.3e", min_gap, max_self_err);
  return res;
}

PropertyResult check_entropy_bounds(int trials, Rng& rng) {
  PropertyResult res{"entropy_bounds", true, ""};
  std::uniform_int_distribution<int> size_dist(2, 8);
  for (int t = 0; t < trials; ++t) {
    const int n = size_dist(rng);
    const double h = entropy(random_softmax(n, rng));
    if (h < 0.0 || h > std::log(static_cast<double>(n)) + 1e-12) {
      res.passed = false;
      res.detail = fmt("entropy %.6f outside [0, ln %g]", h, n);
      return res;
    }
  }
  res.detail = "0 <= H <= ln n on every sample";
  return res;
}

PropertyResult check_standardization(int trials, Rng& rng) {
  PropertyResult res{"buffer_standardization_mean0_std1", true, ""};
  std::uniform_int_distribution<int> size_dist(2, 200);
  std::uniform_real_distribution<double> loc(-5.0, 5.0), spread(0.1, 10.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto n = static_cast<std::size_t>(size_dist(rng));
    DiversityTracker tracker(TrackerMode::buffer_standardize, n);
    std::normal_distribution<double> sample(loc(rng), spread(rng));
    std::vector<double> xs(n);
    for (auto& x : xs) {
      x = sample(rng);
      tracker.record(x);
    }
    double mean = 0.0, sq = 0.0;
    std::vector<double> ds;
    for (double x : xs) ds.push_back(tracker.relative_diversity(x));
    for (double d : ds) mean += d;
    mean /= static_cast<double>(n);
    for (double d : ds) sq += (d - mean) * (d - mean);
    const double sd = std::sqrt(sq / static_cast<double>(n));
    worst = std::max({worst, std::abs(mean), std::abs(sd - 1.0)});
  }
  res.passed = worst <= 1e-9;
  res.detail = fmt("max deviation from mean 0 / std 1: %.3e", worst);
  return res;
}

PropertyResult check_q_u_fixed_point(int trials, Rng& rng) {
  PropertyResult res{"q_u_update_fixed_point", true, ""};
  for (int t = 0; t < trials; ++t) {
    OptionModel m = random_model(3, 6, 4, 1.0, rng);
    for (int s = 0; s < m.n_states(); ++s)
      for (int o = 0; o < m.n_options(); ++o) refresh_option_value(m, StateId{s}, o);
    Transition tr = random_transition(m, rng);
    tr.terminal = (t % 4 == 0);
    m.q_u(tr.s, tr.o)[tr.a] = q_u_target(m, tr, 0.99);
    refresh_option_value(m, tr.s, tr.o);
    const OptionModel before = m;
    q_u_update(m, tr, 0.99, LearningRates{0.5, 1e-2, 1e-1});
    if (!(m == before)) {
      res.passed = false;
      res.detail = "update at the target changed the model";
      return res;
    }
  }
  res.detail = "no-op at the target on every sample";
  return res;
}

PropertyResult check_tau_zero_identity(int trials, Rng& rng) {
  PropertyResult res{"tau_zero_augmentation_identity", true, ""};
  std::normal_distribution<double> normal(0.0, 10.0);
  for (int t = 0; t < trials; ++t) {
    const double r = normal(rng);
    const double b = std::abs(normal(rng));
    if (augment(r, b, Tau(0.0)) != r) {
      res.passed = false;
      res.detail = fmt("augment(%g, b, 0) != %g", r, r);
      return res;
    }
  }
  res.detail = "augment(r, b, 0) == r exactly";
  return res;
}

PropertyResult check_variant_reduction(std::uint64_t seed) {
  PropertyResult res{"variant_reduction_bit_identical", true, ""};
  const Grid grid = build_four_rooms();
  const LearningRates rates{0.5, 1e-2, 5e-2};
  const EpisodeParams params{0.99, 0.05, 300, 1.0 / 3.0};

  auto trace = [&](AlgorithmVariant variant) {
    variant.update_terminations = false;
    variant.tau = 0.0;
    OptionModel m = OptionModel::init(4, grid.num_states(), kNumActions, 1e-3);
    DiversityTracker tracker(TrackerMode::moving_mean_center);
    RunRngs rngs = RunRngs::from_seed(seed);
    std::vector<EpisodeLog> logs;
    for (int e = 0; e < 30; ++e) logs.push_back(run_episode(m, grid, variant, rates, params, tracker, rngs));
    return std::make_pair(std::move(logs), std::move(m));
  };
  const auto [oc_logs, oc_model] = trace(AlgorithmVariant::oc());
  const auto [td_logs, td_model] = trace(AlgorithmVariant::tdeoc());

  long steps = 0;
  for (std::size_t e = 0; e < oc_logs.size(); ++e) {
    const auto& a = oc_logs[e].records;
    const auto& b = td_logs[e].records;
    if (a.size() != b.size()) {
      res.passed = false;
      break;
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k].s != b[k].s || a[k].option != b[k].option || a[k].action != b[k].action ||
          a[k].reward_aug != b[k].reward_aug || a[k].option_terminated != b[k].option_terminated) {
        res.passed = false;
        break;
      }
    }
    steps += static_cast<long>(a.size());
  }
  res.passed = res.passed && oc_model == td_model;
  res.detail = res.passed ? "OC and TDEOC trajectories identical over " + std::to_string(steps) + " steps"
                          : "trajectories diverged";
  return res;
}

std::vector<PropertyResult> run_verify_suite(const UpdateHooks& hooks, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PropertyResult> out;
  out.push_back(check_policy_gradient(hooks, 100, rng));
  out.push_back(check_termination_gradient_oc(hooks, 100, rng));
  out.push_back(check_termination_gradient_tdeoc(hooks, 100, rng));
  out.push_back(check_gibbs_inequality(10000, rng));
  out.push_back(check_entropy_bounds(10000, rng));
  out.push_back(check_standardization(200, rng));
  out.push_back(check_q_u_fixed_point(100, rng));
  out.push_back(check_tau_zero_identity(1000, rng));
  out.push_back(check_variant_reduction(seed));
  return out;
}

}  // namespace optdiverse
