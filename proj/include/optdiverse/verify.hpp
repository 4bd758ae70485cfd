#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "optdiverse/learner.hpp"

namespace optdiverse {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

using UpdateFn = std::function<void(OptionModel&, const Transition&, const LearningRates&)>;

/// The update rules the oracle suite checks. Defaults to the library rules;
/// tests swap one out to confirm the suite catches a broken update.
struct UpdateHooks {
  UpdateFn policy_logit = [](OptionModel& m, const Transition& tr, const LearningRates& r) {
    policy_update(m, tr, r, PolicyStep::logit);
  };
  UpdateFn policy_parameter = [](OptionModel& m, const Transition& tr, const LearningRates& r) {
    policy_update(m, tr, r, PolicyStep::parameter);
  };
  UpdateFn termination_oc = [](OptionModel& m, const Transition& tr, const LearningRates& r) {
    termination_update_oc(m, tr, r);
  };
  UpdateFn termination_tdeoc = [](OptionModel& m, const Transition& tr, const LearningRates& r) {
    termination_update_tdeoc(m, tr, r);
  };
};

/// Random model with parameters and values drawn from N(0, 1).
OptionModel random_model(int n_options, int n_states, int n_actions, double temperature, Rng& rng);

// Individual oracle checks. `trials` randomized instances each.
/// Checks both policy-step conventions.
PropertyResult check_policy_gradient(const UpdateHooks& hooks, int trials, Rng& rng);
PropertyResult check_termination_gradient_oc(const UpdateHooks& hooks, int trials, Rng& rng);
PropertyResult check_termination_gradient_tdeoc(const UpdateHooks& hooks, int trials, Rng& rng);
PropertyResult check_gibbs_inequality(int trials, Rng& rng);
PropertyResult check_entropy_bounds(int trials, Rng& rng);
PropertyResult check_standardization(int trials, Rng& rng);
PropertyResult check_q_u_fixed_point(int trials, Rng& rng);
PropertyResult check_tau_zero_identity(int trials, Rng& rng);
PropertyResult check_variant_reduction(std::uint64_t seed);

/// Every oracle property, in a fixed order.
std::vector<PropertyResult> run_verify_suite(const UpdateHooks& hooks = {}, std::uint64_t seed = 20210101);

}  // namespace optdiverse
