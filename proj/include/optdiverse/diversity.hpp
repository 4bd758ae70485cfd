#pragma once

#include <deque>
#include <span>
#include <vector>

#include "optdiverse/option_model.hpp"

namespace optdiverse {

/// Which direction of the (asymmetric) cross-entropy each option pair uses.
enum class PairDirection { sampled, symmetric };

/// Terms of the diversity pseudo reward. The default is the cross-option
/// divergence alone.
struct BonusSpec {
  bool include_option_entropies = false;
  bool include_policy_over_options_entropy = false;
  bool include_divergence = true;
  int pair_budget = 6;
  PairDirection direction = PairDirection::sampled;

  void validate() const;
  bool operator==(const BonusSpec&) const = default;
};

/// Trade-off between task reward and diversity bonus, in [0, 1].
class Tau {
 public:
  explicit Tau(double value);
  double value() const { return value_; }

 private:
  double value_;
};

/// Read-only access to the parts of an OptionModel the diversity signal may
/// depend on. Termination parameters are deliberately not reachable.
class PolicyView {
 public:
  explicit PolicyView(const OptionModel& m) : model_(&m) {}

  int n_options() const { return model_->n_options(); }
  int n_actions() const { return model_->n_actions(); }
  ActionDistribution policy(int o, StateId s) const { return policy_dist(*model_, o, s); }
  void policy_into(int o, StateId s, std::span<double> probs, std::span<double> log_probs) const {
    policy_dist_into(*model_, o, s, probs, log_probs);
  }
  std::span<const double> q_omega(StateId s) const { return model_->q_omega(s); }

 private:
  const OptionModel* model_;
};

/// Builds a distribution from plain probabilities; zero entries get -inf logs.
ActionDistribution make_distribution(std::vector<double> probs);

/// Shannon entropy in nats; zero-probability terms contribute 0.
double entropy(const ActionDistribution& d);
double entropy(std::span<const double> probs);

/// H(p;q) = -sum_a p[a] ln q[a]. Throws std::domain_error when q has a zero
/// entry where p is positive.
double cross_entropy(const ActionDistribution& p, const ActionDistribution& q);

/// Entropy of the epsilon-greedy option distribution implied by a q_omega row.
double option_selection_entropy(std::span<const double> q_omega_row, double epsilon);

/// Option pairs (i < j) the divergence term averages over: every pair when
/// there are at most `pair_budget` of them, otherwise `pair_budget` pairs
/// drawn uniformly without replacement.
std::vector<std::pair<int, int>> choose_pairs(int n_options, int pair_budget, Rng& rng);

/// Diversity pseudo reward at state s.
double pseudo_reward(const PolicyView& policies, StateId s, const BonusSpec& spec, double epsilon,
                     Rng& rng);

/// (1 - tau) r + tau bonus
double augment(double reward, double bonus, Tau tau);

enum class TrackerMode { buffer_standardize, moving_mean_center };

/// Running statistics of recent bonus samples used to turn a bonus into a
/// relative diversity value.
class DiversityTracker {
 public:
  explicit DiversityTracker(TrackerMode mode, std::size_t capacity = 1000);

  TrackerMode mode() const { return mode_; }
  std::size_t capacity() const { return capacity_; }

  void record(double bonus);

  /// Buffer mode: standardized against the buffer (population std), 0 when
  /// fewer than two samples or the spread is below 1e-12.
  /// Moving mode: centered on the running mean, 0 before any sample.
  double relative_diversity(double bonus) const;

  std::size_t count() const;
  double running_mean() const;
  const std::deque<double>& buffer() const { return buffer_; }

 private:
  TrackerMode mode_;
  std::size_t capacity_;
  std::deque<double> buffer_;
  double running_sum_ = 0.0;
  std::size_t running_count_ = 0;
};

}  // namespace optdiverse
