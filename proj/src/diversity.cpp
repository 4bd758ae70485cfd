#include "optdiverse/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace optdiverse {

void BonusSpec::validate() const {
  if (!include_option_entropies && !include_policy_over_options_entropy && !include_divergence)
    throw ConfigError("bonus: at least one term must be enabled");
  if (pair_budget < 1) throw ConfigError("bonus: pair_budget must be >= 1");
}

Tau::Tau(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
}

ActionDistribution make_distribution(std::vector<double> probs) {
  ActionDistribution d;
  d.log_probs.resize(probs.size());
  for (std::size_t a = 0; a < probs.size(); ++a)
    d.log_probs[a] = probs[a] > 0.0 ? std::log(probs[a]) : -std::numeric_limits<double>::infinity();
  d.probs = std::move(probs);
  return d;
}

double entropy(const ActionDistribution& d) {
  double h = 0.0;
  for (std::size_t a = 0; a < d.size(); ++a)
    if (d.probs[a] > 0.0) h -= d.probs[a] * d.log_probs[a];
  return h;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double cross_entropy(const ActionDistribution& p, const ActionDistribution& q) {
  if (p.size() != q.size()) throw std::invalid_argument("cross_entropy: size mismatch");
  double h = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p.probs[a] <= 0.0) continue;
    if (!std::isfinite(q.log_probs[a]))
      throw std::domain_error("cross_entropy: q has zero mass where p is positive (action " +
                              std::to_string(a) + ")");
    h -= p.probs[a] * q.log_probs[a];
  }
  return h;
}

double option_selection_entropy(std::span<const double> q_omega_row, double epsilon) {
  const auto n = q_omega_row.size();
  const auto best =
      static_cast<std::size_t>(std::max_element(q_omega_row.begin(), q_omega_row.end()) - q_omega_row.begin());
  std::vector<double> probs(n, epsilon / static_cast<double>(n));
  probs[best] += 1.0 - epsilon;
  return entropy(probs);
}

std::vector<std::pair<int, int>> choose_pairs(int n_options, int pair_budget, Rng& rng) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n_options; ++i)
    for (int j = i + 1; j < n_options; ++j) pairs.emplace_back(i, j);
  const auto budget = static_cast<std::size_t>(pair_budget);
  if (pairs.size() <= budget) return pairs;
  // Partial Fisher-Yates: the first `budget` slots form a uniform sample.
  for (std::size_t k = 0; k < budget; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, pairs.size() - 1);
    std::swap(pairs[k], pairs[pick(rng)]);
  }
  pairs.resize(budget);
  return pairs;
}

double pseudo_reward(const PolicyView& policies, StateId s, const BonusSpec& spec, double epsilon,
                     Rng& rng) {
  const int n = policies.n_options();
  const auto na = static_cast<std::size_t>(policies.n_actions());
  std::vector<ActionDistribution> dists(static_cast<std::size_t>(n));
  for (int o = 0; o < n; ++o) {
    dists[o].probs.resize(na);
    dists[o].log_probs.resize(na);
    policies.policy_into(o, s, dists[o].probs, dists[o].log_probs);
  }

  double bonus = 0.0;
  const auto pairs = choose_pairs(n, spec.pair_budget, rng);
  if (spec.include_option_entropies || spec.include_divergence) {
    double pair_sum = 0.0;
    std::uniform_int_distribution<int> coin(0, 1);
    for (auto [i, j] : pairs) {
      const auto& p = dists[i];
      const auto& q = dists[j];
      if (spec.include_option_entropies) pair_sum += entropy(p) + entropy(q);
      if (spec.include_divergence) {
        if (spec.direction == PairDirection::symmetric)
          pair_sum += 0.5 * (cross_entropy(p, q) + cross_entropy(q, p));
        else
          pair_sum += coin(rng) == 0 ? cross_entropy(p, q) : cross_entropy(q, p);
      }
    }
    bonus += pair_sum / static_cast<double>(pairs.size());
  }
  if (spec.include_policy_over_options_entropy)
    bonus += option_selection_entropy(policies.q_omega(s), epsilon);
  return bonus;
}

double augment(double reward, double bonus, Tau tau) {
  return (1.0 - tau.value()) * reward + tau.value() * bonus;
}

DiversityTracker::DiversityTracker(TrackerMode mode, std::size_t capacity)
    : mode_(mode), capacity_(capacity) {
  if (mode == TrackerMode::buffer_standardize && capacity < 2)
    throw ConfigError("diversity tracker: buffer capacity must be >= 2");
}

void DiversityTracker::record(double bonus) {
  if (mode_ == TrackerMode::buffer_standardize) {
    buffer_.push_back(bonus);
    if (buffer_.size() > capacity_) buffer_.pop_front();
  } else {
    running_sum_ += bonus;
    ++running_count_;
  }
}

std::size_t DiversityTracker::count() const {
  return mode_ == TrackerMode::buffer_standardize ? buffer_.size() : running_count_;
}

double DiversityTracker::running_mean() const {
  if (mode_ == TrackerMode::buffer_standardize) {
    if (buffer_.empty()) return 0.0;
    return std::accumulate(buffer_.begin(), buffer_.end(), 0.0) / static_cast<double>(buffer_.size());
  }
  return running_count_ == 0 ? 0.0 : running_sum_ / static_cast<double>(running_count_);
}

double DiversityTracker::relative_diversity(double bonus) const {
  if (mode_ == TrackerMode::moving_mean_center) {
    if (running_count_ == 0) return 0.0;
    return bonus - running_mean();
  }
  if (buffer_.size() < 2) return 0.0;
  const double mu = running_mean();
  double var = 0.0;
  for (double x : buffer_) var += (x - mu) * (x - mu);
  const double sigma = std::sqrt(var / static_cast<double>(buffer_.size()));
  if (sigma < 1e-12) return 0.0;
  return (bonus - mu) / sigma;
}

}  // namespace optdiverse
