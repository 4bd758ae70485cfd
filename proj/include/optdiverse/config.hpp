#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "optdiverse/diversity.hpp"
#include "optdiverse/learner.hpp"

namespace optdiverse {

enum class Environment { four_rooms, tmaze };

/// Every tunable of an experiment. Defaults reproduce the tabular four-rooms
/// TDEOC setup; `defaults(Algorithm::oc)` swaps in the OC termination rate.
struct ExperimentConfig {
  AlgorithmVariant variant = AlgorithmVariant::tdeoc();
  LearningRates rates{0.5, 1e-2, 5e-2};
  double gamma = 0.99;
  double epsilon = 0.01;
  double temperature = 1e-3;
  double slip_probability = 1.0 / 3.0;
  int n_options = 4;
  int max_steps = 1000;
  int episodes_total = 2000;
  int transfer_episode = 1000;
  int n_runs = 50;
  std::uint64_t base_seed = 1;
  Environment environment = Environment::four_rooms;
  TrackerMode tracker_mode = TrackerMode::moving_mean_center;
  std::size_t buffer_capacity = 1000;

  static ExperimentConfig defaults(Algorithm algorithm);

  EpisodeParams episode_params() const { return {gamma, epsilon, max_steps, slip_probability}; }
  /// Throws ConfigError naming the offending key.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

std::string_view to_string(Algorithm a);
std::string_view to_string(Environment e);
std::string_view to_string(TrackerMode m);

/// Parses `key = value` lines (`#` comments, blank lines ignored), then
/// applies `overrides` (each `key=value`). Unknown keys, malformed values and
/// out-of-range values raise ConfigError with the line number.
ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});

/// Emits every key in the format parse_config reads; re-parsing the output
/// reproduces the same config.
std::string format_config(const ExperimentConfig& cfg);

/// Names accepted by parse_config.
const std::vector<std::string_view>& config_keys();

}  // namespace optdiverse
