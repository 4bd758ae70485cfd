#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "optdiverse/config.hpp"
#include "optdiverse/grid.hpp"
#include "optdiverse/option_model.hpp"

namespace optdiverse {

/// Everything recorded for one seeded run.
struct RunLog {
  int run_index = 0;
  std::uint64_t seed = 0;
  int n_options = 0;
  std::vector<int> steps_per_episode;
  /// [episode * n_options + option] steps during which the option was active.
  std::vector<int> option_activity;
  /// [episode * n_options + option] terminations of the option.
  std::vector<int> termination_events;
  /// Goal arrivals per goal of the initial grid, before the transfer episode.
  std::vector<int> pre_transfer_goal_arrivals;
  std::vector<StateId> post_transfer_goals;
  OptionModel pre_transfer_model;
  OptionModel final_model;

  int episodes() const { return static_cast<int>(steps_per_episode.size()); }
  int activity(int episode, int option) const {
    return option_activity[static_cast<std::size_t>(episode) * n_options + option];
  }
  int terminations(int episode, int option) const {
    return termination_events[static_cast<std::size_t>(episode) * n_options + option];
  }
  bool operator==(const RunLog&) const = default;
};

struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> std;
  int n_runs = 0;
};

/// Per-option height x width map of termination probabilities; walls hold -1.
struct TerminationHeatmap {
  int height = 0;
  int width = 0;
  std::vector<std::vector<double>> beta;  // [option][row * width + col]

  double at(int option, int row, int col) const {
    return beta[option][static_cast<std::size_t>(row) * width + col];
  }
};

Grid initial_grid(Environment env);
std::uint64_t run_seed(const ExperimentConfig& cfg, int run_index);

/// One run: fresh model, tracker and grid; the environment changes at
/// `transfer_episode` while learning continues from the current tables.
RunLog run_single(const ExperimentConfig& cfg, int run_index);

/// All runs, executed concurrently on up to `threads` OpenMP threads
/// (0 = sequential). Logs are ordered by run index.
std::vector<RunLog> run_experiment(const ExperimentConfig& cfg, int threads);
/// OpenMP's default team size.
int available_threads();
/// Sequential reference used to check the parallel path.
std::vector<RunLog> run_experiment_serial(const ExperimentConfig& cfg);

/// Drops the goal with the most arrivals; ties drop the lower index.
Grid remove_goal(const Grid& grid, const std::vector<int>& visit_counts);

AggregateCurve aggregate(const std::vector<RunLog>& logs);

TerminationHeatmap termination_heatmap(const OptionModel& m, const Grid& grid);

/// Mean of curve.mean over [transfer_episode, transfer_episode + window).
double recovery_metric(const AggregateCurve& curve, int transfer_episode, int window);

// CSV emitters.
void write_learning_curve_csv(std::ostream& os, const std::vector<RunLog>& logs, Algorithm variant);
void write_aggregate_csv(std::ostream& os, const AggregateCurve& curve, Algorithm variant);
void write_activity_csv(std::ostream& os, const std::vector<RunLog>& logs);
void write_heatmap_csv(std::ostream& os, const TerminationHeatmap& heatmap, int option);

/// Fixed-precision decimal used by every CSV (12 significant digits).
std::string format_number(double v);

/// Plain-text dump of all four tables with a dimension/temperature header.
void write_model_snapshot(std::ostream& os, const OptionModel& m);
OptionModel read_model_snapshot(std::istream& is);

}  // namespace optdiverse
