#include "optdiverse/harness.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace optdiverse {

Grid initial_grid(Environment env) {
  return env == Environment::four_rooms ? build_four_rooms() : build_tmaze_grid();
}

std::uint64_t run_seed(const ExperimentConfig& cfg, int run_index) {
  return cfg.base_seed + static_cast<std::uint64_t>(run_index);
}

RunLog run_single(const ExperimentConfig& cfg, int run_index) {
  const Grid start_grid = initial_grid(cfg.environment);
  Grid grid = start_grid;
  RunLog log;
  log.run_index = run_index;
  log.seed = run_seed(cfg, run_index);
  log.n_options = cfg.n_options;
  log.steps_per_episode.reserve(static_cast<std::size_t>(cfg.episodes_total));
  log.option_activity.assign(static_cast<std::size_t>(cfg.episodes_total) * cfg.n_options, 0);
  log.termination_events.assign(log.option_activity.size(), 0);
  log.pre_transfer_goal_arrivals.assign(start_grid.goals().size(), 0);

  OptionModel model = OptionModel::init(cfg.n_options, grid.num_states(), kNumActions, cfg.temperature);
  DiversityTracker tracker(cfg.tracker_mode, cfg.buffer_capacity);
  RunRngs rngs = RunRngs::from_seed(log.seed);
  const EpisodeParams params = cfg.episode_params();

  for (int ep = 0; ep < cfg.episodes_total; ++ep) {
    if (ep == cfg.transfer_episode) {
      log.pre_transfer_model = model;
      if (cfg.environment == Environment::four_rooms)
        grid = relocate_goal(grid, in_lower_right_room, rngs.env);
      else
        grid = remove_goal(grid, log.pre_transfer_goal_arrivals);
      log.post_transfer_goals.assign(grid.goals().begin(), grid.goals().end());
    }
    const EpisodeLog ep_log = run_episode(model, grid, cfg.variant, cfg.rates, params, tracker, rngs);
    log.steps_per_episode.push_back(ep_log.steps);
    const auto row = static_cast<std::size_t>(ep) * cfg.n_options;
    for (const auto& rec : ep_log.records) {
      ++log.option_activity[row + rec.option];
      if (rec.option_terminated) ++log.termination_events[row + rec.option];
    }
    if (ep < cfg.transfer_episode && ep_log.reached_goal) {
      const auto goals = start_grid.goals();
      for (std::size_t g = 0; g < goals.size(); ++g)
        if (goals[g] == ep_log.final_state) ++log.pre_transfer_goal_arrivals[g];
    }
  }
  log.final_model = std::move(model);
  return log;
}

std::vector<RunLog> run_experiment_serial(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<RunLog> logs;
  logs.reserve(static_cast<std::size_t>(cfg.n_runs));
  for (int r = 0; r < cfg.n_runs; ++r) logs.push_back(run_single(cfg, r));
  return logs;
}

int available_threads() { return omp_get_max_threads(); }

std::vector<RunLog> run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  if (threads <= 0) return run_experiment_serial(cfg);
  std::vector<RunLog> logs(static_cast<std::size_t>(cfg.n_runs));
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int r = 0; r < cfg.n_runs; ++r) {
    try {
      logs[static_cast<std::size_t>(r)] = run_single(cfg, r);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return logs;
}

Grid remove_goal(const Grid& grid, const std::vector<int>& visit_counts) {
  const auto goals = grid.goals();
  if (goals.size() < 2) throw ConfigError("remove_goal: grid needs at least two goals");
  if (visit_counts.size() != goals.size()) throw ConfigError("remove_goal: one visit count per goal required");
  std::size_t drop = 0;
  for (std::size_t g = 1; g < goals.size(); ++g)
    if (visit_counts[g] > visit_counts[drop]) drop = g;
  std::vector<StateId> kept;
  for (std::size_t g = 0; g < goals.size(); ++g)
    if (g != drop) kept.push_back(goals[g]);
  return grid.with_goals(std::move(kept));
}

AggregateCurve aggregate(const std::vector<RunLog>& logs) {
  if (logs.empty()) throw std::invalid_argument("aggregate: no run logs");
  const int episodes = logs.front().episodes();
  for (const auto& l : logs)
    if (l.episodes() != episodes) throw std::invalid_argument("aggregate: episode counts differ across runs");
  AggregateCurve c;
  c.n_runs = static_cast<int>(logs.size());
  c.mean.assign(static_cast<std::size_t>(episodes), 0.0);
  c.std.assign(c.mean.size(), 0.0);
  const double n = static_cast<double>(logs.size());
  for (int e = 0; e < episodes; ++e) {
    double sum = 0.0;
    for (const auto& l : logs) sum += l.steps_per_episode[e];
    const double mu = sum / n;
    double var = 0.0;
    for (const auto& l : logs) var += (l.steps_per_episode[e] - mu) * (l.steps_per_episode[e] - mu);
    c.mean[e] = mu;
    c.std[e] = std::sqrt(var / n);
  }
  return c;
}

TerminationHeatmap termination_heatmap(const OptionModel& m, const Grid& grid) {
  TerminationHeatmap h;
  h.height = grid.height();
  h.width = grid.width();
  h.beta.assign(static_cast<std::size_t>(m.n_options()),
                std::vector<double>(static_cast<std::size_t>(h.height * h.width), -1.0));
  for (int o = 0; o < m.n_options(); ++o)
    for (int s = 0; s < grid.num_states(); ++s) {
      const Cell c = grid.cell(StateId{s});
      h.beta[o][static_cast<std::size_t>(c.row) * h.width + c.col] = termination_prob(m, o, StateId{s});
    }
  return h;
}

double recovery_metric(const AggregateCurve& curve, int transfer_episode, int window) {
  if (window < 1 || transfer_episode < 0 ||
      static_cast<std::size_t>(transfer_episode + window) > curve.mean.size())
    throw std::invalid_argument("recovery_metric: window extends past the curve");
  double sum = 0.0;
  for (int e = transfer_episode; e < transfer_episode + window; ++e) sum += curve.mean[e];
  return sum / window;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_learning_curve_csv(std::ostream& os, const std::vector<RunLog>& logs, Algorithm variant) {
  os << "episode,run,steps,variant,seed\n";
  for (const auto& l : logs)
    for (int e = 0; e < l.episodes(); ++e)
      os << e << ',' << l.run_index << ',' << l.steps_per_episode[e] << ',' << to_string(variant) << ','
         << l.seed << '\n';
}

void write_aggregate_csv(std::ostream& os, const AggregateCurve& curve, Algorithm variant) {
  os << "episode,mean_steps,std_steps,n_runs,variant\n";
  for (std::size_t e = 0; e < curve.mean.size(); ++e)
    os << e << ',' << format_number(curve.mean[e]) << ',' << format_number(curve.std[e]) << ',' << curve.n_runs
       << ',' << to_string(variant) << '\n';
}

void write_activity_csv(std::ostream& os, const std::vector<RunLog>& logs) {
  os << "episode,run,option,steps_active,terminations\n";
  for (const auto& l : logs)
    for (int e = 0; e < l.episodes(); ++e)
      for (int o = 0; o < l.n_options; ++o)
        os << e << ',' << l.run_index << ',' << o << ',' << l.activity(e, o) << ',' << l.terminations(e, o) << '\n';
}

void write_heatmap_csv(std::ostream& os, const TerminationHeatmap& h, int option) {
  os << "row,col,beta\n";
  for (int r = 0; r < h.height; ++r)
    for (int c = 0; c < h.width; ++c) {
      const double b = h.at(option, r, c);
      if (b < 0.0) continue;
      os << r << ',' << c << ',' << format_number(b) << '\n';
    }
}

namespace {

constexpr const char* kSnapshotMagic = "optdiverse-model";

void write_tensor(std::ostream& os, const char* name, std::span<const double> values) {
  os << name << ' ' << values.size() << '\n';
  char buf[64];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    os << buf;
  }
}

void read_tensor(std::istream& is, const char* name, std::span<double> out) {
  std::string tag;
  std::size_t count = 0;
  if (!(is >> tag >> count) || tag != name || count != out.size())
    throw std::runtime_error(std::string("model snapshot: bad header for ") + name);
  for (auto& v : out) {
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error(std::string("model snapshot: truncated ") + name);
    v = std::stod(tok);
  }
}

}  // namespace

void write_model_snapshot(std::ostream& os, const OptionModel& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", m.temperature());
  os << kSnapshotMagic << " 1\n"
     << "n_options " << m.n_options() << '\n'
     << "n_states " << m.n_states() << '\n'
     << "n_actions " << m.n_actions() << '\n'
     << "temperature " << buf << '\n';
  write_tensor(os, "theta_pi", m.theta_pi_data());
  write_tensor(os, "theta_beta", m.theta_beta_data());
  write_tensor(os, "q_omega", m.q_omega_data());
  write_tensor(os, "q_u", m.q_u_data());
}

OptionModel read_model_snapshot(std::istream& is) {
  std::string magic, key, temp;
  int version = 0, n_options = 0, n_states = 0, n_actions = 0;
  if (!(is >> magic >> version) || magic != kSnapshotMagic || version != 1)
    throw std::runtime_error("model snapshot: not an optdiverse model file");
  auto read_int = [&](const char* expected, int& out) {
    if (!(is >> key >> out) || key != expected)
      throw std::runtime_error(std::string("model snapshot: expected ") + expected);
  };
  read_int("n_options", n_options);
  read_int("n_states", n_states);
  read_int("n_actions", n_actions);
  if (!(is >> key >> temp) || key != "temperature") throw std::runtime_error("model snapshot: expected temperature");
  OptionModel m = OptionModel::init(n_options, n_states, n_actions, std::stod(temp));
  read_tensor(is, "theta_pi", m.theta_pi_data());
  read_tensor(is, "theta_beta", m.theta_beta_data());
  read_tensor(is, "q_omega", m.q_omega_data());
  read_tensor(is, "q_u", m.q_u_data());
  return m;
}

}  // namespace optdiverse
