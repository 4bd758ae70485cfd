#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "optdiverse/config.hpp"
#include "optdiverse/harness.hpp"
#include "optdiverse/verify.hpp"

namespace fs = std::filesystem;
using namespace optdiverse;

namespace {

struct Invocation {
  std::string config_path;
  std::string output_dir = ".";
  std::string snapshot_path;
  std::vector<std::string> overrides;
  int runs = -1;
  long long seed = -1;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig resolve(const Invocation& inv) {
  std::vector<std::string> overrides = inv.overrides;
  if (inv.runs >= 0) overrides.push_back("num_runs=" + std::to_string(inv.runs));
  if (inv.seed >= 0) overrides.push_back("base_seed=" + std::to_string(inv.seed));
  const std::string text = inv.config_path.empty() ? std::string() : read_file(inv.config_path);
  return parse_config(text, overrides);
}

int thread_count() {
  const char* env = std::getenv("OPTDIVERSE_THREADS");
  if (env == nullptr || *env == '\0') return available_threads();
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 0) throw std::runtime_error(std::string("OPTDIVERSE_THREADS: not a count: ") + env);
  return static_cast<int>(n);
}

// Files are staged next to their destination and renamed once every
// output has been produced.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  std::ostream& open(const std::string& name) {
    staged_.push_back(name);
    auto& f = streams_.emplace_back(dir_ / (name + ".part"), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    return f;
  }

  void commit() {
    for (auto& f : streams_) {
      f.close();
      if (!f) throw std::runtime_error("write failed in " + dir_.string());
    }
    for (const auto& name : staged_) fs::rename(dir_ / (name + ".part"), dir_ / name);
    staged_.clear();
  }

  ~OutputSet() {
    std::error_code ec;
    for (const auto& name : staged_) fs::remove(dir_ / (name + ".part"), ec);
  }

 private:
  fs::path dir_;
  std::vector<std::string> staged_;
  std::vector<std::ofstream> streams_;
};

void write_heatmaps(OutputSet& out, const OptionModel& m, const Grid& grid) {
  const TerminationHeatmap h = termination_heatmap(m, grid);
  for (int o = 0; o < m.n_options(); ++o)
    write_heatmap_csv(out.open("heatmap_option" + std::to_string(o) + ".csv"), h, o);
}

int cmd_run(const Invocation& inv) {
  const ExperimentConfig cfg = resolve(inv);
  const int threads = thread_count();
  const std::vector<RunLog> logs = run_experiment(cfg, threads);

  fs::create_directories(inv.output_dir);
  OutputSet out(inv.output_dir);
  write_learning_curve_csv(out.open("learning_curve.csv"), logs, cfg.variant.tag);
  write_aggregate_csv(out.open("aggregate.csv"), aggregate(logs), cfg.variant.tag);
  write_activity_csv(out.open("activity.csv"), logs);
  write_heatmaps(out, logs.front().pre_transfer_model, initial_grid(cfg.environment));
  write_model_snapshot(out.open("model_run0.txt"), logs.front().pre_transfer_model);

  auto& manifest = out.open("manifest.txt");
  manifest << "# optdiverse " << OPTDIVERSE_VERSION << "\n";
  for (const auto& log : logs) manifest << "# run " << log.run_index << " seed " << log.seed << "\n";
  manifest << format_config(cfg);
  out.commit();

  const AggregateCurve curve = aggregate(logs);
  const int window = std::min(50, cfg.episodes_total - cfg.transfer_episode);
  std::printf("%s: %d runs, %d episodes, post-transfer mean over %d episodes %.2f\n",
              std::string(to_string(cfg.variant.tag)).c_str(), cfg.n_runs, cfg.episodes_total, window,
              recovery_metric(curve, cfg.transfer_episode, window));
  return 0;
}

int cmd_heatmap(const Invocation& inv) {
  ExperimentConfig cfg = resolve(inv);
  const Grid grid = initial_grid(cfg.environment);
  OptionModel model;
  if (!inv.snapshot_path.empty()) {
    std::ifstream in(inv.snapshot_path);
    if (!in) throw std::runtime_error("cannot open snapshot '" + inv.snapshot_path + "'");
    model = read_model_snapshot(in);
    if (model.n_states() != grid.num_states())
      throw std::runtime_error("snapshot state count does not match the " +
                               std::string(to_string(cfg.environment)) + " grid");
  } else {
    cfg.n_runs = 1;
    cfg.episodes_total = cfg.transfer_episode + 1;
    model = run_single(cfg, 0).pre_transfer_model;
  }
  fs::create_directories(inv.output_dir);
  OutputSet out(inv.output_dir);
  write_heatmaps(out, model, grid);
  out.commit();
  return 0;
}

int cmd_verify() {
  const auto results = run_verify_suite();
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-52s %s  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

void add_experiment_flags(CLI::App* sub, Invocation& inv) {
  sub->add_option("--config", inv.config_path, "Config file (key = value lines)")->check(CLI::ExistingFile);
  sub->add_option("--set", inv.overrides, "Override one key, e.g. --set num_options=2")->allow_extra_args(false);
  sub->add_option("--runs", inv.runs, "Number of seeded runs")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", inv.seed, "Base seed; run k uses seed + k")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Option-critic experiments on tabular gridworlds"};
  app.set_version_flag("--version", std::string(OPTDIVERSE_VERSION));
  app.require_subcommand(1);

  Invocation inv;
  auto* run = app.add_subcommand("run", "Run an experiment and write CSVs plus a manifest");
  add_experiment_flags(run, inv);
  run->add_option("--out", inv.output_dir, "Output directory");

  auto* heatmap = app.add_subcommand("heatmap", "Write per-option termination heatmaps");
  add_experiment_flags(heatmap, inv);
  heatmap->add_option("--out", inv.output_dir, "Output directory");
  heatmap->add_option("--snapshot", inv.snapshot_path, "Model snapshot instead of training run 0")
      ->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "Run the oracle property suite");

  auto* print = app.add_subcommand("print-config", "Print the resolved configuration");
  add_experiment_flags(print, inv);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(inv);
    if (heatmap->parsed()) return cmd_heatmap(inv);
    if (verify->parsed()) return cmd_verify();
    if (print->parsed()) {
      std::cout << format_config(resolve(inv));
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
