#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "optdiverse/harness.hpp"

using namespace optdiverse;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// Usage: optdiverse_bench [key=value ...]
// Times the sequential reference against the OpenMP path on the same config
// and checks that both return identical logs.
int main(int argc, char** argv) {
  std::vector<std::string> overrides{"num_runs=16", "episodes_total=400", "transfer_episode=200"};
  overrides.insert(overrides.end(), argv + 1, argv + argc);
  const ExperimentConfig cfg = parse_config("", overrides);
  const int threads = available_threads();

  std::vector<RunLog> serial, parallel;
  const double t_serial = seconds([&] { serial = run_experiment_serial(cfg); });
  const double t_parallel = seconds([&] { parallel = run_experiment(cfg, threads); });

  long long steps = 0;
  for (const auto& log : serial)
    for (int s : log.steps_per_episode) steps += s;

  std::printf("runs %d  episodes %d  env steps %lld\n", cfg.n_runs, cfg.episodes_total, steps);
  std::printf("serial    %8.3f s  %10.0f steps/s\n", t_serial, steps / t_serial);
  std::printf("openmp(%d) %8.3f s  %10.0f steps/s  speedup %.2fx\n", threads, t_parallel, steps / t_parallel,
              t_serial / t_parallel);
  const bool same = serial == parallel;
  std::printf("results identical: %s\n", same ? "yes" : "NO");
  return same ? 0 : 1;
}
