#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mapd/bench.hpp"
#include "mapd/decomposition.hpp"
#include "mapd/sim.hpp"
#include "mapd/world.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;   // violation or deadlock
constexpr int kExitBadInput = 2;  // bad map / arguments / config

int cmd_run(const std::string& map_path, const std::string& policy_name,
            int agents, int tasks, std::uint64_t seed,
            const std::string& trace_path)
{
  const auto policy = mapd::parse_run_policy(policy_name);
  if (!policy) {
    std::cerr << "error: unknown policy '" << policy_name << "'\n";
    return kExitBadInput;
  }
  mapd::Environment env;
  mapd::Decomposition decomp;
  try {
    env = mapd::load_map(map_path);
    decomp = mapd::decompose(env);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  if (agents <= 0 || tasks < 0) {
    std::cerr << "error: agents must be positive and tasks non-negative\n";
    return kExitBadInput;
  }

  mapd::SeedStream task_stream(seed, "taskset");
  std::vector<mapd::Task> taskset;
  mapd::RunResult result;
  try {
    taskset = mapd::generate_taskset(env, decomp, tasks, task_stream);
    mapd::RunOptions opts;
    opts.keep_trace = !trace_path.empty();
    result = mapd::run_instance(env, decomp, agents, std::move(taskset),
                                *policy, seed, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }

  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) {
      std::cerr << "error: cannot write trace to " << trace_path << '\n';
      return kExitBadInput;
    }
    out << mapd::trace_to_jsonl(result, env);
  }
  std::cout << mapd::metrics_to_json(result.metrics) << '\n';

  if (result.metrics.violations > 0 || !result.metrics.completed) {
    if (!result.metrics.abort_reason.empty())
      std::cerr << "run failed: " << result.metrics.abort_reason << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir)
{
  mapd::BenchConfig cfg;
  try {
    cfg = mapd::load_bench_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  try {
    mapd::write_benchmark(cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  std::cout << "wrote " << out_dir << "/results.csv and " << out_dir
            << "/aggregate.csv\n";
  return kExitOk;
}

int cmd_validate(const std::string& map_path)
{
  try {
    const mapd::Environment env = mapd::load_map(map_path);
    const mapd::Decomposition decomp = mapd::decompose(env);
    std::cout << mapd::map_report(env, decomp);
  } catch (const std::exception& e) {
    std::cerr << "invalid map: " << e.what() << '\n';
    return kExitBadInput;
  }
  std::cout << "map is valid\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Multi-agent pickup-and-delivery simulator"};
  app.require_subcommand(1);

  std::string map_path, policy = "pibttp", trace_path;
  int agents = 10, tasks = 50;
  std::uint64_t seed = 1;
  auto* run = app.add_subcommand("run", "Run one instance");
  run->add_option("--map", map_path, "Map file")->required();
  run->add_option("--policy", policy, "pibt | pibttp | pibttp-ta | tp");
  run->add_option("--agents", agents, "Number of agents")->required();
  run->add_option("--tasks", tasks, "Number of tasks")->required();
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--trace", trace_path, "Write a JSONL trace here");

  std::string config_path, out_dir;
  auto* bench = app.add_subcommand("bench", "Run a benchmark sweep");
  bench->add_option("--config", config_path, "JSON benchmark config")
      ->required();
  bench->add_option("--out", out_dir, "Output directory")->required();

  std::string validate_path;
  auto* validate =
      app.add_subcommand("validate-map", "Check map structure");
  validate->add_option("map", validate_path, "Map file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadInput;
  }

  if (run->parsed())
    return cmd_run(map_path, policy, agents, tasks, seed, trace_path);
  if (bench->parsed()) return cmd_bench(config_path, out_dir);
  return cmd_validate(validate_path);
}
