#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "mapd/sim.hpp"

namespace mapd {

struct BenchConfig {
  std::vector<std::string> maps;       // map file paths
  std::vector<RunPolicy> policies;
  std::vector<int> agent_counts;
  int tasks = 50;
  std::vector<std::uint64_t> seeds;
  int workers = 0;  // 0 = hardware concurrency
};

// JSON config:
//   maps      (array of strings, required)
//   policies  (array of policy names, required)
//   agents    (array of ints, required)
//   tasks     (int, default 50)
//   seeds     (array of ints) or seed_count (int, seeds 1..N; default 10)
//   workers   (int, default 0)
// Throws std::runtime_error on malformed input.
BenchConfig parse_bench_config(const std::string& json_text);
BenchConfig load_bench_config(const std::string& path);

struct BenchRow {
  std::string map;  // basename without extension
  RunPolicy policy;
  int agents = 0;
  int tasks = 0;
  std::uint64_t seed = 0;
  int makespan = 0;
  int timesteps = 0;
  int violations = 0;
  bool completed = false;
};

// Runs every (map, policy, agents, seed) combination. Results are ordered by
// enumeration index, independent of the worker count.
std::vector<BenchRow> run_benchmark(const BenchConfig& cfg);

struct BenchAggregate {
  std::string map;
  RunPolicy policy;
  int agents = 0;
  int runs = 0;
  int completed = 0;
  double makespan_mean = 0.0;
  double makespan_stddev = 0.0;
};

std::vector<BenchAggregate> aggregate_rows(const std::vector<BenchRow>& rows);

std::string rows_to_csv(const std::vector<BenchRow>& rows);
std::string aggregates_to_csv(const std::vector<BenchAggregate>& aggs);

// Writes results.csv and aggregate.csv into out_dir (created if missing).
void write_benchmark(const BenchConfig& cfg, const std::string& out_dir);

// Human-readable structure report used by map validation.
std::string map_report(const Environment& env, const Decomposition& decomp);

}  // namespace mapd
