#pragma once
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mapd/decomposition.hpp"
#include "mapd/engine.hpp"
#include "mapd/rng.hpp"
#include "mapd/task.hpp"
#include "mapd/world.hpp"

namespace mapd {

enum class RunPolicy { NaivePIBT, PIBTTP, PIBTTP_TA, TP };

const char* run_policy_name(RunPolicy p);
std::optional<RunPolicy> parse_run_policy(const std::string& s);

// Uniform (pickup, delivery) pairs; pairs sharing a tree or a node are
// rejected and redrawn.
std::vector<Task> generate_taskset(const Environment& env,
                                   const Decomposition& decomp, int count,
                                   SeedStream& stream);

struct Violation {
  enum Kind { Vertex, Swap, Jump } kind;
  int agent_a = -1, agent_b = -1;
  NodeId node = -1;
};

// Vertex conflicts, swap conflicts, and jumps between consecutive position
// maps. Pure rotations pass.
std::vector<Violation> validate_transition(const std::vector<NodeId>& cur,
                                           const std::vector<NodeId>& next,
                                           const Environment& env);

// Uniformly random eligible pending task for a PIBT-family agent; tasks
// whose pickup shares the agent's current tree are excluded. Claims the
// task. Returns nullopt when nothing is eligible.
std::optional<int> assign_task_pibt(const AgentState& agent,
                                    std::vector<Task>& tasks,
                                    const Decomposition& decomp,
                                    SeedStream& stream);

struct TraceAgentRecord {
  int id;
  NodeId position;
  double priority;
  bool tas;
  int task;       // -1 when none
  NodeId dest;    // destination of record (parking when idle)
};

struct TraceEvent {
  std::string type;  // pickup | delivery | reserve | revert
  int agent = -1;
  int task = -1;
  NodeId node = -1;
};

struct TraceRecord {
  int t = 0;
  std::vector<TraceAgentRecord> agents;
  std::vector<TraceEvent> events;
};

struct Metrics {
  int makespan = 0;
  int violations = 0;
  int timesteps = 0;
  std::uint64_t seed = 0;
  bool completed = false;
  std::string abort_reason;           // empty on success
  std::vector<int> task_done_times;   // indexed by task id, -1 if not done
};

struct RunResult {
  Metrics metrics;
  std::vector<TraceRecord> trace;
  std::vector<Task> tasks;  // final task states
};

struct RunOptions {
  bool keep_trace = false;
  int cap_override = -1;  // timestep cap; default 100 * |T| * diameter bound
};

// Runs one MAPD instance: places the first n parking nodes' agents in id
// order and loops assign / plan / validate / apply until every task is done.
RunResult run_instance(const Environment& env, const Decomposition& decomp,
                       int n, std::vector<Task> taskset, RunPolicy policy,
                       std::uint64_t seed, const RunOptions& opts = {});

// JSON-lines trace (one object per timestep) and the metrics summary.
std::string trace_to_jsonl(const RunResult& result, const Environment& env);
std::string metrics_to_json(const Metrics& m);

}  // namespace mapd
