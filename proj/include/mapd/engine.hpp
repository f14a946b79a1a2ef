#pragma once
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mapd/decomposition.hpp"
#include "mapd/world.hpp"

namespace mapd {

enum class PolicyKind { NaivePIBT, PIBTTP, PIBTTP_TA };

const char* policy_name(PolicyKind p);
std::optional<PolicyKind> parse_policy(const std::string& s);

enum class Phase { ToPickup, ToDelivery, Returning, Idle };

struct AgentState {
  int id = -1;
  NodeId position = -1;
  NodeId parking = -1;
  double epsilon = 0.0;  // pairwise distinct, in (0,1)
  double priority = 0.0; // recomputed each timestep
  std::optional<NodeId> destination;
  std::optional<int> task;
  Phase phase = Phase::Idle;
  bool tas = false;
  std::optional<NodeId> reserved_node;  // set only while tas
  std::optional<NodeId> tas_node;       // node recorded in V_TA while tas

  // destination of record for planning; idle agents aim at their parking node
  NodeId goal() const { return destination.value_or(parking); }
};

// Per-timestep planning state. R and V_TA are rebuilt from the persistent
// TAS flags at step start; O and `next` grow as agents decide.
struct StepContext {
  int time = 0;
  std::vector<char> undecided;               // U, indexed by agent id
  std::unordered_set<NodeId> claimed;        // O
  std::unordered_map<NodeId, int> reserved;  // R, multiset counts
  std::unordered_set<NodeId> tas_nodes;      // V_TA
  std::unordered_map<NodeId, int> occupant;  // current position -> agent
  std::vector<NodeId> next;                  // -1 until decided

  int undecided_count() const;
};

StepContext make_step_context(const std::vector<AgentState>& agents, int time);

// Reserve/revert notifications emitted by the TA policy for the trace.
struct EngineEvent {
  enum Kind { Reserve, Revert } kind;
  int agent;
  NodeId node;
};

// Base for agents without a task; below any working agent's priority.
constexpr double kIdlePriority = -1e6;

// Step-start priorities:
//   normal     p = -f_i(v) + eps     (main area, or tree containing d_i)
//   idle       p = kIdlePriority + eps  (no task assigned)
//   temporary  p = 1 + eps           (in a tree whose proper nodes miss d_i)
//   TAS        p = eps               (PIBTTP-TA only)
// NaivePIBT uses the normal/idle formulas everywhere.
void compute_priorities(std::vector<AgentState>& agents,
                        const Decomposition& decomp, DistanceCache& fields,
                        PolicyKind policy);

// Movement options of the agent inside tree k: the unique path toward the
// target plus the fallback chain to the connecting node. Side branches are
// excluded.
std::vector<char> k_path_member(const Environment& env,
                                const Decomposition& decomp, int tree_id,
                                NodeId from, NodeId dest);

// Candidate next nodes for a_i, best first. `pusher` is the agent whose
// priority was inherited, or nullptr at the top of a PI chain.
std::vector<NodeId> candidate_set(const AgentState& ai,
                                  const AgentState* pusher,
                                  const StepContext& ctx,
                                  const Environment& env,
                                  const Decomposition& decomp,
                                  DistanceCache& fields, PolicyKind policy);

// Priority inheritance with backtracking for one agent (and the chain it
// pushes). Returns true on Valid. Realized with an explicit frame stack.
bool ex_pibt(int agent, std::optional<int> pusher,
             std::vector<AgentState>& agents, StepContext& ctx,
             const Environment& env, const Decomposition& decomp,
             DistanceCache& fields, PolicyKind policy,
             std::vector<EngineEvent>* events = nullptr);

// One full timestep: highest-priority undecided agent first until U is
// empty. Returns the complete conflict-free next-position map.
std::vector<NodeId> plan_step(std::vector<AgentState>& agents,
                              StepContext& ctx, const Environment& env,
                              const Decomposition& decomp,
                              DistanceCache& fields, PolicyKind policy,
                              std::vector<EngineEvent>* events = nullptr);

}  // namespace mapd
