#pragma once
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mapd/task.hpp"
#include "mapd/world.hpp"

namespace mapd {

// Timed path: occupies nodes[i] at start_time + i, then parks forever at
// nodes.back(). Consecutive nodes are identical or adjacent.
struct TimedPath {
  int start_time = 0;
  std::vector<NodeId> nodes;

  int end_time() const
  {
    return start_time + static_cast<int>(nodes.size()) - 1;
  }
  // node at time t; the final node after the path ends
  NodeId at(int t) const
  {
    if (t <= start_time) return nodes.front();
    const int i = t - start_time;
    return i >= static_cast<int>(nodes.size()) ? nodes.back()
                                               : nodes[static_cast<size_t>(i)];
  }
};

// Shared record of all committed paths and claimed task endpoints.
struct Token {
  std::vector<TimedPath> paths;   // indexed by agent id
  std::vector<int> path_task;     // task claimed by the path, -1 if none
};

// Vertex/edge reservations derived from every path except `skip_agent`.
// Paths are treated as parked at their final node after they end.
class ReservationTable
{
public:
  ReservationTable(const Token& token, int skip_agent);

  bool vertex_blocked(NodeId v, int t) const;
  bool edge_blocked(NodeId from, NodeId to, int t) const;  // move at t -> t+1
  // latest time another path uses v, or INT_MAX if one parks there
  int last_use(NodeId v) const;

private:
  struct NodeRes {
    std::vector<int> times;  // sorted
    int park_from = -1;      // parked from this time on, -1 if never
  };
  std::unordered_map<NodeId, NodeRes> vertices_;
  std::unordered_map<std::uint64_t, char> edges_;  // packed (t, from, to)
  static std::uint64_t edge_key(NodeId from, NodeId to, int t);
};

// Minimal-arrival-time path from (start, t0) to goal avoiding the table,
// with waiting allowed; the agent must be able to park at the goal forever.
// Returns nullopt when no such path exists within the 4*|V| horizon.
std::optional<TimedPath> space_time_astar(const Environment& env,
                                          NodeId start, int t0, NodeId goal,
                                          const ReservationTable& table,
                                          DistanceCache& fields);

// Nearest eligible pending task (by pickup distance, ties to the lowest task
// id): its pickup and delivery must not be endpoints of any other agent's
// path nor endpoints of a task someone else is executing.
std::optional<int> select_task_tp(int agent, NodeId agent_pos,
                                  const std::vector<Task>& tasks,
                                  const Token& token, DistanceCache& fields);

}  // namespace mapd
