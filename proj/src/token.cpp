#include "mapd/token.hpp"

#include <algorithm>
#include <climits>
#include <queue>
#include <unordered_set>

namespace mapd {

std::uint64_t ReservationTable::edge_key(NodeId from, NodeId to, int t)
{
  return (static_cast<std::uint64_t>(t) << 40) |
         (static_cast<std::uint64_t>(from) << 20) |
         static_cast<std::uint64_t>(to);
}

ReservationTable::ReservationTable(const Token& token, int skip_agent)
{
  for (int a = 0; a < static_cast<int>(token.paths.size()); ++a) {
    if (a == skip_agent) continue;
    const TimedPath& p = token.paths[a];
    if (p.nodes.empty()) continue;
    for (size_t i = 0; i < p.nodes.size(); ++i) {
      const int t = p.start_time + static_cast<int>(i);
      vertices_[p.nodes[i]].times.push_back(t);
      if (i + 1 < p.nodes.size() && p.nodes[i] != p.nodes[i + 1])
        edges_[edge_key(p.nodes[i], p.nodes[i + 1], t)] = 1;
    }
    NodeRes& final_res = vertices_[p.nodes.back()];
    if (final_res.park_from < 0 || p.end_time() < final_res.park_from)
      final_res.park_from = p.end_time();
  }
  for (auto& [node, res] : vertices_) std::sort(res.times.begin(), res.times.end());
}

bool ReservationTable::vertex_blocked(NodeId v, int t) const
{
  const auto it = vertices_.find(v);
  if (it == vertices_.end()) return false;
  const NodeRes& res = it->second;
  if (res.park_from >= 0 && t >= res.park_from) return true;
  return std::binary_search(res.times.begin(), res.times.end(), t);
}

bool ReservationTable::edge_blocked(NodeId from, NodeId to, int t) const
{
  return edges_.count(edge_key(to, from, t)) > 0;  // opposing traversal
}

int ReservationTable::last_use(NodeId v) const
{
  const auto it = vertices_.find(v);
  if (it == vertices_.end()) return -1;
  if (it->second.park_from >= 0) return INT_MAX;
  return it->second.times.empty() ? -1 : it->second.times.back();
}

std::optional<TimedPath> space_time_astar(const Environment& env,
                                          NodeId start, int t0, NodeId goal,
                                          const ReservationTable& table,
                                          DistanceCache& fields)
{
  const int horizon = 4 * env.node_count();
  const auto& h = fields.to(goal);
  const int goal_free_after = table.last_use(goal);
  if (goal_free_after == INT_MAX) return std::nullopt;  // someone parks there

  struct State {
    NodeId node;
    int t;
    int parent;  // index into states
  };
  struct QueueEntry {
    int f, t;
    NodeId node;
    int idx;
    bool operator>(const QueueEntry& o) const
    {
      if (f != o.f) return f > o.f;
      if (t != o.t) return t < o.t;  // deeper states first on f-ties
      return node > o.node;
    }
  };

  std::vector<State> states;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>
      open;
  std::unordered_set<std::uint64_t> visited;
  auto key = [](NodeId v, int t) {
    return (static_cast<std::uint64_t>(t) << 24) |
           static_cast<std::uint64_t>(v);
  };

  states.push_back({start, t0, -1});
  visited.insert(key(start, t0));
  open.push({t0 + h.dist[start], t0, start, 0});

  while (!open.empty()) {
    const QueueEntry e = open.top();
    open.pop();
    const State s = states[e.idx];
    if (s.node == goal && s.t > goal_free_after) {
      std::vector<NodeId> rev;
      for (int i = e.idx; i >= 0; i = states[i].parent)
        rev.push_back(states[i].node);
      TimedPath p;
      p.start_time = t0;
      p.nodes.assign(rev.rbegin(), rev.rend());
      return p;
    }
    if (s.t - t0 >= horizon) continue;
    const int t2 = s.t + 1;
    auto try_move = [&](NodeId w) {
      if (table.vertex_blocked(w, t2)) return;
      if (w != s.node && table.edge_blocked(s.node, w, s.t)) return;
      if (!visited.insert(key(w, t2)).second) return;
      states.push_back({w, t2, e.idx});
      open.push({t2 + h.dist[w], t2, w,
                 static_cast<int>(states.size()) - 1});
    };
    try_move(s.node);
    for (NodeId w : env.adj[s.node]) try_move(w);
  }
  return std::nullopt;
}

std::optional<int> select_task_tp(int agent, NodeId agent_pos,
                                  const std::vector<Task>& tasks,
                                  const Token& token, DistanceCache& fields)
{
  std::unordered_set<NodeId> blocked;
  for (int a = 0; a < static_cast<int>(token.paths.size()); ++a) {
    if (a == agent || token.paths[a].nodes.empty()) continue;
    blocked.insert(token.paths[a].nodes.back());
  }
  for (const Task& task : tasks) {
    if ((task.status == TaskStatus::Claimed ||
         task.status == TaskStatus::PickedUp) &&
        task.agent != agent) {
      blocked.insert(task.pickup);
      blocked.insert(task.delivery);
    }
  }

  std::optional<int> best;
  int best_dist = INT_MAX;
  for (const Task& task : tasks) {
    if (task.status != TaskStatus::Pending) continue;
    if (blocked.count(task.pickup) || blocked.count(task.delivery)) continue;
    const int d = fields.dist(agent_pos, task.pickup);
    if (d < best_dist) {
      best_dist = d;
      best = task.id;
    }
  }
  return best;
}

}  // namespace mapd
