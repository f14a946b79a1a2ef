#include "mapd/engine.hpp"

#include <algorithm>
#include <cassert>

namespace mapd {

const char* policy_name(PolicyKind p)
{
  switch (p) {
    case PolicyKind::NaivePIBT: return "pibt";
    case PolicyKind::PIBTTP: return "pibttp";
    case PolicyKind::PIBTTP_TA: return "pibttp-ta";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy(const std::string& s)
{
  if (s == "pibt") return PolicyKind::NaivePIBT;
  if (s == "pibttp") return PolicyKind::PIBTTP;
  if (s == "pibttp-ta") return PolicyKind::PIBTTP_TA;
  return std::nullopt;
}

int StepContext::undecided_count() const
{
  int c = 0;
  for (char u : undecided) c += u;
  return c;
}

StepContext make_step_context(const std::vector<AgentState>& agents, int time)
{
  StepContext ctx;
  ctx.time = time;
  ctx.undecided.assign(agents.size(), 1);
  ctx.next.assign(agents.size(), -1);
  for (const auto& a : agents) {
    ctx.occupant[a.position] = a.id;
    if (a.tas) {
      ctx.reserved[*a.reserved_node] += 1;
      ctx.tas_nodes.insert(*a.tas_node);
    }
  }
  return ctx;
}

void compute_priorities(std::vector<AgentState>& agents,
                        const Decomposition& decomp, DistanceCache& fields,
                        PolicyKind policy)
{
  for (auto& a : agents) {
    const NodeId goal = a.goal();
    const int k = decomp.tree_containing(a.position);
    const int dest_k = decomp.tree_containing(goal);
    // Taskless agents rank below every working agent so they can always be
    // displaced by priority inheritance; otherwise one parked at its target
    // would plan first, commit a stay, and wall off its node for good.
    const double normal = a.task ? -fields.dist(a.position, goal) + a.epsilon
                                 : kIdlePriority + a.epsilon;
    switch (policy) {
      case PolicyKind::NaivePIBT:
        a.priority = normal;
        break;
      case PolicyKind::PIBTTP:
        a.priority = (k >= 0 && k != dest_k) ? 1.0 + a.epsilon : normal;
        break;
      case PolicyKind::PIBTTP_TA:
        if (k >= 0 && k == dest_k)
          a.priority = a.tas ? a.epsilon : normal;
        else if (k >= 0)
          a.priority = 1.0 + a.epsilon;
        else
          a.priority = normal;
        break;
    }
  }
}

std::vector<char> k_path_member(const Environment& env,
                                const Decomposition& decomp, int tree_id,
                                NodeId from, NodeId dest)
{
  std::vector<char> member(env.node_count(), 0);
  for (NodeId v : tree_shortest_path_set(decomp, tree_id, from, dest))
    member[v] = 1;
  for (NodeId v :
       tree_shortest_path_set(decomp, tree_id, from,
                              decomp.trees[tree_id].connecting))
    member[v] = 1;
  return member;
}

std::vector<NodeId> candidate_set(const AgentState& ai,
                                  const AgentState* pusher,
                                  const StepContext& ctx,
                                  const Environment& env,
                                  const Decomposition& decomp,
                                  DistanceCache& fields, PolicyKind policy)
{
  const NodeId pos = ai.position;
  const NodeId goal = ai.goal();
  const int k = decomp.tree_containing(pos);
  const int dest_k = decomp.tree_containing(goal);

  std::vector<NodeId> cand = env.adj[pos];
  cand.push_back(pos);

  std::vector<char> k_member;        // both directions; side-branch tie-break
  std::vector<char> k_forward;       // unique path toward the current target
  std::vector<char> pusher_forward;  // pusher's remaining path in this tree
  const bool ta_pushed_in_tree =
      policy == PolicyKind::PIBTTP_TA && k >= 0 && pusher != nullptr;
  if (k >= 0 && policy != PolicyKind::NaivePIBT) {
    k_member = k_path_member(env, decomp, k, pos, goal);
    if (policy == PolicyKind::PIBTTP_TA) {
      k_forward.assign(env.node_count(), 0);
      for (NodeId v : tree_shortest_path_set(decomp, k, pos, goal))
        k_forward[v] = 1;
    }
  }
  // An avoiding move must leave the pusher's way: when the pusher heads for
  // a destination in this same tree, a node on its remaining unique path
  // (its destination included) would just get pushed off again, so it is no
  // avoidance at all -- unless it is also on the pushed agent's own forward
  // path, i.e. both travel the same corridor and can advance in series.
  // Push-back toward the connecting node is unaffected; those nodes lie
  // behind the pusher.
  if (ta_pushed_in_tree && decomp.tree_containing(pusher->position) == k &&
      decomp.tree_containing(pusher->goal()) == k) {
    pusher_forward.assign(env.node_count(), 0);
    for (NodeId v :
         tree_shortest_path_set(decomp, k, pusher->position, pusher->goal()))
      pusher_forward[v] = 1;
  }

  // Agents acting at temporary priority may pass reserved nodes and displace
  // avoiding agents; everyone else must keep clear of both. The band is >= 1
  // only for agents leaving a tree and for chains pushed by one, so a whole
  // outbound push chain passes while ordinary traffic is held back.
  const bool reservation_exempt =
      ai.priority >= 1.0 || (k >= 0 && k != dest_k);
  auto reservation_blocked = [&](NodeId v) {
    if (v == pos) return false;
    if (ai.reserved_node && *ai.reserved_node == v) return false;
    auto it = ctx.reserved.find(v);
    if (it != ctx.reserved.end() && it->second > 0) return true;
    return ctx.tas_nodes.count(v) > 0;
  };

  auto excluded = [&](NodeId v) {
    if (ctx.claimed.count(v)) return true;
    if (pusher && v == pusher->position) return true;
    switch (policy) {
      case PolicyKind::NaivePIBT:
        return false;
      case PolicyKind::PIBTTP:
        if (k < 0)  // keep V_M and the destination's own tree
          return !(decomp.in_main(v) ||
                   (dest_k >= 0 && decomp.tree_containing(v) == dest_k));
        return !k_member[v];
      case PolicyKind::PIBTTP_TA:
        if (!reservation_exempt && reservation_blocked(v)) return true;
        if (k < 0)
          return !(decomp.in_main(v) ||
                   (dest_k >= 0 && decomp.tree_containing(v) == dest_k));
        if (pusher)  // pushed agents may take side branches
          return !pusher_forward.empty() && pusher_forward[v] &&
                 !k_forward[v];
        return !k_forward[v];
    }
    return false;
  };
  cand.erase(std::remove_if(cand.begin(), cand.end(), excluded), cand.end());

  const auto& field = fields.to(goal);
  std::stable_sort(cand.begin(), cand.end(), [&](NodeId a, NodeId b) {
    const int fa = field.dist[a], fb = field.dist[b];
    if (fa != fb) return fa < fb;
    if (ta_pushed_in_tree) {
      // avoidance: prefer branch entrances (off the K path) on distance ties
      const int ka = k_member[a], kb = k_member[b];
      if (ka != kb) return ka < kb;
    }
    return a < b;
  });
  return cand;
}

namespace {

void release_tas(AgentState& a, StepContext& ctx,
                 std::vector<EngineEvent>* events)
{
  if (!a.tas) return;
  auto it = ctx.reserved.find(*a.reserved_node);
  if (it != ctx.reserved.end()) {
    if (--it->second <= 0) ctx.reserved.erase(it);
  }
  ctx.tas_nodes.erase(*a.tas_node);
  if (events)
    events->push_back({EngineEvent::Revert, a.id, *a.reserved_node});
  a.tas = false;
  a.reserved_node.reset();
  a.tas_node.reset();
}

// Runs after an unoccupied-node commit under PIBTTP-TA: an agent in its
// destination's tree that commits a node off the connecting-to-destination
// path enters (or stays in) the avoiding state and keeps the next node of
// its own route reserved; any on-path commit reverts it.
void tas_transition(std::vector<AgentState>& agents, int ai, NodeId v_star,
                    StepContext& ctx, const Environment& /*env*/,
                    const Decomposition& decomp,
                    std::vector<EngineEvent>* events)
{
  AgentState& a = agents[ai];
  const int k = decomp.tree_containing(a.position);
  const int dest_k = decomp.tree_containing(a.goal());
  if (k >= 0 && k == dest_k && decomp.tree_containing(v_star) == k) {
    bool on_spine = false;
    for (NodeId v : tree_shortest_path_set(decomp, k, a.goal(),
                                           decomp.trees[k].connecting))
      if (v == v_star) {
        on_spine = true;
        break;
      }
    if (!on_spine) {
      const auto path =
          tree_shortest_path_set(decomp, k, a.position, a.goal());
      const NodeId vo = path.size() >= 2 ? path[1] : path[0];
      if (a.tas && *a.tas_node == v_star && *a.reserved_node == vo)
        return;  // unchanged; keep the existing reservation
      release_tas(a, ctx, nullptr);
      a.tas = true;
      a.reserved_node = vo;
      a.tas_node = v_star;
      ctx.reserved[vo] += 1;
      ctx.tas_nodes.insert(v_star);
      if (events) events->push_back({EngineEvent::Reserve, ai, vo});
      return;
    }
  }
  release_tas(a, ctx, events);
}

struct Frame {
  int agent;
  std::optional<int> pusher;
  std::vector<NodeId> cand;
  size_t idx = 0;
  NodeId pending = -1;
};

}  // namespace

bool ex_pibt(int agent, std::optional<int> pusher,
             std::vector<AgentState>& agents, StepContext& ctx,
             const Environment& env, const Decomposition& decomp,
             DistanceCache& fields, PolicyKind policy,
             std::vector<EngineEvent>* events)
{
  [[maybe_unused]] const size_t depth_cap = agents.size();
  std::vector<Frame> stack;

  auto push_frame = [&](int ai, std::optional<int> aj) {
    assert(ctx.undecided[ai]);
    assert(stack.size() < depth_cap);
    ctx.undecided[ai] = 0;
    if (aj) agents[ai].priority = agents[*aj].priority;  // PI
    const AgentState* p = aj ? &agents[*aj] : nullptr;
    stack.push_back(
        {ai, aj, candidate_set(agents[ai], p, ctx, env, decomp, fields,
                               policy)});
  };

  push_frame(agent, pusher);
  bool valid = false;

  while (!stack.empty()) {
    Frame& f = stack.back();
    bool descended = false, committed = false;
    while (f.idx < f.cand.size()) {
      const NodeId v = f.cand[f.idx];
      if (ctx.claimed.count(v)) {  // C_i \ O after failed sub-chains
        ++f.idx;
        continue;
      }
      ctx.claimed.insert(v);
      const auto occ = ctx.occupant.find(v);
      if (occ != ctx.occupant.end() && ctx.undecided[occ->second]) {
        f.pending = v;
        push_frame(occ->second, f.agent);
        descended = true;
      } else {
        ctx.next[f.agent] = v;
        if (policy == PolicyKind::PIBTTP_TA)
          tas_transition(agents, f.agent, v, ctx, env, decomp, events);
        committed = true;
      }
      break;
    }
    if (descended) continue;

    if (!committed) ctx.next[f.agent] = agents[f.agent].position;
    valid = committed;
    stack.pop_back();
    while (valid && !stack.empty()) {
      ctx.next[stack.back().agent] = stack.back().pending;
      if (policy == PolicyKind::PIBTTP_TA)
        tas_transition(agents, stack.back().agent, stack.back().pending, ctx,
                       env, decomp, events);
      stack.pop_back();
    }
    if (!valid && !stack.empty()) ++stack.back().idx;
  }
  return valid;
}

std::vector<NodeId> plan_step(std::vector<AgentState>& agents,
                              StepContext& ctx, const Environment& env,
                              const Decomposition& decomp,
                              DistanceCache& fields, PolicyKind policy,
                              std::vector<EngineEvent>* events)
{
  while (true) {
    int best = -1;
    for (const auto& a : agents) {
      if (!ctx.undecided[a.id]) continue;
      if (best < 0 || a.priority > agents[best].priority) best = a.id;
    }
    if (best < 0) break;
    ex_pibt(best, std::nullopt, agents, ctx, env, decomp, fields, policy,
            events);
  }
  return ctx.next;
}

}  // namespace mapd
