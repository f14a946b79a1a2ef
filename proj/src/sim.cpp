#include "mapd/sim.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "mapd/token.hpp"
#include <json.hpp>

namespace mapd {

using json = nlohmann::ordered_json;

const char* run_policy_name(RunPolicy p)
{
  switch (p) {
    case RunPolicy::NaivePIBT: return "pibt";
    case RunPolicy::PIBTTP: return "pibttp";
    case RunPolicy::PIBTTP_TA: return "pibttp-ta";
    case RunPolicy::TP: return "tp";
  }
  return "?";
}

std::optional<RunPolicy> parse_run_policy(const std::string& s)
{
  if (s == "pibt") return RunPolicy::NaivePIBT;
  if (s == "pibttp") return RunPolicy::PIBTTP;
  if (s == "pibttp-ta") return RunPolicy::PIBTTP_TA;
  if (s == "tp") return RunPolicy::TP;
  return std::nullopt;
}

std::vector<Task> generate_taskset(const Environment& env,
                                   const Decomposition& decomp, int count,
                                   SeedStream& stream)
{
  if (env.pickup_nodes.empty() || env.delivery_nodes.empty())
    throw MapError("map has no pickup or no delivery nodes");
  std::vector<Task> tasks;
  tasks.reserve(count);
  while (static_cast<int>(tasks.size()) < count) {
    const NodeId s =
        env.pickup_nodes[stream.next_below(env.pickup_nodes.size())];
    const NodeId g =
        env.delivery_nodes[stream.next_below(env.delivery_nodes.size())];
    if (s == g) continue;
    const int ks = decomp.tree_containing(s);
    if (ks >= 0 && ks == decomp.tree_containing(g)) continue;  // A2
    tasks.push_back({static_cast<int>(tasks.size()), s, g});
  }
  return tasks;
}

std::vector<Violation> validate_transition(const std::vector<NodeId>& cur,
                                           const std::vector<NodeId>& next,
                                           const Environment& env)
{
  std::vector<Violation> out;
  const int n = static_cast<int>(cur.size());
  std::unordered_map<NodeId, int> next_holder;
  for (int i = 0; i < n; ++i) {
    if (cur[i] != next[i]) {
      const auto& nbrs = env.adj[cur[i]];
      if (std::find(nbrs.begin(), nbrs.end(), next[i]) == nbrs.end())
        out.push_back({Violation::Jump, i, -1, next[i]});
    }
    const auto [it, fresh] = next_holder.emplace(next[i], i);
    if (!fresh) out.push_back({Violation::Vertex, it->second, i, next[i]});
  }
  for (int i = 0; i < n; ++i) {
    if (cur[i] == next[i]) continue;
    for (int j = i + 1; j < n; ++j) {
      if (next[i] == cur[j] && next[j] == cur[i])
        out.push_back({Violation::Swap, i, j, next[i]});
    }
  }
  return out;
}

std::optional<int> assign_task_pibt(const AgentState& agent,
                                    std::vector<Task>& tasks,
                                    const Decomposition& decomp,
                                    SeedStream& stream)
{
  const int k = decomp.tree_containing(agent.position);
  std::vector<int> eligible;
  for (const Task& t : tasks) {
    if (t.status != TaskStatus::Pending) continue;
    if (k >= 0 && decomp.tree_containing(t.pickup) == k) continue;  // A3
    eligible.push_back(t.id);
  }
  if (eligible.empty()) return std::nullopt;
  const int id =
      eligible[static_cast<size_t>(stream.next_below(eligible.size()))];
  tasks[id].status = TaskStatus::Claimed;
  tasks[id].agent = agent.id;
  return id;
}

namespace {

bool any_pending(const std::vector<Task>& tasks)
{
  return std::any_of(tasks.begin(), tasks.end(), [](const Task& t) {
    return t.status == TaskStatus::Pending;
  });
}

bool all_done(const std::vector<Task>& tasks)
{
  return std::all_of(tasks.begin(), tasks.end(), [](const Task& t) {
    return t.status == TaskStatus::Done;
  });
}

struct Runner {
  const Environment& env;
  const Decomposition& decomp;
  RunPolicy policy;
  RunOptions opts;
  DistanceCache fields;
  std::vector<Task> tasks;
  RunResult result;
  int cap = 0;

  Runner(const Environment& e, const Decomposition& d, RunPolicy p,
         std::vector<Task> ts, std::uint64_t seed, const RunOptions& o)
      : env(e), decomp(d), policy(p), opts(o), fields(e), tasks(std::move(ts))
  {
    result.metrics.seed = seed;
    result.metrics.task_done_times.assign(tasks.size(), -1);
    cap = opts.cap_override > 0
              ? opts.cap_override
              : std::max(1, 100 * static_cast<int>(tasks.size()) *
                                std::max(1, diameter_bound(env)));
  }

  void record_trace(int t, const std::vector<AgentState>& agents,
                    std::vector<TraceEvent> events)
  {
    if (!opts.keep_trace) return;
    TraceRecord rec;
    rec.t = t;
    for (const auto& a : agents)
      rec.agents.push_back({a.id, a.position, a.priority, a.tas,
                            a.task.value_or(-1), a.goal()});
    rec.events = std::move(events);
    result.trace.push_back(std::move(rec));
  }

  void finish(int makespan, int timesteps)
  {
    result.metrics.completed = true;
    result.metrics.makespan = makespan;
    result.metrics.timesteps = timesteps;
  }

  void abort(const std::string& reason, int timesteps)
  {
    result.metrics.completed = false;
    result.metrics.abort_reason = reason;
    result.metrics.timesteps = timesteps;
    result.metrics.makespan = timesteps;
  }
};

// ---------------------------------------------------------------- PIBT ----

void run_pibt_family(Runner& r, int n, std::uint64_t seed)
{
  const PolicyKind kind = r.policy == RunPolicy::NaivePIBT
                              ? PolicyKind::NaivePIBT
                          : r.policy == RunPolicy::PIBTTP
                              ? PolicyKind::PIBTTP
                              : PolicyKind::PIBTTP_TA;

  std::vector<AgentState> agents(n);
  {
    SeedStream eps_stream(seed, "eps");
    std::vector<double> eps;
    while (static_cast<int>(eps.size()) < n) {
      const double e = eps_stream.next_unit();
      if (std::find(eps.begin(), eps.end(), e) == eps.end())
        eps.push_back(e);
    }
    for (int i = 0; i < n; ++i) {
      agents[i].id = i;
      agents[i].position = r.env.parking_nodes[i];
      agents[i].parking = agents[i].position;
      agents[i].epsilon = eps[i];
    }
  }

  SeedStream pick_stream(seed, "taskpick");
  const int window = 2 * r.env.node_count();
  std::vector<std::vector<NodeId>> history;  // for the no-progress detector
  int last_completion = -1;

  int t = 0;
  while (true) {
    std::vector<TraceEvent> events;

    // arrivals at time t
    for (auto& a : agents) {
      if (!a.task) continue;
      Task& task = r.tasks[*a.task];
      if (a.phase == Phase::ToPickup && a.position == task.pickup) {
        task.status = TaskStatus::PickedUp;
        a.phase = Phase::ToDelivery;
        a.destination = task.delivery;
        events.push_back({"pickup", a.id, task.id, task.pickup});
      }
      if (a.phase == Phase::ToDelivery && a.position == task.delivery) {
        task.status = TaskStatus::Done;
        task.done_time = t;
        r.result.metrics.task_done_times[task.id] = t;
        last_completion = t;
        events.push_back({"delivery", a.id, task.id, task.delivery});
        a.task.reset();
        a.destination.reset();
        a.phase = Phase::Idle;
      }
    }

    if (all_done(r.tasks)) {
      compute_priorities(agents, r.decomp, r.fields, kind);
      r.record_trace(t, agents, std::move(events));
      r.finish(t, t);
      return;
    }

    // task claims and destinations for taskless agents
    for (auto& a : agents) {
      if (a.task) continue;
      if (any_pending(r.tasks)) {
        if (auto id = assign_task_pibt(a, r.tasks, r.decomp, pick_stream)) {
          a.task = id;
          a.phase = Phase::ToPickup;
          a.destination = r.tasks[*id].pickup;
        } else {
          // A3: pickups of every pending task share this tree; head to the
          // connecting node first
          const int k = r.decomp.tree_containing(a.position);
          a.phase = Phase::Returning;
          a.destination = r.decomp.trees[k].connecting;
        }
      } else if (a.position == a.parking) {
        a.phase = Phase::Idle;
        a.destination.reset();
      } else {
        a.phase = Phase::Returning;
        a.destination = a.parking;
      }
    }

    compute_priorities(agents, r.decomp, r.fields, kind);
    r.record_trace(t, agents, std::move(events));

    std::vector<NodeId> current(n);
    for (int i = 0; i < n; ++i) current[i] = agents[i].position;

    StepContext ctx = make_step_context(agents, t);
    std::vector<EngineEvent> engine_events;
    const auto next =
        plan_step(agents, ctx, r.env, r.decomp, r.fields, kind,
                  &engine_events);
    if (r.opts.keep_trace) {
      for (const auto& e : engine_events)
        r.result.trace.back().events.push_back(
            {e.kind == EngineEvent::Reserve ? "reserve" : "revert", e.agent,
             -1, e.node});
    }

    const auto violations = validate_transition(current, next, r.env);
    if (!violations.empty()) {
      r.result.metrics.violations += static_cast<int>(violations.size());
      r.abort("violation", t);
      return;
    }

    for (int i = 0; i < n; ++i) agents[i].position = next[i];

    // no-progress detector for the naive-PIBT demos
    if (kind == PolicyKind::NaivePIBT) {
      history.push_back(current);
      const int idx = t - window;
      if (idx >= 0 && history[idx] == current && last_completion < idx) {
        r.abort("no-progress", t);
        return;
      }
    }

    ++t;
    if (t > r.cap) {
      r.abort("timestep-cap", t);
      return;
    }
  }
}

// ------------------------------------------------------------------ TP ----

void run_tp(Runner& r, int n)
{
  Token token;
  token.paths.resize(n);
  token.path_task.assign(n, -1);
  std::vector<NodeId> parking(n);
  for (int i = 0; i < n; ++i) {
    parking[i] = r.env.parking_nodes[i];
    token.paths[i] = {0, {parking[i]}};
  }

  auto record = [&](int t, const std::vector<TraceEvent>& events) {
    if (!r.opts.keep_trace) return;
    TraceRecord rec;
    rec.t = t;
    for (int i = 0; i < n; ++i) {
      const int task = token.path_task[i];
      const NodeId dest =
          task >= 0 ? (r.tasks[task].status == TaskStatus::PickedUp
                           ? r.tasks[task].delivery
                           : r.tasks[task].pickup)
                    : parking[i];
      rec.agents.push_back({i, token.paths[i].at(t), 0.0, false, task, dest});
    }
    rec.events = events;
    r.result.trace.push_back(std::move(rec));
  };

  int t = 0;
  std::vector<TraceEvent> pending_events;
  while (true) {
    if (all_done(r.tasks)) {
      record(t, pending_events);
      r.finish(t, t);
      return;
    }
    record(t, pending_events);
    pending_events.clear();

    // token requests in ascending agent id
    for (int a = 0; a < n; ++a) {
      if (token.paths[a].end_time() > t) continue;  // still executing
      const NodeId pos = token.paths[a].at(t);
      bool planned = false;
      if (const auto id = select_task_tp(a, pos, r.tasks, token, r.fields)) {
        const Task& task = r.tasks[*id];
        const ReservationTable table(token, a);
        if (auto p1 = space_time_astar(r.env, pos, t, task.pickup, table,
                                       r.fields)) {
          if (auto p2 = space_time_astar(r.env, task.pickup, p1->end_time(),
                                         task.delivery, table, r.fields)) {
            TimedPath combined = *p1;
            combined.nodes.insert(combined.nodes.end(),
                                  p2->nodes.begin() + 1, p2->nodes.end());
            token.paths[a] = std::move(combined);
            token.path_task[a] = *id;
            r.tasks[*id].status = TaskStatus::Claimed;
            r.tasks[*id].agent = a;
            planned = true;
          }
        }
      }
      if (!planned) {
        const ReservationTable table(token, a);
        if (pos != parking[a]) {
          if (auto p = space_time_astar(r.env, pos, t, parking[a], table,
                                        r.fields)) {
            token.paths[a] = std::move(*p);
            token.path_task[a] = -1;
            planned = true;
          }
        }
        if (!planned) {
          // stay if conflict-free, otherwise retreat one step
          if (table.last_use(pos) <= t) {
            token.paths[a] = {t, {pos}};
          } else {
            bool moved = false;
            for (NodeId w : r.env.adj[pos]) {
              if (table.vertex_blocked(w, t + 1)) continue;
              if (table.edge_blocked(pos, w, t)) continue;
              if (table.last_use(w) > t + 1) continue;
              token.paths[a] = {t, {pos, w}};
              moved = true;
              break;
            }
            if (!moved) token.paths[a] = {t, {pos}};
          }
          token.path_task[a] = -1;
        }
      }
    }

    std::vector<NodeId> current(n), next(n);
    for (int i = 0; i < n; ++i) {
      current[i] = token.paths[i].at(t);
      next[i] = token.paths[i].at(t + 1);
    }
    const auto violations = validate_transition(current, next, r.env);
    if (!violations.empty()) {
      r.result.metrics.violations += static_cast<int>(violations.size());
      r.abort("violation", t);
      return;
    }

    ++t;
    for (int a = 0; a < n; ++a) {
      const int id = token.path_task[a];
      if (id < 0) continue;
      Task& task = r.tasks[id];
      const NodeId pos = token.paths[a].at(t);
      if (task.status == TaskStatus::Claimed && pos == task.pickup) {
        task.status = TaskStatus::PickedUp;
        pending_events.push_back({"pickup", a, id, task.pickup});
      }
      if (task.status == TaskStatus::PickedUp && pos == task.delivery &&
          token.paths[a].end_time() <= t) {
        task.status = TaskStatus::Done;
        task.done_time = t;
        r.result.metrics.task_done_times[id] = t;
        pending_events.push_back({"delivery", a, id, task.delivery});
        token.path_task[a] = -1;
      }
    }

    if (t > r.cap) {
      r.abort("timestep-cap", t);
      return;
    }
  }
}

}  // namespace

RunResult run_instance(const Environment& env, const Decomposition& decomp,
                       int n, std::vector<Task> taskset, RunPolicy policy,
                       std::uint64_t seed, const RunOptions& opts)
{
  if (n <= 0) throw MapError("agent count must be positive");
  if (n > static_cast<int>(env.parking_nodes.size()))
    throw MapError("agent count exceeds parking capacity");
  int main_count = 0;
  for (NodeId v = 0; v < env.node_count(); ++v)
    if (decomp.in_main(v)) ++main_count;
  if (n >= main_count)
    throw MapError("agent count must be below the main-area size");

  Runner r(env, decomp, policy, std::move(taskset), seed, opts);
  if (r.tasks.empty()) {
    r.finish(0, 0);
    r.result.tasks = r.tasks;
    return std::move(r.result);
  }
  if (policy == RunPolicy::TP)
    run_tp(r, n);
  else
    run_pibt_family(r, n, seed);
  r.result.tasks = r.tasks;
  return std::move(r.result);
}

std::string trace_to_jsonl(const RunResult& result, const Environment& env)
{
  std::ostringstream out;
  for (const auto& rec : result.trace) {
    json o;
    o["t"] = rec.t;
    o["agents"] = json::array();
    for (const auto& a : rec.agents) {
      json ja;
      ja["id"] = a.id;
      ja["x"] = env.x_of(a.position);
      ja["y"] = env.y_of(a.position);
      ja["p"] = a.priority;
      ja["tas"] = a.tas;
      ja["task"] = a.task;
      o["agents"].push_back(std::move(ja));
    }
    o["events"] = json::array();
    for (const auto& e : rec.events) {
      json je;
      je["type"] = e.type;
      je["agent"] = e.agent;
      if (e.task >= 0) je["task"] = e.task;
      if (e.node >= 0) {
        je["x"] = env.x_of(e.node);
        je["y"] = env.y_of(e.node);
      }
      o["events"].push_back(std::move(je));
    }
    out << o.dump() << '\n';
  }
  return out.str();
}

std::string metrics_to_json(const Metrics& m)
{
  json o;
  o["makespan"] = m.makespan;
  o["violations"] = m.violations;
  o["timesteps"] = m.timesteps;
  o["seed"] = m.seed;
  o["completed"] = m.completed;
  if (!m.abort_reason.empty()) o["abort_reason"] = m.abort_reason;
  return o.dump();
}

}  // namespace mapd
