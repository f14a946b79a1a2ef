#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <climits>
#include <queue>
#include <string>
#include <vector>

#include "mapd/rng.hpp"
#include "mapd/token.hpp"
#include "mapd/world.hpp"

using namespace mapd;

namespace {

std::string lines(std::initializer_list<const char*> rows)
{
  std::string out;
  for (const char* r : rows) {
    out += r;
    out += '\n';
  }
  return out;
}

Environment corridor_env()
{
  return parse_map(
      lines({"mapd-map v1", "height 2", "width 5", ".....", ".....",}));
}

// Minimal arrival time by BFS over the time-expanded graph: the independent
// oracle for space_time_astar. Mirrors its contract: waiting allowed, moves
// respect vertex and edge reservations, and the agent must be able to park
// at the goal forever (arrive strictly after the last foreign use).
std::optional<int> brute_force_arrival(const Environment& env, NodeId start,
                                       int t0, NodeId goal,
                                       const ReservationTable& table)
{
  const int horizon = 4 * env.node_count();
  const int last = table.last_use(goal);
  std::vector<std::vector<char>> seen(
      static_cast<size_t>(horizon + 2),
      std::vector<char>(env.node_count(), 0));
  std::queue<std::pair<NodeId, int>> q;
  q.push({start, t0});
  seen[0][start] = 1;
  while (!q.empty()) {
    auto [v, t] = q.front();
    q.pop();
    if (v == goal && t > last) return t;
    if (t - t0 >= horizon) continue;
    std::vector<NodeId> moves = env.adj[v];
    moves.push_back(v);
    for (NodeId u : moves) {
      if (seen[t + 1 - t0][u]) continue;
      if (table.vertex_blocked(u, t + 1)) continue;
      if (u != v && table.edge_blocked(v, u, t)) continue;
      seen[t + 1 - t0][u] = 1;
      q.push({u, t + 1});
    }
  }
  return std::nullopt;
}

// Checks that a returned path obeys the same contract the oracle enforces.
void check_path_valid(const Environment& env, const TimedPath& p,
                      NodeId start, int t0, NodeId goal,
                      const ReservationTable& table)
{
  REQUIRE(!p.nodes.empty());
  CHECK(p.start_time == t0);
  CHECK(p.nodes.front() == start);
  CHECK(p.nodes.back() == goal);
  CHECK(p.end_time() > table.last_use(goal));
  for (size_t i = 0; i + 1 < p.nodes.size(); ++i) {
    const NodeId a = p.nodes[i], b = p.nodes[i + 1];
    const int t = t0 + static_cast<int>(i);
    if (a != b) {
      const auto& nb = env.adj[a];
      CHECK(std::find(nb.begin(), nb.end(), b) != nb.end());
      CHECK_FALSE(table.edge_blocked(a, b, t));
    }
    CHECK_FALSE(table.vertex_blocked(b, t + 1));
  }
}

TimedPath walk(int start_time, std::initializer_list<NodeId> nodes)
{
  TimedPath p;
  p.start_time = start_time;
  p.nodes.assign(nodes);
  return p;
}

}  // namespace

TEST_CASE("TimedPath indexing and parking")
{
  const TimedPath p = walk(3, {7, 8, 8, 9});
  CHECK(p.end_time() == 6);
  CHECK(p.at(0) == 7);
  CHECK(p.at(3) == 7);
  CHECK(p.at(4) == 8);
  CHECK(p.at(5) == 8);
  CHECK(p.at(6) == 9);
  CHECK(p.at(100) == 9);  // parked
}

TEST_CASE("ReservationTable blocks vertices, edges and parking")
{
  const auto env = corridor_env();
  const NodeId n0 = env.node_at(0, 0), n1 = env.node_at(1, 0),
               n2 = env.node_at(2, 0);
  Token token;
  token.paths.push_back(walk(0, {n0, n1, n2}));  // agent 0, parks at n2
  token.paths.push_back(walk(0, {env.node_at(4, 1)}));  // agent 1
  token.path_task = {-1, -1};
  // build the table for agent 1, so only agent 0's path counts
  ReservationTable table(token, 1);

  CHECK(table.vertex_blocked(n0, 0));
  CHECK(table.vertex_blocked(n1, 1));
  CHECK_FALSE(table.vertex_blocked(n1, 0));
  CHECK_FALSE(table.vertex_blocked(n0, 1));
  // parked at n2 from t=2 on
  CHECK(table.vertex_blocked(n2, 2));
  CHECK(table.vertex_blocked(n2, 1000));
  CHECK(table.last_use(n2) == INT_MAX);
  CHECK(table.last_use(n1) == 1);
  CHECK(table.last_use(env.node_at(4, 1)) < 0);
  // swap against the n0 -> n1 move at t=0
  CHECK(table.edge_blocked(n1, n0, 0));
  CHECK_FALSE(table.edge_blocked(n0, n1, 0));
  CHECK_FALSE(table.edge_blocked(n1, n0, 1));
  // the skipped agent's own path adds nothing
  ReservationTable own(token, 0);
  CHECK_FALSE(own.vertex_blocked(n0, 0));
}

TEST_CASE("space_time_astar on an empty table walks the shortest path")
{
  const auto env = corridor_env();
  DistanceCache fields(env);
  Token token;
  token.paths.push_back(walk(0, {env.node_at(0, 0)}));
  token.path_task = {-1};
  ReservationTable table(token, 0);
  const NodeId start = env.node_at(0, 0), goal = env.node_at(4, 0);
  const auto p = space_time_astar(env, start, 0, goal, table, fields);
  REQUIRE(p.has_value());
  CHECK(p->end_time() == 4);
  check_path_valid(env, *p, start, 0, goal, table);
}

TEST_CASE("space_time_astar waits out crossing traffic")
{
  const auto env = corridor_env();
  DistanceCache fields(env);
  const NodeId start = env.node_at(1, 1), goal = env.node_at(1, 0);
  Token token;
  // another agent passes through the goal cell at t=1 and moves on
  token.paths.push_back(
      walk(0, {env.node_at(0, 0), env.node_at(1, 0), env.node_at(2, 0),
               env.node_at(3, 0)}));
  token.paths.push_back(walk(0, {start}));
  token.path_task = {-1, -1};
  ReservationTable table(token, 1);
  const auto p = space_time_astar(env, start, 0, goal, table, fields);
  REQUIRE(p.has_value());
  CHECK(p->end_time() == 2);  // one wait step, arrive after the crossing
  check_path_valid(env, *p, start, 0, goal, table);
}

TEST_CASE("space_time_astar fails when the goal is parked on")
{
  const auto env = corridor_env();
  DistanceCache fields(env);
  const NodeId goal = env.node_at(4, 0);
  Token token;
  token.paths.push_back(walk(0, {goal}));  // parked forever
  token.paths.push_back(walk(0, {env.node_at(0, 0)}));
  token.path_task = {-1, -1};
  ReservationTable table(token, 1);
  CHECK_FALSE(
      space_time_astar(env, env.node_at(0, 0), 0, goal, table, fields)
          .has_value());
}

TEST_CASE("space_time_astar matches the time-expanded oracle")
{
  SeedStream rng(77, "taskpick");
  const auto env = corridor_env();
  DistanceCache fields(env);
  const int n = env.node_count();
  for (int trial = 0; trial < 200; ++trial) {
    // two other agents follow random lazy walks, then park
    Token token;
    for (int a = 0; a < 2; ++a) {
      TimedPath p;
      p.start_time = 0;
      NodeId v = static_cast<NodeId>(rng.next_below(n));
      p.nodes.push_back(v);
      const int len = 2 + static_cast<int>(rng.next_below(6));
      for (int i = 0; i < len; ++i) {
        const auto& nb = env.adj[p.nodes.back()];
        const auto pick = rng.next_below(nb.size() + 1);
        p.nodes.push_back(pick == nb.size() ? p.nodes.back() : nb[pick]);
      }
      token.paths.push_back(p);
      token.path_task.push_back(-1);
    }
    token.paths.push_back(walk(0, {0}));  // the planning agent itself
    token.path_task.push_back(-1);
    ReservationTable table(token, 2);

    const NodeId start = static_cast<NodeId>(rng.next_below(n));
    const NodeId goal = static_cast<NodeId>(rng.next_below(n));
    const int t0 = static_cast<int>(rng.next_below(3));
    const auto expect = brute_force_arrival(env, start, t0, goal, table);
    const auto got = space_time_astar(env, start, t0, goal, table, fields);
    CHECK(got.has_value() == expect.has_value());
    if (got && expect) {
      CHECK(got->end_time() == *expect);
      check_path_valid(env, *got, start, t0, goal, table);
    }
  }
}

TEST_CASE("select_task_tp picks the nearest unencumbered task")
{
  const auto env = corridor_env();
  DistanceCache fields(env);
  const NodeId here = env.node_at(0, 0);
  std::vector<Task> tasks(3);
  tasks[0] = {0, env.node_at(4, 0), env.node_at(4, 1), TaskStatus::Pending,
              -1, -1};
  tasks[1] = {1, env.node_at(2, 0), env.node_at(3, 1), TaskStatus::Pending,
              -1, -1};
  tasks[2] = {2, env.node_at(1, 0), env.node_at(2, 1), TaskStatus::Done, -1,
              -1};
  Token token;
  token.paths.push_back(walk(0, {here}));
  token.paths.push_back(walk(0, {env.node_at(0, 1)}));
  token.path_task = {-1, -1};

  SUBCASE("nearest pending pickup wins; done tasks are skipped")
  {
    const auto t = select_task_tp(0, here, tasks, token, fields);
    REQUIRE(t.has_value());
    CHECK(*t == 1);
  }

  SUBCASE("a task whose endpoint is another path's end is ineligible")
  {
    token.paths[1] = walk(0, {env.node_at(0, 1), env.node_at(1, 1),
                              env.node_at(2, 1), env.node_at(2, 0)});
    const auto t = select_task_tp(0, here, tasks, token, fields);
    REQUIRE(t.has_value());
    CHECK(*t == 0);  // task 1's pickup is agent 1's parking spot
  }

  SUBCASE("a task claimed by another agent blocks its endpoints")
  {
    tasks[1].status = TaskStatus::Claimed;
    tasks[1].agent = 1;
    token.path_task = {-1, 1};
    const auto t = select_task_tp(0, here, tasks, token, fields);
    REQUIRE(t.has_value());
    CHECK(*t == 0);
  }

  SUBCASE("nothing eligible yields nullopt")
  {
    tasks[0].status = TaskStatus::Done;
    tasks[1].status = TaskStatus::Done;
    CHECK_FALSE(select_task_tp(0, here, tasks, token, fields).has_value());
  }
}
