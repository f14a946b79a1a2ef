#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <string>
#include <vector>

#include "mapd/sim.hpp"

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

Environment load_env(const char* file)
{
  return load_map(std::string(MAPD_MAPS_DIR) + file);
}

}  // namespace

TEST_CASE("validate_transition flags each conflict kind")
{
  const auto env = parse_map(
      lines({"mapd-map v1", "height 2", "width 3", "...", "..."}));
  const NodeId n00 = env.node_at(0, 0), n10 = env.node_at(1, 0),
               n20 = env.node_at(2, 0), n01 = env.node_at(0, 1),
               n11 = env.node_at(1, 1);

  SUBCASE("stays and plain moves pass")
  {
    CHECK(validate_transition({n00, n20}, {n00, n10}, env).empty());
  }
  SUBCASE("vertex conflict")
  {
    const auto v = validate_transition({n00, n20}, {n10, n10}, env);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == Violation::Vertex);
    CHECK(v[0].node == n10);
  }
  SUBCASE("swap conflict")
  {
    const auto v = validate_transition({n00, n10}, {n10, n00}, env);
    REQUIRE(!v.empty());
    CHECK(v.back().kind == Violation::Swap);
  }
  SUBCASE("jump")
  {
    const auto v = validate_transition({n00}, {n20}, env);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == Violation::Jump);
  }
  SUBCASE("full-cycle rotation passes")
  {
    const auto v = validate_transition({n00, n10, n11, n01},
                                       {n10, n11, n01, n00}, env);
    CHECK(v.empty());
  }
}

TEST_CASE("generate_taskset draws legal pairs only")
{
  // two trees, each holding one pickup and one delivery
  const auto env = parse_map(lines(
      {"mapd-map v1", "height 3", "width 4", "..pd", "..@@", "..pd"}));
  const auto decomp = decompose(env);
  REQUIRE(decomp.tree_count() == 2);
  SeedStream stream(17, "taskset");
  const auto tasks = generate_taskset(env, decomp, 200, stream);
  CHECK(tasks.size() == 200);
  for (const auto& t : tasks) {
    CHECK(env.is_pickup[t.pickup]);
    CHECK(env.is_delivery[t.delivery]);
    CHECK(t.pickup != t.delivery);
    const int ks = decomp.tree_containing(t.pickup);
    if (ks >= 0) CHECK(decomp.tree_containing(t.delivery) != ks);
    CHECK(t.status == TaskStatus::Pending);
  }
}

TEST_CASE("assign_task_pibt respects the current tree and claims the pick")
{
  const auto env = parse_map(lines(
      {"mapd-map v1", "height 3", "width 4", "..pd", "..@@", "..pd"}));
  const auto decomp = decompose(env);
  const NodeId in_tree0 = env.node_at(2, 0);

  std::vector<Task> tasks(2);
  tasks[0] = {0, env.node_at(2, 0), env.node_at(3, 2)};  // pickup in tree 0
  tasks[1] = {1, env.node_at(2, 2), env.node_at(3, 0)};  // pickup in tree 1

  AgentState a;
  a.id = 4;
  a.position = in_tree0;
  SeedStream stream(3, "taskpick");
  const auto got = assign_task_pibt(a, tasks, decomp, stream);
  REQUIRE(got.has_value());
  CHECK(*got == 1);  // task 0's pickup shares the agent's tree
  CHECK(tasks[1].status == TaskStatus::Claimed);
  CHECK(tasks[1].agent == 4);
  // nothing eligible anymore
  CHECK_FALSE(assign_task_pibt(a, tasks, decomp, stream).has_value());
}

TEST_CASE("assign_task_pibt picks uniformly among eligible tasks")
{
  const auto env = load_env("/env1.map");
  const auto decomp = decompose(env);
  AgentState a;
  a.id = 0;
  a.position = env.parking_nodes[0];  // in main; everything is eligible

  const int bins = 8, draws = 8000;
  std::vector<Task> base(bins);
  for (int i = 0; i < bins; ++i)
    base[i] = {i, env.pickup_nodes[i % env.pickup_nodes.size()],
               env.delivery_nodes[i % env.delivery_nodes.size()]};
  SeedStream stream(41, "taskpick");
  std::vector<int> count(bins, 0);
  for (int i = 0; i < draws; ++i) {
    auto tasks = base;
    const auto got = assign_task_pibt(a, tasks, decomp, stream);
    REQUIRE(got.has_value());
    ++count[*got];
  }
  const double expected = static_cast<double>(draws) / bins;
  double chi2 = 0.0;
  for (int c : count) chi2 += (c - expected) * (c - expected) / expected;
  // 7 dof, alpha = 0.001 -> 24.32
  CHECK(chi2 < 24.32);
}

TEST_CASE("an empty taskset finishes immediately")
{
  const auto env = load_env("/env1.map");
  const auto decomp = decompose(env);
  const auto res = run_instance(env, decomp, 5, {}, RunPolicy::PIBTTP, 1);
  CHECK(res.metrics.completed);
  CHECK(res.metrics.makespan == 0);
  CHECK(res.metrics.timesteps == 0);
  CHECK(res.metrics.violations == 0);
}

TEST_CASE("run_instance rejects impossible agent counts")
{
  const auto env = load_env("/env1.map");
  const auto decomp = decompose(env);
  CHECK_THROWS_AS(run_instance(env, decomp, 0, {}, RunPolicy::PIBTTP, 1),
                  MapError);
  CHECK_THROWS_AS(run_instance(env, decomp, 41, {}, RunPolicy::PIBTTP, 1),
                  MapError);
}

TEST_CASE("all policies complete a small instance without violations")
{
  const auto env = load_env("/env1.map");
  const auto decomp = decompose(env);
  SeedStream ts(5, "taskset");
  const auto tasks = generate_taskset(env, decomp, 10, ts);
  for (RunPolicy p :
       {RunPolicy::PIBTTP, RunPolicy::PIBTTP_TA, RunPolicy::TP}) {
    const auto res = run_instance(env, decomp, 8, tasks, p, 5);
    CAPTURE(run_policy_name(p));
    CHECK(res.metrics.completed);
    CHECK(res.metrics.violations == 0);
    CHECK(res.metrics.makespan > 0);
    for (const auto& task : res.tasks) CHECK(task.status == TaskStatus::Done);
    for (int dt : res.metrics.task_done_times) {
      CHECK(dt >= 0);
      CHECK(dt <= res.metrics.makespan);
    }
  }
  // naive PIBT may deadlock on deep trees (that is the baseline's flaw),
  // but it must never produce a conflict
  const auto naive = run_instance(env, decomp, 8, tasks,
                                  RunPolicy::NaivePIBT, 5);
  CHECK(naive.metrics.violations == 0);
}

TEST_CASE("runs are deterministic: byte-identical traces and metrics")
{
  const auto env = load_env("/env2.map");
  const auto decomp = decompose(env);
  RunOptions opts;
  opts.keep_trace = true;
  for (RunPolicy p : {RunPolicy::PIBTTP, RunPolicy::PIBTTP_TA,
                      RunPolicy::TP}) {
    SeedStream ts1(9, "taskset"), ts2(9, "taskset");
    const auto r1 = run_instance(env, decomp, 10,
                                 generate_taskset(env, decomp, 15, ts1), p, 9,
                                 opts);
    const auto r2 = run_instance(env, decomp, 10,
                                 generate_taskset(env, decomp, 15, ts2), p, 9,
                                 opts);
    CAPTURE(run_policy_name(p));
    CHECK(trace_to_jsonl(r1, env) == trace_to_jsonl(r2, env));
    CHECK(metrics_to_json(r1.metrics) == metrics_to_json(r2.metrics));
  }
}

TEST_CASE("naive PIBT deadlocks on the dead-end demo; PIBTTP does not")
{
  const auto env = load_env("/deadend.map");
  const auto decomp = decompose(env);
  SeedStream ts(1, "taskset");
  const auto tasks = generate_taskset(env, decomp, 2, ts);

  const auto naive =
      run_instance(env, decomp, 2, tasks, RunPolicy::NaivePIBT, 1);
  CHECK_FALSE(naive.metrics.completed);
  CHECK(naive.metrics.abort_reason == "no-progress");
  CHECK(naive.metrics.violations == 0);

  const auto fixed = run_instance(env, decomp, 2, tasks, RunPolicy::PIBTTP, 1);
  CHECK(fixed.metrics.completed);
  CHECK(fixed.metrics.violations == 0);
}

TEST_CASE("trace and metrics serialize to the documented JSON shapes")
{
  const auto env = load_env("/env1.map");
  const auto decomp = decompose(env);
  SeedStream ts(2, "taskset");
  RunOptions opts;
  opts.keep_trace = true;
  const auto res = run_instance(env, decomp, 5,
                                generate_taskset(env, decomp, 3, ts),
                                RunPolicy::PIBTTP_TA, 2, opts);
  const std::string jsonl = trace_to_jsonl(res, env);
  REQUIRE(!jsonl.empty());

  const std::string first = jsonl.substr(0, jsonl.find('\n'));
  const auto o = nlohmann::json::parse(first);
  CHECK(o.at("t") == 0);
  REQUIRE(o.at("agents").is_array());
  CHECK(o.at("agents").size() == 5);
  const auto& a = o.at("agents").at(0);
  CHECK(a.contains("id"));
  CHECK(a.contains("x"));
  CHECK(a.contains("y"));
  CHECK(a.contains("p"));
  CHECK(a.contains("tas"));
  CHECK(a.contains("task"));
  CHECK(o.at("events").is_array());
  // one record per timestep, consecutively numbered
  size_t lines_count = 0;
  for (char c : jsonl) lines_count += c == '\n';
  CHECK(lines_count == res.trace.size());

  const auto m = nlohmann::json::parse(metrics_to_json(res.metrics));
  CHECK(m.at("makespan") == res.metrics.makespan);
  CHECK(m.at("violations") == 0);
  CHECK(m.at("timesteps") == res.metrics.timesteps);
  CHECK(m.at("seed") == 2);
  CHECK(m.at("completed") == true);
}

TEST_CASE("pickup and delivery events appear exactly once per task")
{
  const auto env = load_env("/env3.map");
  const auto decomp = decompose(env);
  SeedStream ts(4, "taskset");
  RunOptions opts;
  opts.keep_trace = true;
  const auto res = run_instance(env, decomp, 6,
                                generate_taskset(env, decomp, 8, ts),
                                RunPolicy::PIBTTP, 4, opts);
  REQUIRE(res.metrics.completed);
  std::vector<int> pickups(8, 0), deliveries(8, 0);
  for (const auto& rec : res.trace)
    for (const auto& e : rec.events) {
      if (e.type == "pickup") ++pickups[e.task];
      if (e.type == "delivery") ++deliveries[e.task];
    }
  for (int i = 0; i < 8; ++i) {
    CHECK(pickups[i] == 1);
    CHECK(deliveries[i] == 1);
  }
}
