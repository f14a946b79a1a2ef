#include "mapd/bench.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace mapd {

namespace {

std::string map_stem(const std::string& path)
{
  return std::filesystem::path(path).stem().string();
}

}  // namespace

BenchConfig parse_bench_config(const std::string& json_text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("config is not valid JSON: ") +
                             e.what());
  }
  BenchConfig cfg;
  if (!j.contains("maps") || !j["maps"].is_array() || j["maps"].empty())
    throw std::runtime_error("config needs a non-empty 'maps' array");
  for (const auto& m : j["maps"]) cfg.maps.push_back(m.get<std::string>());

  if (!j.contains("policies") || !j["policies"].is_array() ||
      j["policies"].empty())
    throw std::runtime_error("config needs a non-empty 'policies' array");
  for (const auto& p : j["policies"]) {
    const auto parsed = parse_run_policy(p.get<std::string>());
    if (!parsed)
      throw std::runtime_error("unknown policy '" + p.get<std::string>() +
                               "'");
    cfg.policies.push_back(*parsed);
  }

  if (!j.contains("agents") || !j["agents"].is_array() || j["agents"].empty())
    throw std::runtime_error("config needs a non-empty 'agents' array");
  for (const auto& a : j["agents"]) {
    const int n = a.get<int>();
    if (n <= 0) throw std::runtime_error("agent counts must be positive");
    cfg.agent_counts.push_back(n);
  }

  cfg.tasks = j.value("tasks", 50);
  if (cfg.tasks < 0) throw std::runtime_error("'tasks' must be >= 0");

  if (j.contains("seeds")) {
    for (const auto& s : j["seeds"])
      cfg.seeds.push_back(s.get<std::uint64_t>());
  } else {
    const int count = j.value("seed_count", 10);
    if (count <= 0) throw std::runtime_error("'seed_count' must be positive");
    for (int s = 1; s <= count; ++s) cfg.seeds.push_back(s);
  }
  if (cfg.seeds.empty())
    throw std::runtime_error("config needs at least one seed");

  cfg.workers = j.value("workers", 0);
  if (cfg.workers < 0) throw std::runtime_error("'workers' must be >= 0");
  return cfg;
}

BenchConfig load_bench_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bench_config(ss.str());
}

std::vector<BenchRow> run_benchmark(const BenchConfig& cfg)
{
  struct Case {
    int map_idx;
    RunPolicy policy;
    int agents;
    std::uint64_t seed;
  };
  std::vector<Case> cases;
  for (int mi = 0; mi < static_cast<int>(cfg.maps.size()); ++mi)
    for (RunPolicy policy : cfg.policies)
      for (int agents : cfg.agent_counts)
        for (std::uint64_t seed : cfg.seeds)
          cases.push_back({mi, policy, agents, seed});

  std::vector<Environment> envs;
  std::vector<Decomposition> decomps;
  for (const std::string& path : cfg.maps) {
    envs.push_back(load_map(path));
    decomps.push_back(decompose(envs.back()));
  }

  std::vector<BenchRow> rows(cases.size());
  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= cases.size()) return;
      const Case& c = cases[i];
      const Environment& env = envs[c.map_idx];
      SeedStream stream(c.seed, "taskset");
      auto taskset =
          generate_taskset(env, decomps[c.map_idx], cfg.tasks, stream);
      const RunResult res = run_instance(env, decomps[c.map_idx], c.agents,
                                         std::move(taskset), c.policy, c.seed);
      BenchRow& row = rows[i];
      row.map = map_stem(cfg.maps[c.map_idx]);
      row.policy = c.policy;
      row.agents = c.agents;
      row.tasks = cfg.tasks;
      row.seed = c.seed;
      row.makespan = res.metrics.makespan;
      row.timesteps = res.metrics.timesteps;
      row.violations = res.metrics.violations;
      row.completed = res.metrics.completed;
    }
  };

  int workers = cfg.workers > 0
                    ? cfg.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 0) workers = 1;
  workers = std::min<int>(workers, static_cast<int>(cases.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return rows;
}

std::vector<BenchAggregate> aggregate_rows(const std::vector<BenchRow>& rows)
{
  std::map<std::tuple<std::string, int, int>, std::vector<const BenchRow*>>
      groups;
  for (const BenchRow& r : rows)
    groups[{r.map, static_cast<int>(r.policy), r.agents}].push_back(&r);

  std::vector<BenchAggregate> out;
  for (const auto& [key, members] : groups) {
    BenchAggregate a;
    a.map = std::get<0>(key);
    a.policy = static_cast<RunPolicy>(std::get<1>(key));
    a.agents = std::get<2>(key);
    a.runs = static_cast<int>(members.size());
    double sum = 0.0;
    for (const BenchRow* r : members) {
      sum += r->makespan;
      if (r->completed) ++a.completed;
    }
    a.makespan_mean = sum / a.runs;
    double sq = 0.0;
    for (const BenchRow* r : members) {
      const double d = r->makespan - a.makespan_mean;
      sq += d * d;
    }
    a.makespan_stddev = a.runs > 1 ? std::sqrt(sq / (a.runs - 1)) : 0.0;
    out.push_back(a);
  }
  return out;
}

std::string rows_to_csv(const std::vector<BenchRow>& rows)
{
  std::ostringstream out;
  out << "# mapd-bench-results v1\n";
  out << "map,policy,agents,tasks,seed,makespan,timesteps,violations,"
         "completed\n";
  for (const BenchRow& r : rows) {
    out << r.map << ',' << run_policy_name(r.policy) << ',' << r.agents << ','
        << r.tasks << ',' << r.seed << ',' << r.makespan << ',' << r.timesteps
        << ',' << r.violations << ',' << (r.completed ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string aggregates_to_csv(const std::vector<BenchAggregate>& aggs)
{
  std::ostringstream out;
  out << "# mapd-bench-aggregate v1\n";
  out << "map,policy,agents,runs,completed,makespan_mean,makespan_stddev\n";
  out.setf(std::ios::fixed);
  out.precision(3);
  for (const BenchAggregate& a : aggs) {
    out << a.map << ',' << run_policy_name(a.policy) << ',' << a.agents << ','
        << a.runs << ',' << a.completed << ',' << a.makespan_mean << ','
        << a.makespan_stddev << '\n';
  }
  return out.str();
}

void write_benchmark(const BenchConfig& cfg, const std::string& out_dir)
{
  const auto rows = run_benchmark(cfg);
  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  {
    std::ofstream out(dir / "results.csv");
    if (!out)
      throw std::runtime_error("cannot write to " +
                               (dir / "results.csv").string());
    out << rows_to_csv(rows);
  }
  {
    std::ofstream out(dir / "aggregate.csv");
    out << aggregates_to_csv(aggregate_rows(rows));
  }
}

std::string map_report(const Environment& env, const Decomposition& decomp)
{
  std::ostringstream out;
  out << "map: " << env.name << '\n';
  out << "grid: " << env.width << "x" << env.height << '\n';
  out << "nodes: " << env.node_count() << ", edges: " << env.edge_count()
      << '\n';
  int main_count = 0;
  for (NodeId v = 0; v < env.node_count(); ++v)
    if (decomp.in_main(v)) ++main_count;
  out << "main area: " << main_count << " nodes (bi-connected)\n";
  out << "trees: " << decomp.tree_count() << '\n';
  for (int k = 0; k < decomp.tree_count(); ++k) {
    const Tree& tr = decomp.trees[k];
    out << "  tree " << k << ": " << tr.proper_nodes.size()
        << " proper nodes, connecting node (" << env.x_of(tr.connecting)
        << "," << env.y_of(tr.connecting) << ")\n";
  }
  out << "pickups: " << env.pickup_nodes.size()
      << ", deliveries: " << env.delivery_nodes.size()
      << ", parking: " << env.parking_nodes.size() << '\n';
  return out.str();
}

}  // namespace mapd
