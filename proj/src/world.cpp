#include "mapd/world.hpp"

#include <deque>
#include <fstream>
#include <sstream>

namespace mapd {

int Environment::edge_count() const
{
  int twice = 0;
  for (const auto& nbrs : adj) twice += static_cast<int>(nbrs.size());
  return twice / 2;
}

namespace {

std::vector<std::string> split_lines(const std::string& text)
{
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

int parse_header_int(const std::string& line, const std::string& key)
{
  if (line.rfind(key + " ", 0) != 0)
    throw MapError("expected '" + key + " <int>' header line, got: " + line);
  const std::string rest = line.substr(key.size() + 1);
  size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(rest, &pos);
  } catch (const std::exception&) {
    throw MapError("bad integer in header line: " + line);
  }
  if (pos != rest.size() || value <= 0)
    throw MapError("bad integer in header line: " + line);
  return value;
}

}  // namespace

Environment parse_map(const std::string& text, const std::string& name)
{
  const auto lines = split_lines(text);
  if (lines.size() < 3) throw MapError("truncated map file");
  if (lines[0] != "mapd-map v1")
    throw MapError("bad magic line: " + lines[0]);
  if (lines[1].rfind("height ", 0) == 0 && lines[2].rfind("height ", 0) == 0)
    throw MapError("duplicate header key: height");
  const int height = parse_header_int(lines[1], "height");
  const int width = parse_header_int(lines[2], "width");
  if (static_cast<int>(lines.size()) != 3 + height)
    throw MapError("expected " + std::to_string(height) + " rows, got " +
                   std::to_string(static_cast<int>(lines.size()) - 3));

  Environment env;
  env.name = name;
  env.width = width;
  env.height = height;
  env.node_at_cell.assign(static_cast<size_t>(width) * height, -1);

  std::vector<char> cells(static_cast<size_t>(width) * height, '@');
  for (int y = 0; y < height; ++y) {
    const std::string& row = lines[3 + y];
    if (static_cast<int>(row.size()) != width)
      throw MapError("ragged row " + std::to_string(y) + ": width " +
                     std::to_string(row.size()) + " != " +
                     std::to_string(width));
    for (int x = 0; x < width; ++x) {
      const char c = row[x];
      switch (c) {
        case '@':
        case '.':
        case 'p':
        case 'd':
        case 'i':
        case 'b':
          cells[y * width + x] = c;
          break;
        default:
          throw MapError(std::string("unknown cell character '") + c +
                         "' at (" + std::to_string(x) + "," +
                         std::to_string(y) + ")");
      }
    }
  }

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const char c = cells[y * width + x];
      if (c == '@') continue;
      const NodeId id = env.node_count();
      env.node_at_cell[y * width + x] = id;
      env.coord.push_back({x, y});
      env.is_pickup.push_back(c == 'p' || c == 'b');
      env.is_delivery.push_back(c == 'd' || c == 'b');
      env.is_parking.push_back(c == 'i');
      if (env.is_pickup.back()) env.pickup_nodes.push_back(id);
      if (env.is_delivery.back()) env.delivery_nodes.push_back(id);
      if (env.is_parking.back()) env.parking_nodes.push_back(id);
    }
  }
  if (env.node_count() == 0) throw MapError("map has no walkable cells");

  env.adj.resize(env.node_count());
  for (NodeId v = 0; v < env.node_count(); ++v) {
    const int x = env.x_of(v), y = env.y_of(v);
    // ascending node id == row-major order of (y-1,x), (y,x-1), (y,x+1), (y+1,x)
    for (auto [dx, dy] : {std::pair{0, -1}, {-1, 0}, {1, 0}, {0, 1}}) {
      const NodeId u = env.node_at(x + dx, y + dy);
      if (u >= 0) env.adj[v].push_back(u);
    }
  }

  // connectivity of the walkable region
  std::vector<char> seen(env.node_count(), 0);
  std::deque<NodeId> queue{0};
  seen[0] = 1;
  int reached = 1;
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (NodeId u : env.adj[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        queue.push_back(u);
      }
    }
  }
  if (reached != env.node_count())
    throw MapError("disconnected walkable region (" + std::to_string(reached) +
                   " of " + std::to_string(env.node_count()) +
                   " cells reachable)");
  return env;
}

Environment load_map(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MapError("cannot open map file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos)
    name = name.substr(slash + 1);
  return parse_map(buf.str(), name);
}

DistanceField distance_field(const Environment& env, NodeId goal)
{
  if (goal < 0 || goal >= env.node_count())
    throw MapError("distance_field: goal is not a node");
  DistanceField f;
  f.goal = goal;
  f.dist.assign(env.node_count(), -1);
  f.dist[goal] = 0;
  std::deque<NodeId> queue{goal};
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (NodeId u : env.adj[v]) {
      if (f.dist[u] < 0) {
        f.dist[u] = f.dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return f;
}

const DistanceField& DistanceCache::to(NodeId goal)
{
  auto it = fields_.find(goal);
  if (it == fields_.end())
    it = fields_.emplace(goal, distance_field(*env_, goal)).first;
  return it->second;
}

int diameter_bound(const Environment& env)
{
  const auto f = distance_field(env, 0);
  int ecc = 0;
  for (int d : f.dist) ecc = std::max(ecc, d);
  return 2 * ecc;
}

}  // namespace mapd
