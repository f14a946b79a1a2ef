#pragma once
#include <array>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mapd {

using NodeId = int;

struct MapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Static environment: a 4-connected grid graph with unit edges and node
// roles. Node ids follow the row-major cell scan, so a smaller id is the
// deterministic tie-breaker everywhere.
struct Environment {
  std::string name;
  int width = 0;
  int height = 0;

  std::vector<std::array<int, 2>> coord;     // node -> {x, y}
  std::vector<NodeId> node_at_cell;          // row-major cell -> node or -1
  std::vector<std::vector<NodeId>> adj;      // sorted ascending
  std::vector<NodeId> pickup_nodes;
  std::vector<NodeId> delivery_nodes;
  std::vector<NodeId> parking_nodes;
  std::vector<char> is_pickup, is_delivery, is_parking;

  int node_count() const { return static_cast<int>(coord.size()); }
  int edge_count() const;
  NodeId node_at(int x, int y) const
  {
    if (x < 0 || y < 0 || x >= width || y >= height) return -1;
    return node_at_cell[y * width + x];
  }
  int x_of(NodeId v) const { return coord[v][0]; }
  int y_of(NodeId v) const { return coord[v][1]; }
};

// Parses the `mapd-map v1` ASCII format:
//   line 1: "mapd-map v1", line 2: "height H", line 3: "width W",
//   then H rows of W cells: @ obstacle, . walkable, p pickup, d delivery,
//   i parking, b pickup+delivery. LF endings, no trailing whitespace.
// Throws MapError on syntax errors or a disconnected walkable region.
Environment parse_map(const std::string& text, const std::string& name = "");
Environment load_map(const std::string& path);

struct DistanceField {
  NodeId goal = -1;
  std::vector<int> dist;  // hop count per node
};

// BFS hop distances to `goal` over the full graph.
DistanceField distance_field(const Environment& env, NodeId goal);

// Lazily computed per-goal distance fields, shared by one instance.
class DistanceCache
{
public:
  explicit DistanceCache(const Environment& env) : env_(&env) {}
  const DistanceField& to(NodeId goal);
  int dist(NodeId from, NodeId goal) { return to(goal).dist[from]; }

private:
  const Environment* env_;
  std::unordered_map<NodeId, DistanceField> fields_;
};

// Upper bound on the graph diameter (2x eccentricity of node 0).
int diameter_bound(const Environment& env);

}  // namespace mapd
