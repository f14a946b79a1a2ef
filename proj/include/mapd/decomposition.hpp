#pragma once
#include "mapd/world.hpp"

namespace mapd {

struct DecompositionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Tree {
  NodeId connecting = -1;           // lies in the main area
  std::vector<NodeId> nodes;        // proper nodes + connecting, sorted
  std::vector<NodeId> proper_nodes; // nodes \ {connecting}, sorted
};

// Main bi-connected area plus the trees hanging off it. region[v] is -1 for
// main-area nodes (including connecting nodes) and the tree index for proper
// tree nodes. parent/depth root each tree at its connecting node.
struct Decomposition {
  std::vector<int> region;
  std::vector<Tree> trees;
  std::vector<NodeId> parent;  // toward the connecting node; -1 in main
  std::vector<int> depth;      // 0 in main

  bool in_main(NodeId v) const { return region[v] < 0; }
  // tree index if v is a proper tree node, else -1
  int tree_containing(NodeId v) const { return region[v]; }
  int tree_count() const { return static_cast<int>(trees.size()); }
  // true if v belongs to V_T^k (proper nodes or the connecting node)
  bool in_tree(NodeId v, int k) const
  {
    return region[v] == k || trees[k].connecting == v;
  }

  // Degenerate decomposition with every node in the main area; used by the
  // naive-PIBT demos and unit tests on maps that do not decompose.
  static Decomposition all_main(const Environment& env);
};

// Iterative leaf stripping, then verification that the residual induces a
// bi-connected subgraph and that each stripped fragment attaches to it at
// exactly one node. Throws DecompositionError on out-of-class maps.
Decomposition decompose(const Environment& env);

// The unique path inside tree k from `from` to the target, where the target
// is `dest` when dest lies in V_T^k and the connecting node otherwise.
// `from` must be in V_T^k. The result starts at `from` and ends at the
// target (a single node when from == target).
std::vector<NodeId> tree_shortest_path_set(const Decomposition& decomp,
                                           int tree_id, NodeId from,
                                           NodeId dest);

// Articulation-point based check of the subgraph induced by `nodes`
// (member[v] != 0). Requires >= 3 nodes, connectivity, and no cut vertex.
bool is_biconnected(const Environment& env, const std::vector<char>& member);

}  // namespace mapd
