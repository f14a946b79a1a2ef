#include "mapd/decomposition.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace mapd {

Decomposition Decomposition::all_main(const Environment& env)
{
  Decomposition d;
  d.region.assign(env.node_count(), -1);
  d.parent.assign(env.node_count(), -1);
  d.depth.assign(env.node_count(), 0);
  return d;
}

bool is_biconnected(const Environment& env, const std::vector<char>& member)
{
  const int n = env.node_count();
  int count = 0;
  NodeId root = -1;
  for (NodeId v = 0; v < n; ++v)
    if (member[v]) {
      ++count;
      if (root < 0) root = v;
    }
  if (count < 3) return false;

  // iterative Tarjan articulation-point search on the induced subgraph
  std::vector<int> disc(n, -1), low(n, 0), parent(n, -1), child_count(n, 0);
  std::vector<size_t> next_edge(n, 0);
  int timer = 0, visited = 0;
  bool articulation = false;
  std::vector<NodeId> stack{root};
  disc[root] = low[root] = timer++;
  ++visited;
  while (!stack.empty() && !articulation) {
    const NodeId v = stack.back();
    if (next_edge[v] < env.adj[v].size()) {
      const NodeId u = env.adj[v][next_edge[v]++];
      if (!member[u]) continue;
      if (disc[u] < 0) {
        parent[u] = v;
        ++child_count[v];
        disc[u] = low[u] = timer++;
        ++visited;
        stack.push_back(u);
      } else if (u != parent[v]) {
        low[v] = std::min(low[v], disc[u]);
      }
    } else {
      stack.pop_back();
      const NodeId p = parent[v];
      if (p >= 0) {
        low[p] = std::min(low[p], low[v]);
        if (p != root && low[v] >= disc[p]) articulation = true;
      }
    }
  }
  if (articulation) return false;
  if (visited != count) return false;  // induced subgraph disconnected
  if (child_count[root] > 1) return false;
  return true;
}

Decomposition decompose(const Environment& env)
{
  const int n = env.node_count();
  std::vector<int> degree(n, 0);
  std::vector<char> pruned(n, 0);
  std::deque<NodeId> queue;
  for (NodeId v = 0; v < n; ++v) {
    degree[v] = static_cast<int>(env.adj[v].size());
    if (degree[v] <= 1) queue.push_back(v);
  }
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    if (pruned[v]) continue;
    pruned[v] = 1;
    for (NodeId u : env.adj[v]) {
      if (!pruned[u] && --degree[u] == 1) queue.push_back(u);
    }
  }

  std::vector<char> main_member(n, 0);
  int main_count = 0;
  for (NodeId v = 0; v < n; ++v)
    if (!pruned[v]) {
      main_member[v] = 1;
      ++main_count;
    }
  if (main_count == 0)
    throw DecompositionError("leaf stripping consumed the whole graph");
  if (main_count < 3)
    throw DecompositionError("residual main area has fewer than 3 nodes");
  if (!is_biconnected(env, main_member))
    throw DecompositionError("main area is not bi-connected");

  Decomposition d;
  d.region.assign(n, -1);
  d.parent.assign(n, -1);
  d.depth.assign(n, 0);

  // group pruned nodes into connected fragments
  std::vector<char> seen(n, 0);
  for (NodeId start = 0; start < n; ++start) {
    if (!pruned[start] || seen[start]) continue;
    std::vector<NodeId> fragment;
    std::deque<NodeId> frontier{start};
    seen[start] = 1;
    std::vector<NodeId> attachments;
    while (!frontier.empty()) {
      const NodeId v = frontier.front();
      frontier.pop_front();
      fragment.push_back(v);
      for (NodeId u : env.adj[v]) {
        if (main_member[u]) {
          if (std::find(attachments.begin(), attachments.end(), u) ==
              attachments.end())
            attachments.push_back(u);
        } else if (!seen[u]) {
          seen[u] = 1;
          frontier.push_back(u);
        }
      }
    }
    if (attachments.size() != 1)
      throw DecompositionError(
          "pruned fragment attaches to the main area at " +
          std::to_string(attachments.size()) + " nodes");

    const int k = d.tree_count();
    Tree tree;
    tree.connecting = attachments.front();
    tree.proper_nodes = fragment;
    std::sort(tree.proper_nodes.begin(), tree.proper_nodes.end());
    tree.nodes = tree.proper_nodes;
    tree.nodes.push_back(tree.connecting);
    std::sort(tree.nodes.begin(), tree.nodes.end());
    for (NodeId v : tree.proper_nodes) d.region[v] = k;

    // root the tree at its connecting node
    std::deque<NodeId> bfs{tree.connecting};
    while (!bfs.empty()) {
      const NodeId v = bfs.front();
      bfs.pop_front();
      for (NodeId u : env.adj[v]) {
        if (d.region[u] == k && d.parent[u] < 0 && u != tree.connecting) {
          d.parent[u] = v;
          d.depth[u] = (v == tree.connecting ? 0 : d.depth[v]) + 1;
          bfs.push_back(u);
        }
      }
    }
    d.trees.push_back(std::move(tree));
  }
  return d;
}

std::vector<NodeId> tree_shortest_path_set(const Decomposition& decomp,
                                           int tree_id, NodeId from,
                                           NodeId dest)
{
  if (tree_id < 0 || tree_id >= decomp.tree_count())
    throw DecompositionError("tree id out of range");
  const Tree& tree = decomp.trees[tree_id];
  if (!decomp.in_tree(from, tree_id))
    throw DecompositionError("path start is not in the tree");
  const NodeId target = decomp.in_tree(dest, tree_id) ? dest : tree.connecting;

  auto depth_of = [&](NodeId v) {
    return v == tree.connecting ? 0 : decomp.depth[v];
  };
  auto up = [&](NodeId v) { return decomp.parent[v]; };

  std::vector<NodeId> head{from}, tail{target};
  NodeId a = from, b = target;
  while (depth_of(a) > depth_of(b)) head.push_back(a = up(a));
  while (depth_of(b) > depth_of(a)) tail.push_back(b = up(b));
  while (a != b) {
    head.push_back(a = up(a));
    tail.push_back(b = up(b));
  }
  head.pop_back();  // meeting node is in tail
  head.insert(head.end(), tail.rbegin(), tail.rend());
  return head;
}

}  // namespace mapd
