#include "molgraph/rings.hpp"

#include <algorithm>

namespace graphmem::mol {

std::vector<bool> detect_ring_edges(const MolecularGraph &g) {
  const int m = g.node_count();
  std::vector<bool> in_ring(static_cast<std::size_t>(g.edge_count()), true);

  std::vector<std::vector<Neighbor>> adj(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    adj[i] = g.all_neighbors(i);

  std::vector<int> disc(m, -1), low(m, 0);
  struct Frame {
    int node;
    int parent_edge;
    std::size_t next;
  };
  std::vector<Frame> stack;
  int timer = 0;

  for (int root = 0; root < m; ++root) {
    if (disc[root] >= 0)
      continue;
    disc[root] = low[root] = timer++;
    stack.push_back({root, -1, 0});
    while (!stack.empty()) {
      auto &top = stack.back();
      const int v = top.node;
      if (top.next < adj[v].size()) {
        const auto nb = adj[v][top.next++];
        if (nb.edge == top.parent_edge)
          continue;
        if (disc[nb.node] >= 0) {
          low[v] = std::min(low[v], disc[nb.node]);
        } else {
          disc[nb.node] = low[nb.node] = timer++;
          stack.push_back({nb.node, nb.edge, 0});
        }
        continue;
      }
      const int parent_edge = top.parent_edge;
      stack.pop_back();
      if (stack.empty())
        continue;
      const int u = stack.back().node;
      low[u] = std::min(low[u], low[v]);
      if (low[v] > disc[u])
        in_ring[static_cast<std::size_t>(parent_edge)] = false;
    }
  }
  return in_ring;
}

} // namespace graphmem::mol
