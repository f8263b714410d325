#include "molgraph/graph.hpp"

namespace graphmem::mol {

MolecularGraph::MolecularGraph(std::vector<AtomNode> nodes, int relation_count)
    : nodes_(std::move(nodes)), relation_count_(relation_count) {
  if (relation_count < 1)
    throw GraphError("relation count must be >= 1");
  adjacency_.assign(static_cast<std::size_t>(relation_count),
                    std::vector<std::vector<Neighbor>>(nodes_.size()));
  for (int i = 0; i < node_count(); ++i)
    recount(i);
}

void MolecularGraph::recount(int node) {
  int degree = 0, h = 0;
  for (const auto &per_rel: adjacency_)
    for (const auto &nb: per_rel[node]) {
      ++degree;
      if (nodes_[nb.node].element == "H")
        ++h;
    }
  nodes_[node].degree = degree;
  nodes_[node].explicit_h = h;
}

int MolecularGraph::add_edge(int i, int j, int relation) {
  const int m = node_count();
  if (i < 0 || i >= m || j < 0 || j >= m)
    throw GraphError("edge (" + std::to_string(i) + ", " + std::to_string(j)
                     + ") references a node outside [0, " + std::to_string(m)
                     + ")");
  if (i == j)
    throw GraphError("self-loop on node " + std::to_string(i));
  if (relation < 1 || relation > relation_count_)
    throw GraphError("relation " + std::to_string(relation) + " outside [1, "
                     + std::to_string(relation_count_) + "]");
  if (find_edge(i, j) >= 0)
    throw GraphError("duplicate edge between " + std::to_string(i) + " and "
                     + std::to_string(j));
  const int e = edge_count();
  edges_.push_back(Edge{i, j, relation, {}});
  adjacency_[relation - 1][i].push_back({j, e});
  adjacency_[relation - 1][j].push_back({i, e});
  recount(i);
  recount(j);
  return e;
}

void MolecularGraph::set_relation(int edge, int relation) {
  auto &ed = edges_.at(edge);
  if (relation < 1 || relation > relation_count_)
    throw GraphError("relation " + std::to_string(relation) + " outside [1, "
                     + std::to_string(relation_count_) + "]");
  if (ed.relation == relation)
    return;
  auto drop = [&](int a, int b) {
    auto &lst = adjacency_[ed.relation - 1][a];
    std::erase_if(lst, [&](const Neighbor &n) { return n.node == b; });
    adjacency_[relation - 1][a].push_back({b, edge});
  };
  drop(ed.i, ed.j);
  drop(ed.j, ed.i);
  ed.relation = relation;
}

std::span<const Neighbor> MolecularGraph::neighbors(int relation,
                                                    int i) const {
  return adjacency_.at(relation - 1).at(i);
}

std::vector<Neighbor> MolecularGraph::all_neighbors(int i) const {
  std::vector<Neighbor> out;
  for (const auto &per_rel: adjacency_)
    out.insert(out.end(), per_rel[i].begin(), per_rel[i].end());
  return out;
}

int MolecularGraph::find_edge(int i, int j) const {
  for (const auto &per_rel: adjacency_)
    for (const auto &nb: per_rel[i])
      if (nb.node == j)
        return nb.edge;
  return -1;
}

void MolecularGraph::set_node_features(num::Tensor x) {
  if (static_cast<int>(x.rows()) != node_count())
    throw GraphError("node feature rows " + std::to_string(x.rows())
                     + " != node count " + std::to_string(node_count()));
  features_ = std::move(x);
}

void MolecularGraph::set_link_features(int edge, std::vector<double> b) {
  auto &ed = edges_.at(edge);
  const int dim = static_cast<int>(b.size());
  const int others = featured_edges_ - (ed.link_features.empty() ? 0 : 1);
  if (others > 0 && dim != link_dim_)
    throw GraphError("link feature width " + std::to_string(dim)
                     + " differs from " + std::to_string(link_dim_));
  if (ed.link_features.empty())
    ++featured_edges_;
  ed.link_features = std::move(b);
  link_dim_ = dim;
}

MolecularGraph permute_nodes(const MolecularGraph &g,
                             const std::vector<int> &perm) {
  const int m = g.node_count();
  if (static_cast<int>(perm.size()) != m)
    throw GraphError("permutation length mismatch");
  std::vector<AtomNode> nodes(m);
  for (int i = 0; i < m; ++i)
    nodes[perm[i]] = g.node(i);
  MolecularGraph out(std::move(nodes), g.relation_count());
  out.name = g.name;
  out.fields = g.fields;
  for (const auto &e: g.edges()) {
    int id = out.add_edge(perm[e.i], perm[e.j], e.relation);
    if (!e.link_features.empty())
      out.set_link_features(id, e.link_features);
  }
  const auto &x = g.node_features();
  if (!x.empty()) {
    num::Tensor px(x.rows(), x.cols());
    for (int i = 0; i < m; ++i)
      for (std::size_t c = 0; c < x.cols(); ++c)
        px(perm[i], c) = x(i, c);
    out.set_node_features(std::move(px));
  }
  return out;
}

} // namespace graphmem::mol
