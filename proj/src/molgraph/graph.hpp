#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "numerics/tensor.hpp"

namespace graphmem::mol {

struct AtomNode {
  std::string element;
  int explicit_h = 0; // neighbors whose element is "H"
  int degree = 0;
};

// An undirected bond, stored once. Relation ids run 1..R.
struct Edge {
  int i = 0;
  int j = 0;
  int relation = 1;
  std::vector<double> link_features;
};

struct Neighbor {
  int node;
  int edge;
};

class GraphError : public DataError {
public:
  using DataError::DataError;
};

// Multi-relational graph: nodes with feature rows, typed bidirectional edges
// with link features, and per-relation neighbor lists N_r(i).
class MolecularGraph {
public:
  MolecularGraph() = default;
  MolecularGraph(std::vector<AtomNode> nodes, int relation_count);

  // Adds an undirected edge. Throws GraphError on out-of-range indices,
  // self-loops, duplicate pairs, or a relation outside [1, R].
  int add_edge(int i, int j, int relation);
  void set_relation(int edge, int relation);

  int node_count() const noexcept { return static_cast<int>(nodes_.size()); }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  int relation_count() const noexcept { return relation_count_; }

  const std::vector<AtomNode> &nodes() const noexcept { return nodes_; }
  const std::vector<Edge> &edges() const noexcept { return edges_; }
  const AtomNode &node(int i) const { return nodes_.at(i); }
  const Edge &edge(int e) const { return edges_.at(e); }

  // N_r(i), in edge insertion order.
  std::span<const Neighbor> neighbors(int relation, int i) const;
  // N(i) over all relations.
  std::vector<Neighbor> all_neighbors(int i) const;
  // Edge id joining i and j, or -1.
  int find_edge(int i, int j) const;

  const num::Tensor &node_features() const noexcept { return features_; }
  void set_node_features(num::Tensor x);
  void set_link_features(int edge, std::vector<double> b);
  // Link-feature width; 0 until featurized.
  int link_dim() const noexcept { return link_dim_; }
  int feature_dim() const noexcept { return static_cast<int>(features_.cols()); }

  std::string name;
  std::map<std::string, std::string> fields; // SDF data items

private:
  void recount(int node);

  std::vector<AtomNode> nodes_;
  std::vector<Edge> edges_;
  int relation_count_ = 0;
  // adjacency_[r-1][i]
  std::vector<std::vector<std::vector<Neighbor>>> adjacency_;
  num::Tensor features_;
  int link_dim_ = 0;
  int featured_edges_ = 0;
};

struct LabeledExample {
  std::shared_ptr<const MolecularGraph> graph;
  int task_id = 0;
  int label = 0;
  std::string id;
};

// Copy of g with nodes relabeled: node i of g becomes node perm[i].
// Edge order is preserved.
MolecularGraph permute_nodes(const MolecularGraph &g,
                             const std::vector<int> &perm);

} // namespace graphmem::mol
