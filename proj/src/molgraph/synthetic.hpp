#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "common/config.hpp"
#include "molgraph/featurize.hpp"
#include "molgraph/graph.hpp"

namespace graphmem::mol {

// A small pattern whose edges all carry one relation. Written as
// "<shape>:<relation>" or "<shape> of relation <relation>"; shapes are
// triangle, square (4-cycle), path3 (3 nodes, 2 edges) and star3.
struct Motif {
  std::string shape;
  int relation = 1;
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;

  static Motif parse(const std::string &text);
  std::string to_string() const;
};

// Motif-task description, read from flat key=value text.
// Required: motif. Optional (defaults): nodes_min (8), nodes_max (16),
// relations (3), balance (0.5), count (100), elements (4, alphabet size),
// extra_edges (2, random non-tree edges per graph).
struct SyntheticSpec {
  int nodes_min = 8;
  int nodes_max = 16;
  int relations = 3;
  Motif motif;
  double balance = 0.5;
  int count = 100;
  int elements = 4;
  int extra_edges = 2;

  static SyntheticSpec from_config(const KeyValueConfig &cfg);
  // Throws DataError if positives cannot contain the motif.
  void validate() const;
};

// Symbols used for synthetic node labels, in slot order.
const std::vector<std::string> &synthetic_alphabet();
ElementVocabulary synthetic_vocabulary(int elements);

// True iff some injective map of motif nodes to graph nodes sends every
// motif edge onto a graph edge of the motif's relation.
bool contains_motif(const MolecularGraph &g, const Motif &motif);

// Node features: one-hot over the synthetic alphabet. Edge features: one-hot
// relation ++ in-ring bit.
MolecularGraph featurize_synthetic(MolecularGraph g, int elements);

// Deterministic for a fixed (spec, seed). Exactly round(balance * count)
// positives; positives carry a planted motif, negatives are rejection-sampled
// until they do not contain it.
std::vector<LabeledExample> generate_synthetic(const SyntheticSpec &spec,
                                               std::uint64_t seed,
                                               int task_id = 0);

} // namespace graphmem::mol
