#pragma once

#include <vector>

#include "molgraph/graph.hpp"

namespace graphmem::mol {

// flag[e] is true iff edge e lies on a cycle, i.e. is not a bridge of the
// graph formed by the union of all relations. Iterative DFS with low-link
// values; O(M + E).
std::vector<bool> detect_ring_edges(const MolecularGraph &g);

} // namespace graphmem::mol
