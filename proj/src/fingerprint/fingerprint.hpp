#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "molgraph/featurize.hpp"
#include "molgraph/graph.hpp"

namespace graphmem::fp {

inline constexpr int kDefaultRadius = 2;
inline constexpr int kDefaultBits = 1024;

struct Fingerprint {
  std::vector<bool> bits;
  int radius = kDefaultRadius;

  int popcount() const;
  // nbits/4 hex characters, bit nbits-1 first.
  std::string to_hex() const;

  friend bool operator==(const Fingerprint &, const Fingerprint &) = default;
};

// Circular identifiers for every round 0..radius, before folding.
//   round 0: FNV-1a(u64 element slot, u64 degree slot, u64 H slot)
//   round r: FNV-1a(u64 r, u64 own previous id, u64 neighbor count,
//                   sorted (u64 relation, u64 neighbor previous id) pairs)
// Every integer is serialized as 8 little-endian bytes. A round-r identifier
// is kept only while the atom's bond environment still grows, so an isolated
// atom contributes only its round-0 identifier. Output order: all round-0
// identifiers by atom, then the kept round-1 identifiers, and so on.
std::vector<std::uint64_t> circular_identifiers(
    const mol::MolecularGraph &g, const mol::ElementVocabulary &vocab,
    int radius);

// Folds every identifier into nbits by modulo. nbits must be a power of two
// and at least 2.
Fingerprint circular_fingerprint(const mol::MolecularGraph &g,
                                 const mol::ElementVocabulary &vocab,
                                 int radius = kDefaultRadius,
                                 int nbits = kDefaultBits);

} // namespace graphmem::fp
