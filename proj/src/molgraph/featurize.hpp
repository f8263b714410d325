#pragma once

#include <string>
#include <vector>

#include "molgraph/graph.hpp"

namespace graphmem::mol {

// Ordered element vocabulary. Symbols outside it share one trailing OTHER
// slot, so a vocabulary of n symbols spans n + 1 one-hot slots.
class ElementVocabulary {
public:
  ElementVocabulary() = default;
  explicit ElementVocabulary(std::vector<std::string> symbols);

  // Common organic-chemistry elements.
  static ElementVocabulary organic();
  // Comma-separated symbol list.
  static ElementVocabulary parse(const std::string &list);

  int slot(const std::string &symbol) const;
  int other_slot() const noexcept { return static_cast<int>(symbols_.size()); }
  int slot_count() const noexcept { return other_slot() + 1; }
  const std::vector<std::string> &symbols() const noexcept { return symbols_; }
  std::string to_string() const;

private:
  std::vector<std::string> symbols_;
};

inline constexpr int kDegreeSlots = 5;
inline constexpr int kHydrogenSlots = 5;

int degree_slot(int degree);
int hydrogen_slot(int h);

// Node row: one-hot element (vocab + OTHER) ++ one-hot degree (0..4, larger
// clamps to 4) ++ one-hot explicit-H count (0..4, clamped).
// Edge: one-hot relation (R slots) ++ in-ring bit.
// K_x = |vocab| + 1 + 5 + 5.
MolecularGraph featurize(MolecularGraph g, const ElementVocabulary &vocab);
int molecular_feature_dim(const ElementVocabulary &vocab);

// Edge features alone (one-hot relation ++ in-ring bit), attached in place.
void attach_edge_features(MolecularGraph &g);

} // namespace graphmem::mol
