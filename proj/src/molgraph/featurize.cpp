#include "molgraph/featurize.hpp"

#include <algorithm>

#include "common/config.hpp"
#include "molgraph/rings.hpp"

namespace graphmem::mol {

ElementVocabulary::ElementVocabulary(std::vector<std::string> symbols)
    : symbols_(std::move(symbols)) { }

ElementVocabulary ElementVocabulary::organic() {
  return ElementVocabulary({"C",  "N",  "O",  "S",  "F",  "Si", "P",  "Cl",
                            "Br", "Mg", "Na", "Ca", "Fe", "As", "Al", "I",
                            "B",  "V",  "K",  "Tl", "Yb", "Sb", "Sn", "Ag",
                            "Pd", "Co", "Se", "Ti", "Zn", "H",  "Li", "Ge",
                            "Cu", "Au", "Ni", "Cd", "In", "Mn", "Zr", "Cr",
                            "Pt", "Hg", "Pb"});
}

ElementVocabulary ElementVocabulary::parse(const std::string &list) {
  std::vector<std::string> symbols;
  for (const auto &part: split(list, ',')) {
    auto s = trim(part);
    if (!s.empty())
      symbols.push_back(s);
  }
  return ElementVocabulary(std::move(symbols));
}

int ElementVocabulary::slot(const std::string &symbol) const {
  auto it = std::find(symbols_.begin(), symbols_.end(), symbol);
  return it == symbols_.end() ? other_slot()
                              : static_cast<int>(it - symbols_.begin());
}

std::string ElementVocabulary::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (i)
      out += ',';
    out += symbols_[i];
  }
  return out;
}

int degree_slot(int degree) { return std::clamp(degree, 0, kDegreeSlots - 1); }
int hydrogen_slot(int h) { return std::clamp(h, 0, kHydrogenSlots - 1); }

int molecular_feature_dim(const ElementVocabulary &vocab) {
  return vocab.slot_count() + kDegreeSlots + kHydrogenSlots;
}

void attach_edge_features(MolecularGraph &g) {
  const auto ring = detect_ring_edges(g);
  const int r = g.relation_count();
  for (int e = 0; e < g.edge_count(); ++e) {
    std::vector<double> b(static_cast<std::size_t>(r + 1), 0.0);
    b[static_cast<std::size_t>(g.edge(e).relation - 1)] = 1.0;
    b[static_cast<std::size_t>(r)] = ring[static_cast<std::size_t>(e)] ? 1.0 : 0.0;
    g.set_link_features(e, std::move(b));
  }
}

MolecularGraph featurize(MolecularGraph g, const ElementVocabulary &vocab) {
  const int m = g.node_count();
  const int elem = vocab.slot_count();
  num::Tensor x(static_cast<std::size_t>(m),
                static_cast<std::size_t>(molecular_feature_dim(vocab)));
  for (int i = 0; i < m; ++i) {
    const auto &a = g.node(i);
    x(i, vocab.slot(a.element)) = 1.0;
    x(i, elem + degree_slot(a.degree)) = 1.0;
    x(i, elem + kDegreeSlots + hydrogen_slot(a.explicit_h)) = 1.0;
  }
  g.set_node_features(std::move(x));
  attach_edge_features(g);
  return g;
}

} // namespace graphmem::mol
