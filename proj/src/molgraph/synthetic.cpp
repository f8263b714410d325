#include "molgraph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/rng.hpp"

namespace graphmem::mol {

Motif Motif::parse(const std::string &text) {
  std::string shape;
  std::string rel;
  auto colon = text.find(':');
  auto of = text.find(" of relation ");
  if (colon != std::string::npos) {
    shape = trim(text.substr(0, colon));
    rel = trim(text.substr(colon + 1));
  } else if (of != std::string::npos) {
    shape = trim(text.substr(0, of));
    rel = trim(text.substr(of + 13));
  } else {
    throw ConfigError("motif '" + text
                      + "': expected '<shape>:<relation>'");
  }
  Motif m;
  m.shape = shape;
  try {
    std::size_t used = 0;
    m.relation = std::stoi(rel, &used);
    if (used != rel.size())
      throw std::invalid_argument("trailing");
  } catch (const std::exception &) {
    throw ConfigError("motif '" + text + "': bad relation '" + rel + "'");
  }
  if (shape == "triangle") {
    m.node_count = 3;
    m.edges = {{0, 1}, {1, 2}, {2, 0}};
  } else if (shape == "square") {
    m.node_count = 4;
    m.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  } else if (shape == "path3") {
    m.node_count = 3;
    m.edges = {{0, 1}, {1, 2}};
  } else if (shape == "star3") {
    m.node_count = 4;
    m.edges = {{0, 1}, {0, 2}, {0, 3}};
  } else {
    throw ConfigError("motif '" + text + "': unknown shape '" + shape + "'");
  }
  if (m.relation < 1)
    throw ConfigError("motif '" + text + "': relation must be >= 1");
  return m;
}

std::string Motif::to_string() const {
  return shape + ":" + std::to_string(relation);
}

SyntheticSpec SyntheticSpec::from_config(const KeyValueConfig &cfg) {
  SyntheticSpec s;
  auto motif = cfg.get("motif");
  if (!motif)
    throw ConfigError("synthetic spec: missing required key 'motif'");
  s.motif = Motif::parse(*motif);
  s.nodes_min = static_cast<int>(cfg.get_int("nodes_min", s.nodes_min));
  s.nodes_max = static_cast<int>(cfg.get_int("nodes_max", s.nodes_max));
  s.relations = static_cast<int>(cfg.get_int("relations", s.relations));
  s.balance = cfg.get_double("balance", s.balance);
  s.count = static_cast<int>(cfg.get_int("count", s.count));
  s.elements = static_cast<int>(cfg.get_int("elements", s.elements));
  s.extra_edges = static_cast<int>(cfg.get_int("extra_edges", s.extra_edges));
  for (const auto &[k, v]: cfg.entries()) {
    static const std::vector<std::string> known = {
        "motif",   "nodes_min", "nodes_max", "relations",
        "balance", "count",     "elements",  "extra_edges"};
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError("synthetic spec: unknown key '" + k + "'");
  }
  return s;
}

void SyntheticSpec::validate() const {
  if (nodes_min < 1 || nodes_max < nodes_min)
    throw ConfigError("synthetic spec: need 1 <= nodes_min <= nodes_max");
  if (relations < 1)
    throw ConfigError("synthetic spec: relations must be >= 1");
  if (motif.relation > relations)
    throw ConfigError("synthetic spec: motif relation "
                      + std::to_string(motif.relation) + " exceeds relations="
                      + std::to_string(relations));
  if (!(balance >= 0.0 && balance <= 1.0))
    throw ConfigError("synthetic spec: balance must lie in [0, 1]");
  if (count < 0)
    throw ConfigError("synthetic spec: count must be >= 0");
  if (elements < 1
      || elements > static_cast<int>(synthetic_alphabet().size()))
    throw ConfigError("synthetic spec: elements must lie in [1, "
                      + std::to_string(synthetic_alphabet().size()) + "]");
  if (extra_edges < 0)
    throw ConfigError("synthetic spec: extra_edges must be >= 0");
  if (motif.node_count > nodes_max)
    throw DataError("infeasible synthetic spec: motif '" + motif.to_string()
                    + "' needs " + std::to_string(motif.node_count)
                    + " nodes but nodes_max=" + std::to_string(nodes_max));
}

const std::vector<std::string> &synthetic_alphabet() {
  static const std::vector<std::string> alphabet = {"C", "N", "O",  "S",
                                                    "P", "F", "Cl", "Br"};
  return alphabet;
}

ElementVocabulary synthetic_vocabulary(int elements) {
  const auto &a = synthetic_alphabet();
  return ElementVocabulary(
      std::vector<std::string>(a.begin(), a.begin() + elements));
}

namespace {

bool extend(const MolecularGraph &g, const Motif &motif,
            std::vector<int> &assign, std::vector<bool> &used) {
  const int k = static_cast<int>(std::count_if(
      assign.begin(), assign.end(), [](int v) { return v >= 0; }));
  if (k == motif.node_count)
    return true;
  for (int cand = 0; cand < g.node_count(); ++cand) {
    if (used[cand])
      continue;
    bool ok = true;
    for (const auto &[a, b]: motif.edges) {
      int other = -1;
      if (a == k && b < k)
        other = assign[b];
      else if (b == k && a < k)
        other = assign[a];
      else
        continue;
      int e = g.find_edge(cand, other);
      if (e < 0 || g.edge(e).relation != motif.relation) {
        ok = false;
        break;
      }
    }
    if (!ok)
      continue;
    assign[k] = cand;
    used[cand] = true;
    if (extend(g, motif, assign, used))
      return true;
    assign[k] = -1;
    used[cand] = false;
  }
  return false;
}

MolecularGraph random_base(const SyntheticSpec &spec, int n, Rng &rng) {
  std::vector<AtomNode> nodes(static_cast<std::size_t>(n));
  for (auto &a: nodes)
    a.element = synthetic_alphabet()[rng.below(
        static_cast<std::uint64_t>(spec.elements))];
  MolecularGraph g(std::move(nodes), spec.relations);
  for (int v = 1; v < n; ++v)
    g.add_edge(static_cast<int>(rng.below(static_cast<std::uint64_t>(v))), v,
               rng.range(1, spec.relations));
  const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  int added = 0;
  for (int attempt = 0; attempt < spec.extra_edges * 20 && added < spec.extra_edges
                        && g.edge_count() < max_edges;
       ++attempt) {
    int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    if (a == b || g.find_edge(a, b) >= 0)
      continue;
    g.add_edge(a, b, rng.range(1, spec.relations));
    ++added;
  }
  return g;
}

void plant(MolecularGraph &g, const Motif &motif, Rng &rng) {
  std::vector<int> order(static_cast<std::size_t>(g.node_count()));
  for (int i = 0; i < g.node_count(); ++i)
    order[i] = i;
  rng.shuffle(order);
  for (const auto &[a, b]: motif.edges) {
    int u = order[a], v = order[b];
    int e = g.find_edge(u, v);
    if (e >= 0)
      g.set_relation(e, motif.relation);
    else
      g.add_edge(u, v, motif.relation);
  }
}

} // namespace

bool contains_motif(const MolecularGraph &g, const Motif &motif) {
  if (motif.node_count > g.node_count())
    return false;
  std::vector<int> assign(static_cast<std::size_t>(motif.node_count), -1);
  std::vector<bool> used(static_cast<std::size_t>(g.node_count()), false);
  return extend(g, motif, assign, used);
}

MolecularGraph featurize_synthetic(MolecularGraph g, int elements) {
  const auto vocab = synthetic_vocabulary(elements);
  num::Tensor x(static_cast<std::size_t>(g.node_count()),
                static_cast<std::size_t>(elements));
  for (int i = 0; i < g.node_count(); ++i) {
    int slot = vocab.slot(g.node(i).element);
    if (slot >= elements)
      throw GraphError("node element '" + g.node(i).element
                       + "' is outside the synthetic alphabet");
    x(i, slot) = 1.0;
  }
  g.set_node_features(std::move(x));
  attach_edge_features(g);
  return g;
}

std::vector<LabeledExample> generate_synthetic(const SyntheticSpec &spec,
                                               std::uint64_t seed,
                                               int task_id) {
  spec.validate();
  Rng rng(seed);
  const int positives = static_cast<int>(
      std::llround(spec.balance * static_cast<double>(spec.count)));
  std::vector<int> labels(static_cast<std::size_t>(spec.count), 0);
  std::fill(labels.begin(), labels.begin() + positives, 1);
  rng.shuffle(labels);

  constexpr int kMaxAttempts = 10000;
  const int pos_min = std::max(spec.nodes_min, spec.motif.node_count);

  std::vector<LabeledExample> out;
  out.reserve(labels.size());
  for (std::size_t idx = 0; idx < labels.size(); ++idx) {
    MolecularGraph g;
    if (labels[idx] == 1) {
      int n = rng.range(pos_min, spec.nodes_max);
      g = random_base(spec, n, rng);
      plant(g, spec.motif, rng);
    } else {
      int attempt = 0;
      for (;; ++attempt) {
        if (attempt == kMaxAttempts)
          throw DataError("infeasible synthetic spec: could not sample a "
                          "graph without motif '"
                          + spec.motif.to_string() + "'");
        int n = rng.range(spec.nodes_min, spec.nodes_max);
        g = random_base(spec, n, rng);
        if (!contains_motif(g, spec.motif))
          break;
      }
    }
    g.name = "synth-" + std::to_string(idx);
    auto featured = featurize_synthetic(std::move(g), spec.elements);
    out.push_back(LabeledExample{
        std::make_shared<const MolecularGraph>(std::move(featured)), task_id,
        labels[idx], "synth-" + std::to_string(idx)});
  }
  return out;
}

} // namespace graphmem::mol
