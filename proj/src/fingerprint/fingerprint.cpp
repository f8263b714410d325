#include "fingerprint/fingerprint.hpp"

#include <algorithm>
#include <deque>
#include <utility>

#include "common/error.hpp"
#include "common/fnv.hpp"

namespace graphmem::fp {

int Fingerprint::popcount() const {
  return static_cast<int>(std::count(bits.begin(), bits.end(), true));
}

std::string Fingerprint::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t n = bits.size();
  std::string out;
  out.reserve(n / 4);
  for (std::size_t chunk = 0; chunk < n / 4; ++chunk) {
    // chunk 0 holds bits n-1 .. n-4.
    int nibble = 0;
    for (int k = 0; k < 4; ++k) {
      std::size_t bit = n - 1 - (chunk * 4 + static_cast<std::size_t>(k));
      nibble = (nibble << 1) | (bits[bit] ? 1 : 0);
    }
    out.push_back(kDigits[nibble]);
  }
  return out;
}

namespace {

// For each atom, the largest round whose environment still adds bonds.
// Bond (u, v) enters atom i's environment at round min(d(i,u), d(i,v)) + 1.
std::vector<int> growth_limit(const mol::MolecularGraph &g) {
  const int m = g.node_count();
  std::vector<int> limit(static_cast<std::size_t>(m), 0);
  std::vector<int> dist(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[i] = 0;
    std::deque<int> queue{i};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const auto &nb: g.all_neighbors(u))
        if (dist[nb.node] < 0) {
          dist[nb.node] = dist[u] + 1;
          queue.push_back(nb.node);
        }
    }
    for (const auto &e: g.edges())
      if (dist[e.i] >= 0)
        limit[i] = std::max(limit[i], std::min(dist[e.i], dist[e.j]) + 1);
  }
  return limit;
}

} // namespace

std::vector<std::uint64_t>
circular_identifiers(const mol::MolecularGraph &g,
                     const mol::ElementVocabulary &vocab, int radius) {
  if (radius < 0)
    throw ConfigError("fingerprint radius must be >= 0");
  const int m = g.node_count();
  std::vector<std::uint64_t> current(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto &a = g.node(i);
    Fnv1a64 h;
    h.update_u64(static_cast<std::uint64_t>(vocab.slot(a.element)));
    h.update_u64(static_cast<std::uint64_t>(mol::degree_slot(a.degree)));
    h.update_u64(static_cast<std::uint64_t>(mol::hydrogen_slot(a.explicit_h)));
    current[i] = h.digest();
  }
  std::vector<std::uint64_t> all(current);
  const auto limit = growth_limit(g);

  std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(current.size());
    for (int i = 0; i < m; ++i) {
      env.clear();
      for (const auto &nb: g.all_neighbors(i))
        env.emplace_back(static_cast<std::uint64_t>(g.edge(nb.edge).relation),
                         current[nb.node]);
      std::sort(env.begin(), env.end());
      Fnv1a64 h;
      h.update_u64(static_cast<std::uint64_t>(r));
      h.update_u64(current[i]);
      h.update_u64(env.size());
      for (const auto &[rel, id]: env) {
        h.update_u64(rel);
        h.update_u64(id);
      }
      next[i] = h.digest();
    }
    current = std::move(next);
    for (int i = 0; i < m; ++i)
      if (r <= limit[i])
        all.push_back(current[i]);
  }
  return all;
}

Fingerprint circular_fingerprint(const mol::MolecularGraph &g,
                                 const mol::ElementVocabulary &vocab,
                                 int radius, int nbits) {
  if (nbits < 2 || (nbits & (nbits - 1)) != 0)
    throw ConfigError("fingerprint length must be a power of two >= 2, got "
                      + std::to_string(nbits));
  Fingerprint fp;
  fp.radius = radius;
  fp.bits.assign(static_cast<std::size_t>(nbits), false);
  for (auto id: circular_identifiers(g, vocab, radius))
    fp.bits[id % static_cast<std::uint64_t>(nbits)] = true;
  return fp;
}

} // namespace graphmem::fp
