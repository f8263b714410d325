#pragma once

#include <optional>
#include <vector>

#include "graphmem/model.hpp"
#include "molgraph/graph.hpp"
#include "training/metrics.hpp"

namespace graphmem::support {

// Bridge oracle: an edge is on a ring iff its endpoints stay connected after
// removing it.
inline bool connected_without(const mol::MolecularGraph &g, int skip) {
  const auto &e = g.edge(skip);
  std::vector<bool> seen(static_cast<std::size_t>(g.node_count()), false);
  std::vector<int> stack{e.i};
  seen[e.i] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (const auto &nb: g.all_neighbors(u))
      if (nb.edge != skip && !seen[nb.node]) {
        seen[nb.node] = true;
        stack.push_back(nb.node);
      }
  }
  return seen[e.j];
}

// Uniform mean aggregation over all neighbors, repeated for some rounds.
inline std::vector<std::vector<double>> mean_passing(const mol::MolecularGraph &g,
                                                     std::vector<std::vector<double>> cells,
                                                     int rounds) {
  for (int t = 0; t < rounds; ++t) {
    auto next = cells;
    for (int i = 0; i < g.node_count(); ++i) {
      const auto nbrs = g.all_neighbors(i);
      for (std::size_t k = 0; k < next[i].size(); ++k) {
        double s = 0.0;
        for (const auto &nb: nbrs)
          s += cells[nb.node][k];
        next[i][k] = nbrs.empty() ? 0.0 : s / static_cast<double>(nbrs.size());
      }
    }
    cells = std::move(next);
  }
  return cells;
}

// Memory update reduced to mean message passing: W_m = U_m = 0,
// V = [I | 0], gate forced open. Needs raw nonnegative cells.
inline num::ParamSet mean_passing_params(const model::ModelConfig &c, Rng &rng) {
  auto p = model::init_params(c, rng);
  p.at("mem.W").fill(0.0);
  p.at("mem.U").fill(0.0);
  p.at("mem.b").fill(0.0);
  auto &v = p.at("mem.V1");
  v.fill(0.0);
  for (int k = 0; k < c.memory_size; ++k)
    v(k, k) = 1.0;
  p.at("mem_gate.W").fill(0.0);
  p.at("mem_gate.U").fill(0.0);
  p.at("mem_gate.V1").fill(0.0);
  p.at("mem_gate.b").fill(1000.0);
  return p;
}

// Pairwise AUC: every (positive, negative) pair scored explicitly.
inline std::optional<double> pairwise_auc(const std::vector<double> &s,
                                          const std::vector<int> &y) {
  long long twice = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        ++pairs;
        twice += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
      }
  if (pairs == 0)
    return std::nullopt;
  return static_cast<double>(twice) / static_cast<double>(2 * pairs);
}

struct BruteMetrics {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::optional<double>> auc;
};

// Counts every example against the 0.5 threshold, task by task.
inline BruteMetrics brute_metrics(const std::vector<double> &s, const std::vector<int> &y,
                                  const std::vector<int> &tasks, int task_count) {
  auto f1 = [](long long tp, long long fp, long long fn) {
    return 2 * tp + fp + fn == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
  };
  BruteMetrics out;
  long long all_tp = 0, all_fp = 0, all_fn = 0;
  double f1_sum = 0.0;
  for (int t = 0; t < task_count; ++t) {
    long long tp = 0, fp = 0, fn = 0;
    std::vector<double> ts;
    std::vector<int> ty;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (tasks[i] != t)
        continue;
      tp += s[i] >= 0.5 && y[i] == 1;
      fp += s[i] >= 0.5 && y[i] == 0;
      fn += s[i] < 0.5 && y[i] == 1;
      ts.push_back(s[i]);
      ty.push_back(y[i]);
    }
    all_tp += tp, all_fp += fp, all_fn += fn;
    f1_sum += f1(tp, fp, fn);
    out.auc.push_back(pairwise_auc(ts, ty));
  }
  out.micro_f1 = f1(all_tp, all_fp, all_fn);
  out.macro_f1 = f1_sum / task_count;
  return out;
}

} // namespace graphmem::support
