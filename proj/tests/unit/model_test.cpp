#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "graphmem/model.hpp"
#include "graphs.hpp"
#include "oracles.hpp"

using namespace graphmem;
using namespace graphmem::model;
using num::Tensor;
using support::mean_passing;
using support::mean_passing_params;

namespace {

ModelConfig small_config(const mol::MolecularGraph &g, int km = 6, int kh = 5) {
  ModelConfig c;
  c.input_dim = g.feature_dim();
  c.link_dim = g.link_dim();
  c.relation_count = g.relation_count();
  c.memory_size = km;
  c.controller_size = kh;
  return c;
}

void zero_all(num::ParamSet &p) {
  for (auto &[name, t]: p)
    t.fill(0.0);
}

Tensor mat(std::size_t r, std::size_t c, std::vector<double> v) {
  return Tensor(r, c, std::move(v));
}


} // namespace

TEST(InitState, IdentityQueryReadIn) {
  Rng rng(1);
  auto g = support::random_featured_graph(rng, 4, 3, 2);
  auto c = small_config(g, 4, 3);
  c.query_dim = 3;
  auto p = init_params(c, rng);
  p.at("query.W") = Tensor::identity(3);
  const auto s = init_state(c, p, g, Query::one_hot(2, 3));
  EXPECT_EQ(s.h, Tensor::column({0.0, 0.0, 1.0}));
  EXPECT_EQ(s.memory.cols(), 4u);
}

TEST(InitState, ZeroFeaturesGiveZeroCells) {
  mol::MolecularGraph g({{"C"}, {"N"}}, 1);
  g.add_edge(0, 1, 1);
  g.set_node_features(Tensor(2, 3));
  g.set_link_features(0, {0.0});
  auto c = small_config(g, 4, 4);
  Rng rng(2);
  const auto p = init_params(c, rng);
  const auto s = init_state(c, p, g, Query::constant());
  for (auto v: s.memory.data())
    EXPECT_EQ(v, 0.0);
}

TEST(InitState, CellDependsOnlyOnOwnNode) {
  Rng rng(3);
  auto g = support::random_featured_graph(rng, 4, 4, 2);
  auto c = small_config(g);
  auto p = init_params(c, rng);
  p.at("embed.b").fill(0.3);
  const auto before = init_state(c, p, g, Query::constant());
  auto x = g.node_features();
  for (std::size_t k = 0; k < x.cols(); ++k)
    x(2, k) = rng.uniform(0.0, 2.0);
  g.set_node_features(x);
  const auto after = init_state(c, p, g, Query::constant());
  for (int i: {0, 1, 3})
    EXPECT_EQ(before.memory.col(i), after.memory.col(i));
}

TEST(InitState, QueryChangesInitialController) {
  Rng rng(4);
  auto g = support::random_featured_graph(rng, 3, 2, 1);
  auto c = small_config(g);
  c.query_dim = 3;
  const auto p = init_params(c, rng);
  const auto a = init_state(c, p, g, Query::one_hot(0, 3));
  const auto b = init_state(c, p, g, Query::one_hot(1, 3));
  EXPECT_NE(a.h, b.h);
  EXPECT_THROW(init_state(c, p, g, Query::constant(1)), DimensionError);
}

TEST(AttentiveRead, HandEvaluatedTwoCells) {
  ModelConfig c;
  c.input_dim = 2;
  c.memory_size = 2;
  c.controller_size = 2;
  Rng rng(0);
  auto p = init_params(c, rng);
  p.at("attn.W") = mat(2, 2, {1.0, 0.5, -0.3, 0.2});
  p.at("attn.U") = mat(2, 2, {0.1, 0.0, 0.0, 0.2});
  p.at("attn.b") = Tensor::column({0.0, 0.1});
  p.at("attn.v") = mat(1, 2, {1.0, -1.0});
  HopState s;
  s.memory = mat(2, 2, {0.5, -0.2, 0.1, 0.8});
  s.h = Tensor::column({0.3, 0.7});
  const auto r = attentive_read(c, p, s);
  EXPECT_NEAR(r.attention[0], 0.6495730012607487, 1e-14);
  EXPECT_NEAR(r.attention[1], 0.3504269987392514, 1e-14);
  EXPECT_NEAR(r.read[0], 0.25470110088252407, 1e-14);
  EXPECT_NEAR(r.read[1], 0.345298899117476, 1e-14);

  p.at("ctrl.W") = mat(2, 2, {0.2, -0.1, 0.4, 0.3});
  p.at("ctrl.U") = mat(2, 2, {0.5, 0.0, -0.6, 1.0});
  p.at("ctrl.b") = Tensor::column({0.05, -0.05});
  p.at("ctrl_gate.W") = mat(2, 2, {0.1, 0.2, 0.0, -0.3});
  p.at("ctrl_gate.U") = mat(2, 2, {0.3, 0.0, 0.2, 0.1});
  p.at("ctrl_gate.b") = Tensor::column({0.0, 0.5});
  const auto h = controller_step(c, p, s, r.read);
  EXPECT_NEAR(h[0], 0.2255448237446836, 1e-14);
  EXPECT_NEAR(h[1], 0.5651296307832838, 1e-14);
}

TEST(AttentiveRead, IdenticalCellsAndSingleCell) {
  ModelConfig c;
  c.input_dim = 3;
  c.memory_size = 3;
  c.controller_size = 2;
  Rng rng(5);
  const auto p = init_params(c, rng);
  HopState s;
  s.h = Tensor::column({0.4, -0.1});
  s.memory = Tensor(3, 4);
  for (std::size_t j = 0; j < 4; ++j) {
    s.memory(0, j) = 0.2;
    s.memory(1, j) = -1.0;
    s.memory(2, j) = 3.0;
  }
  const auto r = attentive_read(c, p, s);
  for (std::size_t j = 0; j < 4; ++j)
    EXPECT_NEAR(r.attention[j], 0.25, 1e-15);
  EXPECT_NEAR(r.read[2], 3.0, 1e-14);

  s.memory = Tensor::column({1.0, 2.0, 3.0});
  const auto one = attentive_read(c, p, s);
  EXPECT_EQ(one.attention[0], 1.0);
  EXPECT_EQ(one.read, s.memory);

  s.memory = Tensor(3, 0);
  EXPECT_THROW(attentive_read(c, p, s), DimensionError);
}

TEST(ControllerStep, GateLimits) {
  ModelConfig c;
  c.input_dim = 2;
  c.memory_size = 2;
  c.controller_size = 3;
  Rng rng(6);
  auto p = init_params(c, rng);
  HopState s;
  s.h = Tensor::column({0.3, -0.2, 0.9});
  const auto read = Tensor::column({0.5, 0.1});
  p.at("ctrl_gate.W").fill(0.0);
  p.at("ctrl_gate.U").fill(0.0);
  p.at("ctrl_gate.b").fill(-1000.0);
  EXPECT_EQ(controller_step(c, p, s, read), s.h);
  p.at("ctrl_gate.b").fill(1000.0);
  p.at("ctrl.W").fill(0.0);
  p.at("ctrl.U").fill(0.0);
  EXPECT_EQ(controller_step(c, p, s, read), Tensor(3, 1));
}

TEST(MemoryStep, IsolatedNodeBecomesReluBias) {
  mol::MolecularGraph g({{"C"}, {"C"}, {"O"}}, 1);
  g.add_edge(0, 1, 1);
  g = mol::featurize_synthetic(g, 4);
  auto c = small_config(g, 3, 2);
  Rng rng(7);
  auto p = init_params(c, rng);
  p.at("mem.W").fill(0.0);
  p.at("mem.U").fill(0.0);
  p.at("mem.b") = Tensor::column({0.5, -0.5, 0.0});
  p.at("mem_gate.W").fill(0.0);
  p.at("mem_gate.U").fill(0.0);
  p.at("mem_gate.V1").fill(0.0);
  p.at("mem_gate.b").fill(1000.0);
  auto s = init_state(c, p, g, Query::constant());
  const auto next = memory_step(c, p, g, s, s.h);
  EXPECT_EQ(next.col(2), Tensor::column({0.5, 0.0, 0.0}));
}

TEST(MemoryStep, ClosedGateKeepsMemory) {
  Rng rng(8);
  auto g = support::random_featured_graph(rng, 5, 6, 2);
  auto c = small_config(g);
  auto p = init_params(c, rng);
  p.at("mem_gate.b").fill(-1000.0);
  for (const char *k: {"mem_gate.W", "mem_gate.U", "mem_gate.V1", "mem_gate.V2"})
    p.at(k).fill(0.0);
  const auto s = init_state(c, p, g, Query::constant());
  EXPECT_EQ(memory_step(c, p, g, s, s.h), s.memory);
}

TEST(MemoryStep, ReducesToMeanMessagePassing) {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + static_cast<int>(rng.below(5));
    auto g = support::random_graph(rng, m, static_cast<int>(rng.below(8)), 1);
    g.set_node_features(Tensor(static_cast<std::size_t>(m), 3));
    auto x = g.node_features();
    for (auto &v: x.data())
      v = rng.uniform(0.0, 1.0);
    g.set_node_features(x);
    for (int e = 0; e < g.edge_count(); ++e)
      g.set_link_features(e, {0.0, 0.0});
    ModelConfig c = small_config(g, 3, 2);
    c.link_dim = g.edge_count() > 0 ? 2 : 0;
    c.embed = EmbedMode::kRaw;
    const auto p = mean_passing_params(c, rng);

    std::vector<std::vector<double>> cells(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < 3; ++k)
        cells[i].push_back(x(i, k));
    auto s = init_state(c, p, g, Query::constant());
    for (int t = 1; t <= 3; ++t) {
      s.memory = memory_step(c, p, g, s, s.h);
      const auto oracle = mean_passing(g, cells, t);
      for (int i = 0; i < m; ++i)
        for (int k = 0; k < 3; ++k)
          ASSERT_NEAR(s.memory(k, i), oracle[i][k], 1e-12);
    }
  }
}

TEST(MemoryStep, ReceptiveFieldIsGraphDistance) {
  Rng rng(10);
  // Path 0-1-2-3-4.
  mol::MolecularGraph g({{"C"}, {"N"}, {"O"}, {"S"}, {"C"}}, 1);
  for (int i = 0; i < 4; ++i)
    g.add_edge(i, i + 1, 1);
  g = mol::featurize_synthetic(g, 4);
  auto c = small_config(g, 4, 3);
  auto p = init_params(c, rng);
  p.at("mem.U").fill(0.0);
  for (const char *k: {"mem_gate.W", "mem_gate.U", "mem_gate.V1"})
    p.at(k).fill(0.0);
  p.at("mem_gate.b").fill(1000.0);
  p.at("embed.b").fill(0.2);
  p.at("mem.b").fill(0.1);

  auto perturbed = g;
  auto x = g.node_features();
  x(0, 0) += 0.7;
  x(0, 3) -= 0.4;
  perturbed.set_node_features(x);

  auto a = init_state(c, p, g, Query::constant());
  auto b = init_state(c, p, perturbed, Query::constant());
  for (int t = 1; t <= 4; ++t) {
    a.memory = memory_step(c, p, g, a, a.h);
    b.memory = memory_step(c, p, perturbed, b, b.h);
    for (int i = 0; i < 5; ++i) {
      const bool same = a.memory.col(i) == b.memory.col(i);
      if (i > t)
        EXPECT_TRUE(same) << "cell " << i << " hop " << t;
    }
    EXPECT_NE(a.memory.col(t), b.memory.col(t)) << "hop " << t;
  }
}

TEST(Forward, SingleCellAttentionIsOne) {
  mol::MolecularGraph g({{"C"}}, 2);
  g = mol::featurize_synthetic(g, 4);
  auto c = small_config(g);
  c.link_dim = 3;
  Rng rng(11);
  const auto p = init_params(c, rng);
  const auto r = forward(c, p, g, Query::constant(), 4, {}, true);
  ASSERT_EQ(r.trace.size(), 5u);
  for (std::size_t t = 1; t < r.trace.size(); ++t)
    EXPECT_EQ(r.trace[t].attention, Tensor(1, 1, 1.0));
}

TEST(Forward, FrozenRecurrenceUsesInitialController) {
  Rng rng(12);
  auto g = support::random_featured_graph(rng, 5, 5, 2);
  auto c = small_config(g);
  auto p = init_params(c, rng);
  for (const char *k: {"ctrl_gate.W", "ctrl_gate.U"})
    p.at(k).fill(0.0);
  p.at("ctrl_gate.b").fill(-1000.0);
  const auto s0 = init_state(c, p, g, Query::constant());
  double z = p.at("out.b")[0];
  for (std::size_t k = 0; k < s0.h.size(); ++k)
    z += p.at("out.w")[k] * s0.h[k];
  const double expected = 1.0 / (1.0 + std::exp(-z));
  for (int hops: {1, 3, 7})
    EXPECT_NEAR(forward(c, p, g, Query::constant(), hops).probability, expected, 1e-15);
}

TEST(Forward, DeterministicAndValidates) {
  Rng rng(13);
  auto g = support::random_featured_graph(rng, 6, 7, 3);
  auto c = small_config(g);
  const auto p = init_params(c, rng);
  const double a = forward(c, p, g, Query::constant(), 3).probability;
  EXPECT_EQ(a, forward(c, p, g, Query::constant(), 3).probability);
  EXPECT_THROW(forward(c, p, g, Query::constant(), 0), ConfigError);
}

TEST(Forward, AttentionNormalizedAndReadContained) {
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = support::random_featured_graph(rng, 2 + static_cast<int>(rng.below(8)),
                                            static_cast<int>(rng.below(12)), 3);
    auto c = small_config(g);
    c.link_dim = 4;
    c.relation_count = 3;
    const auto p = init_params(c, rng);
    const auto r = forward(c, p, g, Query::constant(), 3, {}, true);
    for (std::size_t t = 1; t < r.trace.size(); ++t) {
      double sum = 0.0;
      for (auto v: r.trace[t].attention.data())
        sum += v;
      EXPECT_NEAR(sum, 1.0, 1e-9);
      const auto &mem = r.trace[t - 1].memory;
      for (std::size_t k = 0; k < mem.rows(); ++k) {
        double lo = mem(k, 0), hi = mem(k, 0);
        for (std::size_t j = 1; j < mem.cols(); ++j) {
          lo = std::min(lo, mem(k, j));
          hi = std::max(hi, mem(k, j));
        }
        EXPECT_GE(r.trace[t].read[k], lo - 1e-12);
        EXPECT_LE(r.trace[t].read[k], hi + 1e-12);
      }
    }
  }
}

TEST(Forward, PermutationEquivariant) {
  Rng rng(15);
  for (auto nw: {NeighborWeights::kUniform, NeighborWeights::kLearned}) {
    for (int trial = 0; trial < 10; ++trial) {
      const int m = 2 + static_cast<int>(rng.below(8));
      auto g = support::random_featured_graph(rng, m, static_cast<int>(rng.below(12)), 3);
      auto c = small_config(g);
      c.link_dim = 4;
      c.relation_count = 3;
      c.neighbor_weights = nw;
      const auto p = init_params(c, rng);
      const auto perm = support::random_permutation(rng, m);
      const auto h = mol::permute_nodes(g, perm);
      const auto a = forward(c, p, g, Query::constant(), 3, {}, true);
      const auto b = forward(c, p, h, Query::constant(), 3, {}, true);
      EXPECT_NEAR(a.probability, b.probability, 1e-9);
      for (std::size_t t = 0; t < a.trace.size(); ++t) {
        for (std::size_t k = 0; k < a.trace[t].h.size(); ++k)
          EXPECT_NEAR(a.trace[t].h[k], b.trace[t].h[k], 1e-9);
        for (int i = 0; i < m; ++i)
          for (std::size_t k = 0; k < a.trace[t].memory.rows(); ++k)
            EXPECT_NEAR(a.trace[t].memory(k, i), b.trace[t].memory(k, perm[i]), 1e-9);
      }
    }
  }
}

TEST(Gradients, MatchFiniteDifferences) {
  Rng rng(16);
  for (auto embed: {EmbedMode::kLearned, EmbedMode::kRaw}) {
    for (auto nw: {NeighborWeights::kUniform, NeighborWeights::kLearned}) {
      auto g = support::random_featured_graph(rng, 5, 6, 2);
      auto c = small_config(g, 4, 3);
      c.link_dim = 3;
      c.embed = embed;
      c.neighbor_weights = nw;
      c.query_dim = 2;
      auto p = init_params(c, rng);
      for (auto &[name, t]: p)
        for (auto &v: t.data())
          if (v == 0.0)
            v = rng.uniform(-0.5, 0.5);
      const auto q = Query::one_hot(1, 2);
      const auto exact = loss_and_gradients(c, p, g, q, 1, 3).gradients;
      const auto fd = num::finite_difference_gradient(
          [&](const num::ParamSet &pp) { return loss_value(c, pp, g, q, 1, 3); }, p, 1e-5);
      EXPECT_LT(num::max_relative_error(exact, fd), 1e-6);
    }
  }
}

TEST(Dropout, OnlyWhenTraining) {
  Rng rng(17);
  auto g = support::random_featured_graph(rng, 6, 6, 2);
  auto c = small_config(g, 16, 16);
  const auto p = init_params(c, rng);
  Rng d1(3), d2(3);
  const double eval = forward(c, p, g, Query::constant(), 2, {false, 0.5, &d1}).probability;
  EXPECT_EQ(eval, forward(c, p, g, Query::constant(), 2).probability);
  const double a = forward(c, p, g, Query::constant(), 2, {true, 0.5, &d1}).probability;
  const double b = forward(c, p, g, Query::constant(), 2, {true, 0.5, &d2}).probability;
  EXPECT_NE(a, eval);
  Rng d3(3);
  EXPECT_EQ(forward(c, p, g, Query::constant(), 2, {true, 0.5, &d3}).probability, b);
  EXPECT_THROW(forward(c, p, g, Query::constant(), 2, {true, 0.5, nullptr}), ConfigError);
}

TEST(ModelConfig, RawEmbeddingNeedsMatchingWidth) {
  ModelConfig c;
  c.input_dim = 5;
  c.memory_size = 4;
  c.embed = EmbedMode::kRaw;
  EXPECT_THROW(c.validate(), ConfigError);
  c.memory_size = 5;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(ModelConfig::from_metadata(c.to_metadata()), c);
}
