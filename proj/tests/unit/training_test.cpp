#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "oracles.hpp"
#include "molgraph/synthetic.hpp"
#include "training/metrics.hpp"
#include "training/optimizer.hpp"
#include "training/trainer.hpp"

using namespace graphmem;
using namespace graphmem::train;
using support::pairwise_auc;

namespace {

std::vector<mol::LabeledExample> synthetic(int count, std::uint64_t seed, int task = 0) {
  mol::SyntheticSpec s;
  s.motif = mol::Motif::parse("triangle:2");
  s.count = count;
  s.nodes_min = 5;
  s.nodes_max = 9;
  return mol::generate_synthetic(s, seed, task);
}

} // namespace

TEST(CrossEntropy, ClosedForms) {
  EXPECT_NEAR(cross_entropy(0.5, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(cross_entropy(1.0 - 1e-12, 1), 1e-12, 1e-15);
  EXPECT_NEAR(cross_entropy(0.9, 0), -std::log(0.1), 1e-12);
  EXPECT_NEAR(cross_entropy(0.0, 1), -std::log(1e-12), 1e-9);
  EXPECT_TRUE(std::isfinite(cross_entropy(1.0, 0)));
}

TEST(Adam, ZeroGradientLeavesParameters) {
  num::ParamSet p;
  p.add("w", num::Tensor::column({1.0, -2.0}));
  auto st = AdamState::zeros_like(p);
  const auto before = p;
  adam_step(p, p.zeros_like(), st, {});
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepIsSignTimesStep) {
  num::ParamSet p, g;
  p.add("w", num::Tensor::column({1.0, 1.0, 1.0}));
  g.add("w", num::Tensor::column({0.5, -3.0, 0.5}));
  auto st = AdamState::zeros_like(p);
  AdamConfig cfg;
  adam_step(p, g, st, cfg);
  EXPECT_NEAR(p.at("w")[0], 1.0 - 1e-3, 1e-10);
  EXPECT_NEAR(p.at("w")[1], 1.0 + 1e-3, 1e-10);
  EXPECT_EQ(p.at("w")[0], p.at("w")[2]);
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  num::ParamSet p, g;
  p.add("a", num::Tensor(1, 1, 0.0));
  p.add("attn.v", num::Tensor(1, 2, 0.0));
  g.add("a", num::Tensor(1, 1, 0.0));
  g.add("attn.v", num::Tensor(1, 2, 0.0));
  g.at("attn.v")[1] = std::nan("");
  auto st = AdamState::zeros_like(p);
  const auto before = p;
  try {
    adam_step(p, g, st, {});
    FAIL();
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("attn.v"), std::string::npos);
  }
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.step, 0);
}

TEST(Metrics, DocumentedExamples) {
  const std::vector<double> s{0.9, 0.8, 0.3};
  const std::vector<int> y{1, 0, 1};
  EXPECT_EQ(*rank_auc(s, y), 0.5);

  const std::vector<double> perfect{0.9, 0.1, 0.8, 0.2};
  const std::vector<int> py{1, 0, 1, 0}, tasks{0, 0, 1, 1};
  const auto r = compute_metrics(perfect, py, tasks, 2);
  EXPECT_EQ(r.micro_f1, 1.0);
  EXPECT_EQ(r.macro_f1, 1.0);
  EXPECT_EQ(*r.average_auc, 1.0);
}

TEST(Metrics, MacroIsMeanOfTaskF1) {
  // Task 0: F1 = 0.2 (TP 1, FP 8, FN 0); task 1: F1 = 0.8 (TP 2, FP 1, FN 0).
  std::vector<double> s;
  std::vector<int> y, t;
  s.push_back(0.9), y.push_back(1), t.push_back(0);
  for (int i = 0; i < 8; ++i)
    s.push_back(0.7), y.push_back(0), t.push_back(0);
  for (int i = 0; i < 2; ++i)
    s.push_back(0.9), y.push_back(1), t.push_back(1);
  s.push_back(0.6), y.push_back(0), t.push_back(1);
  const auto r = compute_metrics(s, y, t, 2);
  EXPECT_NEAR(r.tasks[0].f1, 0.2, 1e-15);
  EXPECT_NEAR(r.tasks[1].f1, 0.8, 1e-15);
  EXPECT_NEAR(r.macro_f1, 0.5, 1e-15);
}

TEST(Metrics, SingleClassTaskHasNoAuc) {
  const std::vector<double> s{0.9, 0.2, 0.7};
  const std::vector<int> y{1, 1, 0}, t{0, 1, 1};
  const auto r = compute_metrics(s, y, t, 2, {"a", "b"});
  EXPECT_FALSE(r.tasks[0].auc.has_value());
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("'a'"), std::string::npos);
  EXPECT_EQ(*r.average_auc, *r.tasks[1].auc);
}

TEST(Metrics, Errors) {
  const std::vector<double> s{0.5};
  const std::vector<int> y{1}, t{0}, bad{3};
  EXPECT_THROW(compute_metrics(s, y, t, 2), DataError);
  EXPECT_THROW(compute_metrics(s, y, bad, 2), DataError);
}

TEST(Metrics, MatchBruteForceOracle) {
  Rng rng(41);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(11)) / 10.0;
      y[i] = static_cast<int>(rng.below(2));
    }
    std::vector<int> t(n, 0);
    const auto r = compute_metrics(s, y, t, 1);
    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tp += s[i] >= 0.5 && y[i] == 1;
      fp += s[i] >= 0.5 && y[i] == 0;
      fn += s[i] < 0.5 && y[i] == 1;
    }
    const double f1 = 2 * tp + fp + fn == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
    ASSERT_EQ(r.micro_f1, f1);
    ASSERT_EQ(r.tasks[0].auc, pairwise_auc(s, y));
  }
}

TEST(Sampler, CoversEveryTaskExactlyOnce) {
  Rng rng(5);
  const std::vector<std::size_t> sizes{7, 0, 13, 4};
  const auto order = interleaved_order(sizes, rng);
  EXPECT_EQ(order.size(), 24u);
  std::vector<std::set<std::size_t>> seen(4);
  for (auto [t, i]: order) {
    ASSERT_LT(i, sizes[t]);
    EXPECT_TRUE(seen[t].insert(i).second);
  }
  for (std::size_t t = 0; t < 4; ++t)
    EXPECT_EQ(seen[t].size(), sizes[t]);
}

TEST(Split, EightyTenTenPerTask) {
  auto xs = synthetic(100, 1, 0);
  auto more = synthetic(30, 2, 1);
  xs.insert(xs.end(), more.begin(), more.end());
  Dataset d;
  split_examples(xs, 2, 9, d);
  EXPECT_EQ(d.train.size() + d.valid.size() + d.test.size(), 130u);
  EXPECT_EQ(d.valid.size(), 13u);
  EXPECT_EQ(d.test.size(), 13u);
  Dataset again;
  split_examples(xs, 2, 9, again);
  for (std::size_t i = 0; i < d.test.size(); ++i)
    EXPECT_EQ(d.test[i].id, again.test[i].id);
  EXPECT_THROW(split_examples(xs, 1, 9, again), DataError);
}

TEST(Train, OverfitsSmallSetAndLossFalls) {
  Dataset d;
  d.task_names = {"t"};
  d.train = synthetic(50, 3);
  d.valid = d.train;
  TrainConfig c;
  c.hops = 3;
  c.memory_size = 16;
  c.controller_size = 16;
  c.max_epochs = 500;
  c.patience = 500;
  c.batch_size = 10;
  c.adam.step_size = 3e-3;
  c.query = QueryMode::kConstant;
  std::vector<double> losses;
  double best_acc = 0.0;
  train::train(d, c, [&](const EpochRecord &r) {
    losses.push_back(r.train_loss);
    best_acc = std::max(best_acc, r.train_accuracy);
    return best_acc < 0.98;
  });
  EXPECT_GE(best_acc, 0.98);
  ASSERT_GE(losses.size(), 10u);
  int non_improving = 0;
  double best = losses[0];
  for (std::size_t e = 1; e < 10; ++e) {
    if (losses[e] >= best)
      ++non_improving;
    best = std::min(best, losses[e]);
  }
  EXPECT_LE(non_improving, 3);
}

TEST(Train, DeterministicAcrossRunsAndWorkers) {
  Dataset d;
  d.task_names = {"a", "b"};
  d.train = synthetic(40, 4, 0);
  auto b = synthetic(40, 5, 1);
  d.train.insert(d.train.end(), b.begin(), b.end());
  d.valid = synthetic(20, 6, 0);
  auto vb = synthetic(20, 7, 1);
  d.valid.insert(d.valid.end(), vb.begin(), vb.end());
  TrainConfig c;
  c.hops = 2;
  c.memory_size = 8;
  c.controller_size = 8;
  c.max_epochs = 3;
  c.dropout = 0.2;
  const auto r1 = train::train(d, c);
  const auto r2 = train::train(d, c);
  c.workers = 3;
  const auto r3 = train::train(d, c);
  EXPECT_EQ(r1.params, r2.params);
  EXPECT_EQ(r1.params, r3.params);
  EXPECT_EQ(r1.history.back().train_loss, r3.history.back().train_loss);
}

TEST(Train, EarlyStoppingKeepsBestScore) {
  Dataset d;
  d.task_names = {"t"};
  d.train = synthetic(60, 8);
  d.valid = synthetic(30, 9);
  TrainConfig c;
  c.hops = 2;
  c.memory_size = 8;
  c.controller_size = 8;
  c.max_epochs = 30;
  c.patience = 3;
  c.adam.step_size = 1e-2;
  const auto r = train::train(d, c);
  double best_seen = -1.0;
  for (const auto &h: r.history)
    best_seen = std::max(best_seen, h.score);
  EXPECT_EQ(r.best_score, best_seen);
  EXPECT_EQ(r.history[static_cast<std::size_t>(r.best_epoch - 1)].score, best_seen);
  const auto re = evaluate(r.model, r.params, d.valid, d.task_names, c.query, c.hops);
  EXPECT_EQ(selection_score(re), r.best_score);
  EXPECT_LE(r.epochs_run - r.best_epoch, c.patience);
}

TEST(Train, RejectsBadInput) {
  Dataset d;
  d.task_names = {"t"};
  TrainConfig c;
  EXPECT_THROW(train::train(d, c), DataError);
  d.train = synthetic(10, 1);
  d.train[0].task_id = 4;
  c.query = QueryMode::kOneHot;
  EXPECT_THROW(train::train(d, c), DataError);
  c.hops = 0;
  EXPECT_THROW(train::train(d, c), ConfigError);
  c.hops = 1;
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}
