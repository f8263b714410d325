#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "graphmem/model.hpp"
#include "molgraph/graph.hpp"
#include "numerics/params.hpp"
#include "training/metrics.hpp"
#include "training/optimizer.hpp"

namespace graphmem::train {

enum class QueryMode {
  kConstant, // every example sees the same all-ones query
  kOneHot,   // query selects the example's task
};

struct TrainConfig {
  int hops = 10;
  int memory_size = 32;
  int controller_size = 32;
  double dropout = 0.0;
  AdamConfig adam;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 1;
  int workers = 1;
  QueryMode query = QueryMode::kOneHot;
  model::EmbedMode embed = model::EmbedMode::kLearned;
  model::NeighborWeights neighbor_weights = model::NeighborWeights::kUniform;

  void validate() const;
};

struct Dataset {
  std::vector<std::string> task_names;
  std::vector<mol::LabeledExample> train, valid, test;

  int task_count() const { return static_cast<int>(task_names.size()); }
};

// Seeded 80/10/10 split done independently per task. Tasks with at least
// three examples get at least one validation and one test example.
void split_examples(const std::vector<mol::LabeledExample> &examples,
                    int task_count, std::uint64_t seed, Dataset &out);

// Training order for one epoch: each task's examples are shuffled, then the
// next task is drawn with probability proportional to its remaining count.
// Returns indices into the per-task lists as (task, position) pairs.
std::vector<std::pair<int, std::size_t>>
interleaved_order(const std::vector<std::size_t> &task_sizes, Rng &rng);

model::ModelConfig infer_model_config(const Dataset &data,
                                      const TrainConfig &config);

model::Query query_for(const mol::LabeledExample &ex, QueryMode mode,
                       int task_count);

// Dropout-free probabilities, in input order.
std::vector<double> predict(const model::ModelConfig &mc,
                            const num::ParamSet &params,
                            std::span<const mol::LabeledExample> examples,
                            QueryMode mode, int hops, int workers = 1);

MetricsReport evaluate(const model::ModelConfig &mc,
                       const num::ParamSet &params,
                       std::span<const mol::LabeledExample> examples,
                       const std::vector<std::string> &task_names,
                       QueryMode mode, int hops, int workers = 1);

// Validation average AUC when defined, otherwise micro F1.
double selection_score(const MetricsReport &report);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  MetricsReport valid;
  double score = 0.0;
  double seconds = 0.0;
};

// Return false to stop after this epoch.
using EpochCallback = std::function<bool(const EpochRecord &)>;

struct TrainResult {
  model::ModelConfig model;
  num::ParamSet params; // best validation score seen
  int best_epoch = 0;
  double best_score = 0.0;
  int epochs_run = 0;
  std::vector<EpochRecord> history;
};

// Mini-batch Adam on mean cross-entropy with early stopping. Per-example
// gradients are computed on `workers` threads and summed in a fixed order,
// so results do not depend on the worker count. Throws NumericError when
// the loss or a gradient becomes non-finite.
TrainResult train(const Dataset &data, const TrainConfig &config,
                  const EpochCallback &on_epoch = {});

// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)> &fn);

} // namespace graphmem::train
