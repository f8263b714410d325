#include "training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "common/error.hpp"
#include "common/fnv.hpp"

namespace graphmem::train {

void TrainConfig::validate() const {
  if (hops < 1)
    throw ConfigError("hops must be >= 1, got " + std::to_string(hops));
  if (memory_size < 1 || controller_size < 1)
    throw ConfigError("memory_size and controller_size must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw ConfigError("dropout must be in [0, 1), got " + std::to_string(dropout));
  if (!(adam.step_size > 0.0) || !std::isfinite(adam.step_size))
    throw ConfigError("lr must be positive");
  if (batch_size < 1)
    throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1)
    throw ConfigError("max_epochs must be >= 1");
  if (patience < 1)
    throw ConfigError("patience must be >= 1");
  if (workers < 1)
    throw ConfigError("workers must be >= 1");
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)> &fn) {
  const std::size_t threads = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads)
          fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto &t: pool)
    t.join();
  for (auto &e: errors)
    if (e)
      std::rethrow_exception(e);
}

void split_examples(const std::vector<mol::LabeledExample> &examples,
                    int task_count, std::uint64_t seed, Dataset &out) {
  std::vector<std::vector<std::size_t>> by_task(
      static_cast<std::size_t>(task_count));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const int t = examples[i].task_id;
    if (t < 0 || t >= task_count)
      throw DataError("example '" + examples[i].id + "' has task id "
                      + std::to_string(t) + " outside the task list");
    by_task[static_cast<std::size_t>(t)].push_back(i);
  }
  Rng rng(seed);
  for (auto &idx: by_task) {
    rng.shuffle(idx);
    const std::size_t n = idx.size();
    std::size_t n_valid = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));
    std::size_t n_test = n_valid;
    if (n >= 3) {
      n_valid = std::max<std::size_t>(1, n_valid);
      n_test = std::max<std::size_t>(1, n_test);
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto &ex = examples[idx[k]];
      if (k < n_valid)
        out.valid.push_back(ex);
      else if (k < n_valid + n_test)
        out.test.push_back(ex);
      else
        out.train.push_back(ex);
    }
  }
}

std::vector<std::pair<int, std::size_t>>
interleaved_order(const std::vector<std::size_t> &task_sizes, Rng &rng) {
  std::vector<std::vector<std::size_t>> queues;
  std::size_t remaining = 0;
  for (auto n: task_sizes) {
    std::vector<std::size_t> q(n);
    for (std::size_t i = 0; i < n; ++i)
      q[i] = i;
    rng.shuffle(q);
    queues.push_back(std::move(q));
    remaining += n;
  }
  std::vector<std::size_t> cursor(task_sizes.size(), 0);
  std::vector<std::pair<int, std::size_t>> order;
  order.reserve(remaining);
  while (remaining > 0) {
    std::uint64_t pick = rng.below(remaining);
    std::size_t t = 0;
    for (;; ++t) {
      const std::size_t left = queues[t].size() - cursor[t];
      if (pick < left)
        break;
      pick -= left;
    }
    order.emplace_back(static_cast<int>(t), queues[t][cursor[t]++]);
    --remaining;
  }
  return order;
}

model::ModelConfig infer_model_config(const Dataset &data,
                                      const TrainConfig &config) {
  if (data.train.empty())
    throw DataError("training set is empty");
  model::ModelConfig mc;
  mc.input_dim = -1;
  mc.relation_count = 1;
  auto scan = [&](const std::vector<mol::LabeledExample> &xs) {
    for (const auto &ex: xs) {
      const auto &g = *ex.graph;
      if (mc.input_dim < 0)
        mc.input_dim = g.feature_dim();
      else if (g.feature_dim() != mc.input_dim)
        throw DataError("example '" + ex.id + "' has feature width "
                        + std::to_string(g.feature_dim()) + ", expected "
                        + std::to_string(mc.input_dim));
      if (g.edge_count() > 0) {
        if (mc.link_dim == 0)
          mc.link_dim = g.link_dim();
        else if (g.link_dim() != mc.link_dim)
          throw DataError("example '" + ex.id + "' has link feature width "
                          + std::to_string(g.link_dim()) + ", expected "
                          + std::to_string(mc.link_dim));
      }
      mc.relation_count = std::max(mc.relation_count, g.relation_count());
    }
  };
  scan(data.train);
  scan(data.valid);
  scan(data.test);
  mc.query_dim = config.query == QueryMode::kOneHot ? data.task_count() : 1;
  mc.memory_size = config.memory_size;
  mc.controller_size = config.controller_size;
  mc.embed = config.embed;
  mc.neighbor_weights = config.neighbor_weights;
  mc.validate();
  return mc;
}

model::Query query_for(const mol::LabeledExample &ex, QueryMode mode,
                       int task_count) {
  return mode == QueryMode::kOneHot ? model::Query::one_hot(ex.task_id, task_count)
                                    : model::Query::constant(1);
}

std::vector<double> predict(const model::ModelConfig &mc,
                            const num::ParamSet &params,
                            std::span<const mol::LabeledExample> examples,
                            QueryMode mode, int hops, int workers) {
  std::vector<double> out(examples.size());
  parallel_for(examples.size(), workers, [&](std::size_t i) {
    const auto q = query_for(examples[i], mode, mc.query_dim);
    out[i] = model::forward(mc, params, *examples[i].graph, q, hops).probability;
  });
  return out;
}

MetricsReport evaluate(const model::ModelConfig &mc,
                       const num::ParamSet &params,
                       std::span<const mol::LabeledExample> examples,
                       const std::vector<std::string> &task_names,
                       QueryMode mode, int hops, int workers) {
  const auto scores = predict(mc, params, examples, mode, hops, workers);
  std::vector<int> labels, tasks;
  for (const auto &ex: examples) {
    labels.push_back(ex.label);
    tasks.push_back(ex.task_id);
  }
  return compute_metrics(scores, labels, tasks,
                         static_cast<int>(task_names.size()), task_names);
}

double selection_score(const MetricsReport &report) {
  return report.average_auc ? *report.average_auc : report.micro_f1;
}

namespace {

std::uint64_t example_seed(std::uint64_t seed, int epoch, std::size_t position) {
  Fnv1a64 h;
  h.update_u64(seed);
  h.update_u64(static_cast<std::uint64_t>(epoch));
  h.update_u64(position);
  return h.digest();
}

} // namespace

TrainResult train(const Dataset &data, const TrainConfig &config,
                  const EpochCallback &on_epoch) {
  config.validate();
  if (data.task_count() < 1)
    throw ConfigError("no tasks configured");

  for (const auto *split: {&data.train, &data.valid, &data.test})
    for (const auto &ex: *split)
      if (ex.task_id < 0 || ex.task_id >= data.task_count())
        throw DataError("example '" + ex.id + "' has task id "
                        + std::to_string(ex.task_id) + " outside the roster of "
                        + std::to_string(data.task_count()) + " tasks");

  TrainResult result;
  result.model = infer_model_config(data, config);
  Rng rng(config.seed);
  Rng init_rng = rng.fork();
  num::ParamSet params = model::init_params(result.model, init_rng);
  AdamState state = AdamState::zeros_like(params);

  std::vector<std::vector<std::size_t>> by_task(
      static_cast<std::size_t>(data.task_count()));
  for (std::size_t i = 0; i < data.train.size(); ++i)
    by_task.at(static_cast<std::size_t>(data.train[i].task_id)).push_back(i);
  std::vector<std::size_t> sizes;
  for (const auto &b: by_task)
    sizes.push_back(b.size());

  const auto &selection = data.valid.empty() ? data.train : data.valid;
  result.best_score = -1.0;
  result.params = params;
  int bad_epochs = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<std::size_t> order;
    order.reserve(data.train.size());
    for (const auto &[t, k]: interleaved_order(sizes, rng))
      order.push_back(by_task[static_cast<std::size_t>(t)][k]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    const std::size_t bs = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::vector<model::LossAndGradients> parts(end - start);
      parallel_for(end - start, config.workers, [&](std::size_t b) {
        const auto &ex = data.train[order[start + b]];
        Rng local(example_seed(config.seed, epoch, start + b));
        model::PassOptions opts{true, config.dropout, &local};
        parts[b] = model::loss_and_gradients(
            result.model, params, *ex.graph,
            query_for(ex, config.query, result.model.query_dim), ex.label,
            config.hops, opts);
      });
      num::ParamSet grads = params.zeros_like();
      for (std::size_t b = 0; b < parts.size(); ++b) {
        const auto &ex = data.train[order[start + b]];
        if (!std::isfinite(parts[b].loss))
          throw NumericError("non-finite loss on example '" + ex.id
                             + "' at epoch " + std::to_string(epoch));
        loss_sum += parts[b].loss;
        if ((parts[b].probability >= kDecisionThreshold) == (ex.label == 1))
          ++correct;
        grads.add_inplace(parts[b].gradients);
      }
      grads.scale_inplace(1.0 / static_cast<double>(parts.size()));
      adam_step(params, grads, state, config.adam);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.train_accuracy = static_cast<double>(correct)
                       / static_cast<double>(order.size());
    rec.valid = evaluate(result.model, params, selection, data.task_names,
                         config.query, config.hops, config.workers);
    rec.score = selection_score(rec.valid);
    rec.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - started).count();
    result.history.push_back(rec);
    result.epochs_run = epoch;

    if (rec.score > result.best_score) {
      result.best_score = rec.score;
      result.best_epoch = epoch;
      result.params = params;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
    }
    const bool keep_going = on_epoch ? on_epoch(rec) : true;
    if (!keep_going || bad_epochs >= config.patience)
      break;
  }
  return result;
}

} // namespace graphmem::train
