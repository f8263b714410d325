#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "experiment/data.hpp"
#include "training/metrics.hpp"

namespace graphmem::exp {

using Logger = std::function<void(const std::string &)>;

nlohmann::json report_to_json(const train::MetricsReport &report);

struct TaskSplits {
  LoadedTask task;
  train::Dataset data; // task ids as in the roster
};

// Loads the named tasks (the whole roster when `only` is empty) and splits
// every task with its own derived seed, so a task's split does not depend on
// the roster. Each result holds a one-task dataset with task id 0.
std::vector<TaskSplits> prepare(const Settings &settings,
                                const std::vector<std::string> &only);

// Concatenation with task ids renumbered by position.
train::Dataset merge(const std::vector<TaskSplits> &tasks);

struct TrainOutcome {
  nlohmann::json metrics;
  nlohmann::json manifest;
};

// Writes model checkpoints, metrics.json, train.log and manifest.json into
// out_dir. Single mode trains one constant-query model per task; multi mode
// trains one model with one-hot task queries.
TrainOutcome run_train(const Settings &settings, const std::string &out_dir,
                       const std::string &only_task, const Logger &log);

// Re-runs the training described by a manifest after checking that every
// dataset file still has its recorded checksum.
TrainOutcome rerun_manifest(const std::string &manifest_path,
                            const std::string &out_dir, const Logger &log);

// Metrics of a checkpoint on split "train", "valid" or "test".
nlohmann::json run_eval(const Settings &settings, const std::string &checkpoint,
                        const std::string &split);

// One JSON object per line: {"id", "task", "hops": [[p_1 ... p_M] per hop],
// "probability"}.
void run_dump_attention(const Settings &settings, const std::string &checkpoint,
                        const std::string &split, const std::string &out_path);

// CSV "id,hex" for every record of an SDF file.
void run_fingerprint(const std::string &sdf_path,
                     const mol::ElementVocabulary &vocab, int radius, int bits,
                     const std::string &out_path);

struct GradcheckResult {
  double max_error = 0.0;
  std::vector<double> per_graph;
  bool passed = false;
};

// Exact vs central-difference gradients on random synthetic graphs (at most
// 8 nodes, 3 relations, 3 hops, hidden size 8, dropout off), in both
// neighbor-weight modes.
GradcheckResult run_gradcheck(std::uint64_t seed, int graphs, double eps,
                              double threshold);

// molecules.sdf and labels.csv for a synthetic spec.
void run_synth(const std::string &spec_path, std::uint64_t seed,
               const std::string &out_dir);

} // namespace graphmem::exp
