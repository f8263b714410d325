#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace graphmem::train {

struct TaskMetrics {
  std::string name;
  long long examples = 0;
  long long tp = 0, fp = 0, fn = 0, tn = 0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::optional<double> auc; // absent when only one class is present
};

struct MetricsReport {
  std::vector<TaskMetrics> tasks;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::optional<double> average_auc;
  std::vector<std::string> warnings;
};

inline constexpr double kDecisionThreshold = 0.5;

// 2 TP / (2 TP + FP + FN); 0 when the denominator vanishes.
double f1_from_counts(long long tp, long long fp, long long fn);

// Rank statistic: fraction of (positive, negative) pairs ordered correctly,
// ties counted one half. Absent when either class is missing.
std::optional<double> rank_auc(std::span<const double> scores,
                               std::span<const int> labels);

// Positive class is label 1, predicted when score >= 0.5. Micro F1 pools
// TP/FP/FN over all tasks; macro F1 is the mean of per-task F1; average AUC
// is the mean over tasks whose AUC is defined. Throws DataError when a task
// in [0, task_count) has no examples.
MetricsReport compute_metrics(std::span<const double> scores,
                              std::span<const int> labels,
                              std::span<const int> task_ids, int task_count,
                              const std::vector<std::string> &task_names = {});

} // namespace graphmem::train
