#include "training/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "common/error.hpp"

namespace graphmem::train {

double f1_from_counts(long long tp, long long fp, long long fn) {
  const long long denom = 2 * tp + fp + fn;
  if (denom == 0)
    return 0.0;
  return static_cast<double>(2 * tp) / static_cast<double>(denom);
}

std::optional<double> rank_auc(std::span<const double> scores,
                               std::span<const int> labels) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the number of correctly ordered pairs, so ties stay integral.
  std::uint64_t twice_correct = 0;
  std::uint64_t negatives_below = 0, positives = 0, negatives = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    std::uint64_t pos = 0, neg = 0;
    while (end < n && scores[order[end]] == scores[order[start]]) {
      (labels[order[end]] == 1 ? pos : neg)++;
      ++end;
    }
    twice_correct += 2 * pos * negatives_below + pos * neg;
    negatives_below += neg;
    positives += pos;
    negatives += neg;
    start = end;
  }
  if (positives == 0 || negatives == 0)
    return std::nullopt;
  return static_cast<double>(twice_correct)
       / static_cast<double>(2 * positives * negatives);
}

MetricsReport compute_metrics(std::span<const double> scores,
                              std::span<const int> labels,
                              std::span<const int> task_ids, int task_count,
                              const std::vector<std::string> &task_names) {
  if (scores.size() != labels.size() || scores.size() != task_ids.size())
    throw DataError("metrics: scores, labels and task ids differ in length");

  std::vector<std::vector<std::size_t>> members(
      static_cast<std::size_t>(task_count));
  for (std::size_t i = 0; i < task_ids.size(); ++i) {
    if (task_ids[i] < 0 || task_ids[i] >= task_count)
      throw DataError("metrics: task id " + std::to_string(task_ids[i])
                      + " outside [0, " + std::to_string(task_count) + ")");
    members[static_cast<std::size_t>(task_ids[i])].push_back(i);
  }

  MetricsReport report;
  long long tp = 0, fp = 0, fn = 0;
  double f1_sum = 0.0, auc_sum = 0.0;
  int auc_count = 0;
  for (int t = 0; t < task_count; ++t) {
    const auto &idx = members[static_cast<std::size_t>(t)];
    TaskMetrics tm;
    tm.name = t < static_cast<int>(task_names.size()) ? task_names[t]
                                                      : "task" + std::to_string(t);
    if (idx.empty())
      throw DataError("metrics: task '" + tm.name + "' has no examples");
    std::vector<double> s;
    std::vector<int> y;
    for (auto i: idx) {
      const bool predicted = scores[i] >= kDecisionThreshold;
      const bool actual = labels[i] == 1;
      if (predicted && actual)
        ++tm.tp;
      else if (predicted)
        ++tm.fp;
      else if (actual)
        ++tm.fn;
      else
        ++tm.tn;
      s.push_back(scores[i]);
      y.push_back(labels[i]);
    }
    tm.examples = static_cast<long long>(idx.size());
    tm.f1 = f1_from_counts(tm.tp, tm.fp, tm.fn);
    tm.accuracy = static_cast<double>(tm.tp + tm.tn)
                / static_cast<double>(tm.examples);
    tm.auc = rank_auc(s, y);
    if (tm.auc) {
      auc_sum += *tm.auc;
      ++auc_count;
    } else {
      report.warnings.push_back("task '" + tm.name
                                + "': only one class present, AUC undefined "
                                  "and excluded from the average");
    }
    tp += tm.tp;
    fp += tm.fp;
    fn += tm.fn;
    f1_sum += tm.f1;
    report.tasks.push_back(std::move(tm));
  }
  report.micro_f1 = f1_from_counts(tp, fp, fn);
  report.macro_f1 = task_count > 0 ? f1_sum / task_count : 0.0;
  if (auc_count > 0)
    report.average_auc = auc_sum / auc_count;
  return report;
}

} // namespace graphmem::train
