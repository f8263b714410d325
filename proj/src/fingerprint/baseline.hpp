#pragma once

#include <cstdint>
#include <vector>

#include "fingerprint/fingerprint.hpp"
#include "training/optimizer.hpp"

namespace graphmem::fp {

struct LogisticConfig {
  train::AdamConfig adam{0.01};
  double l2 = 1e-3;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 1;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  double predict(const Fingerprint &fp) const;
};

// L2-regularized logistic regression on fingerprint bits, trained with Adam
// on mini-batches. Throws DataError on an empty or inconsistent training set.
LogisticModel train_logistic_baseline(const std::vector<Fingerprint> &inputs,
                                      const std::vector<int> &labels,
                                      const LogisticConfig &config = {});

} // namespace graphmem::fp
