#include "fingerprint/baseline.hpp"

#include <algorithm>
#include <numeric>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "numerics/ops.hpp"

namespace graphmem::fp {

double LogisticModel::predict(const Fingerprint &fp) const {
  if (fp.bits.size() != weights.size())
    throw DataError("baseline: fingerprint has " + std::to_string(fp.bits.size())
                    + " bits, model expects " + std::to_string(weights.size()));
  double z = bias;
  for (std::size_t k = 0; k < weights.size(); ++k)
    if (fp.bits[k])
      z += weights[k];
  return num::sigmoid(z);
}

LogisticModel train_logistic_baseline(const std::vector<Fingerprint> &inputs,
                                      const std::vector<int> &labels,
                                      const LogisticConfig &config) {
  if (inputs.empty())
    throw DataError("baseline: empty training set");
  if (inputs.size() != labels.size())
    throw DataError("baseline: inputs and labels differ in length");
  if (config.batch_size < 1 || config.epochs < 0)
    throw ConfigError("baseline: batch_size must be >= 1 and epochs >= 0");
  const std::size_t nbits = inputs.front().bits.size();
  for (const auto &fp: inputs)
    if (fp.bits.size() != nbits)
      throw DataError("baseline: fingerprints differ in length");

  num::ParamSet params;
  params.add("w", num::Tensor(1, nbits, 0.0));
  params.add("b", num::Tensor(1, 1, 0.0));
  auto state = train::AdamState::zeros_like(params);
  LogisticModel model{std::vector<double>(nbits, 0.0), 0.0};

  Rng rng(config.seed);
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(),
                                       start + static_cast<std::size_t>(config.batch_size));
      auto grads = params.zeros_like();
      auto &gw = grads.at("w");
      auto &gb = grads.at("b");
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto &fp = inputs[order[k]];
        const double err = (model.predict(fp) - labels[order[k]]) * inv;
        for (std::size_t j = 0; j < nbits; ++j)
          if (fp.bits[j])
            gw[j] += err;
        gb[0] += err;
      }
      const auto &w = params.at("w");
      for (std::size_t j = 0; j < nbits; ++j)
        gw[j] += config.l2 * w[j];
      train::adam_step(params, grads, state, config.adam);
      std::copy(params.at("w").data().begin(), params.at("w").data().end(),
                model.weights.begin());
      model.bias = params.at("b")[0];
    }
  }
  return model;
}

} // namespace graphmem::fp
