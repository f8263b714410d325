#include "training/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace graphmem::train {

double cross_entropy(double prob, int label) {
  const double p = std::clamp(prob, 1e-12, 1.0 - 1e-12);
  return label == 1 ? -std::log(p) : -std::log1p(-p);
}

AdamState AdamState::zeros_like(const num::ParamSet &params) {
  return AdamState{params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(num::ParamSet &params, const num::ParamSet &grads,
               AdamState &state, const AdamConfig &config) {
  for (const auto &[name, g]: grads)
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!std::isfinite(g[i]))
        throw NumericError("non-finite gradient in parameter '" + name
                           + "' at coordinate " + std::to_string(i) + " (value "
                           + std::to_string(g[i]) + ")");

  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto &theta = params.tensor(p);
    const auto &g = grads.at(params.name(p));
    auto &m = state.m.at(params.name(p));
    auto &v = state.v.at(params.name(p));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      theta[i] -= config.step_size * mhat / (std::sqrt(vhat) + config.epsilon);
    }
  }
}

} // namespace graphmem::train
