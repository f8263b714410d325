#pragma once

#include "numerics/params.hpp"

namespace graphmem::train {

// Binary cross-entropy -(y ln p + (1-y) ln(1-p)), p clamped to
// [1e-12, 1 - 1e-12].
double cross_entropy(double prob, int label);

struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  num::ParamSet m;
  num::ParamSet v;
  long long step = 0;

  static AdamState zeros_like(const num::ParamSet &params);
};

// Bias-corrected Adam update. Throws NumericError naming the first parameter
// with a non-finite gradient; params and state are untouched in that case.
void adam_step(num::ParamSet &params, const num::ParamSet &grads,
               AdamState &state, const AdamConfig &config);

} // namespace graphmem::train
