#pragma once

#include <span>
#include <vector>

#include "common/rng.hpp"
#include "numerics/tensor.hpp"

namespace graphmem::num {

// C = A * B.
Tensor matmul(const Tensor &a, const Tensor &b);
// C += A^T * B and C += A * B^T; used by the backward passes.
void matmul_tn_acc(const Tensor &a, const Tensor &b, Tensor &c);
void matmul_nt_acc(const Tensor &a, const Tensor &b, Tensor &c);

// W x + b; b is a column vector broadcast across the columns of x.
Tensor affine(const Tensor &w, const Tensor &x, const Tensor &b);

Tensor concat_rows(const Tensor &top, const Tensor &bottom);

double sigmoid(double x) noexcept;
Tensor relu(Tensor x);
Tensor tanh(Tensor x);
Tensor sigmoid(Tensor x);

// Max-subtracted softmax. Throws on empty input.
std::vector<double> softmax(std::span<const double> scores);

// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
// 1/(1-rate). Throws ConfigError if rate is outside [0, 1).
Tensor dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng &rng);
Tensor dropout(const Tensor &x, double rate, Rng &rng, bool training);

} // namespace graphmem::num
