#include "numerics/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "common/error.hpp"

namespace graphmem::num {

namespace {

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Tensor &t) {
  return ConstMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

MutMap view(Tensor &t) {
  return MutMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

void shape_error(const char *op, const Tensor &a, const Tensor &b) {
  throw DimensionError(std::string(op) + ": incompatible shapes "
                       + a.shape_string() + " and " + b.shape_string());
}

} // namespace

Tensor matmul(const Tensor &a, const Tensor &b) {
  if (a.cols() != b.rows())
    shape_error("matmul", a, b);
  Tensor c(a.rows(), b.cols());
  if (a.cols() != 0)
    view(c).noalias() = view(a) * view(b);
  return c;
}

void matmul_tn_acc(const Tensor &a, const Tensor &b, Tensor &c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
    shape_error("matmul_tn", a, b);
  if (a.rows() != 0)
    view(c).noalias() += view(a).transpose() * view(b);
}

void matmul_nt_acc(const Tensor &a, const Tensor &b, Tensor &c) {
  if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows())
    shape_error("matmul_nt", a, b);
  if (a.cols() != 0)
    view(c).noalias() += view(a) * view(b).transpose();
}

Tensor affine(const Tensor &w, const Tensor &x, const Tensor &b) {
  Tensor y = matmul(w, x);
  if (b.rows() != y.rows() || b.cols() != 1)
    shape_error("affine bias", y, b);
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c)
      y(r, c) += b[r];
  return y;
}

Tensor concat_rows(const Tensor &top, const Tensor &bottom) {
  if (top.cols() != bottom.cols())
    shape_error("concat", top, bottom);
  Tensor out(top.rows() + bottom.rows(), top.cols());
  std::copy(top.data().begin(), top.data().end(), out.data().begin());
  std::copy(bottom.data().begin(), bottom.data().end(),
            out.data().begin() + static_cast<std::ptrdiff_t>(top.size()));
  return out;
}

double sigmoid(double x) noexcept {
  if (x >= 0)
    return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor relu(Tensor x) {
  for (auto &v: x.data())
    v = v > 0 ? v : 0.0;
  return x;
}

Tensor tanh(Tensor x) {
  for (auto &v: x.data())
    v = std::tanh(v);
  return x;
}

Tensor sigmoid(Tensor x) {
  for (auto &v: x.data())
    v = sigmoid(v);
  return x;
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty())
    throw DimensionError("softmax: empty input");
  const double mx = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double total = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - mx);
    total += out[i];
  }
  for (auto &v: out)
    v /= total;
  return out;
}

Tensor dropout_mask(std::size_t rows, std::size_t cols, double rate,
                    Rng &rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ConfigError("dropout rate must lie in [0, 1), got "
                      + std::to_string(rate));
  Tensor mask(rows, cols, 1.0);
  if (rate == 0.0)
    return mask;
  const double keep = 1.0 / (1.0 - rate);
  for (auto &v: mask.data())
    v = rng.uniform() < rate ? 0.0 : keep;
  return mask;
}

Tensor dropout(const Tensor &x, double rate, Rng &rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ConfigError("dropout rate must lie in [0, 1), got "
                      + std::to_string(rate));
  if (!training || rate == 0.0)
    return x;
  Tensor mask = dropout_mask(x.rows(), x.cols(), rate, rng);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= mask[i];
  return out;
}

} // namespace graphmem::num
