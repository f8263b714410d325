#include "numerics/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace graphmem::num {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw DimensionError("tensor data length " + std::to_string(data_.size())
                         + " does not match shape " + shape_string());
}

Tensor Tensor::column(std::initializer_list<double> values) {
  return Tensor(values.size(), 1, std::vector<double>(values));
}

Tensor Tensor::column(std::span<const double> values) {
  return Tensor(values.size(), 1,
                std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i)
    t(i, i) = 1.0;
  return t;
}

Tensor Tensor::col(std::size_t c) const {
  Tensor out(rows_, 1);
  for (std::size_t r = 0; r < rows_; ++r)
    out[r] = (*this)(r, c);
  return out;
}

Tensor Tensor::transpose() const {
  Tensor out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      out(c, r) = (*this)(r, c);
  return out;
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add_inplace(const Tensor &o) {
  require_same_shape(*this, o, "add");
  for (std::size_t i = 0; i < data_.size(); ++i)
    data_[i] += o.data_[i];
}

void Tensor::scale_inplace(double s) {
  for (auto &x: data_)
    x *= s;
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double x) { return std::isfinite(x); });
}

void require_same_shape(const Tensor &a, const Tensor &b, const char *op) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(op) + ": shape mismatch "
                         + a.shape_string() + " vs " + b.shape_string());
}

} // namespace graphmem::num
