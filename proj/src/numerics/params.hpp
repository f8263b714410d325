#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "common/rng.hpp"
#include "numerics/tape.hpp"
#include "numerics/tensor.hpp"

namespace graphmem::num {

// Ordered collection of named tensors. Used for model parameters, their
// gradients, and optimizer moments; iteration order is insertion order.
class ParamSet {
public:
  ParamSet() = default;

  Tensor &add(const std::string &name, Tensor value);

  bool contains(const std::string &name) const {
    return index_.count(name) != 0;
  }
  Tensor &at(const std::string &name);
  const Tensor &at(const std::string &name) const;

  std::size_t size() const noexcept { return entries_.size(); }
  const std::string &name(std::size_t i) const { return entries_[i].first; }
  Tensor &tensor(std::size_t i) { return entries_[i].second; }
  const Tensor &tensor(std::size_t i) const { return entries_[i].second; }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  // Same names and shapes, zero-filled.
  ParamSet zeros_like() const;
  void add_inplace(const ParamSet &other);
  void scale_inplace(double s);
  std::size_t scalar_count() const;

  friend bool operator==(const ParamSet &, const ParamSet &) = default;

private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

// Glorot-uniform matrix in [-sqrt(6/(fan_in+fan_out)), +sqrt(...)].
Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng &rng);

// Parameters bound to a tape as differentiable leaves for one pass.
class BoundParams {
public:
  BoundParams(Tape &tape, const ParamSet &params, bool requires_grad = true);

  Var operator[](const std::string &name) const;
  bool contains(const std::string &name) const {
    return vars_.count(name) != 0;
  }
  Tape &tape() const { return *tape_; }

  // Gradients of every parameter after tape.backward(); untouched
  // parameters get zeros.
  ParamSet gradients() const;

private:
  Tape *tape_;
  const ParamSet *params_;
  std::map<std::string, Var> vars_;
};

// Central differences per coordinate:
//   (f(theta + eps e) - f(theta - eps e)) / (2 eps).
// f must be deterministic. params is restored before returning.
ParamSet finite_difference_gradient(
    const std::function<double(const ParamSet &)> &f, ParamSet &params,
    double eps);

// max over coordinates of |a - b| / max(1, |b|).
double max_relative_error(const ParamSet &exact, const ParamSet &estimate);

// Checkpoint container:
//   magic "GMEMCKPT", u32 format version, u32 metadata length, metadata
//   (key=value text), u32 entry count, then per entry: u32 name length,
//   name bytes, u64 rows, u64 cols, rows*cols little-endian f64.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::map<std::string, std::string> metadata;
  ParamSet params;
};

void write_checkpoint(std::ostream &out, const Checkpoint &ckpt);
// Throws FormatError on bad magic, version mismatch, or truncation.
Checkpoint read_checkpoint(std::istream &in);
void save_checkpoint(const std::string &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::string &path);

} // namespace graphmem::num
