#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <vector>

#include "numerics/tensor.hpp"

namespace graphmem::num {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  std::size_t id() const noexcept { return id_; }
  Tape &tape() const noexcept { return *tape_; }
  const Tensor &value() const;

private:
  friend class Tape;
  Var(Tape *tape, std::size_t id): tape_(tape), id_(id) { }

  Tape *tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode recorder. Every operation appends a node holding its forward
// value and a closure that pushes the node's gradient into its inputs.
// A tape is single-use and not shared between threads.
class Tape {
public:
  using Backward = std::function<void(Tape &, std::size_t self)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);

  // Records a derived node. The node requires a gradient iff any input does;
  // otherwise the closure is dropped.
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward fn);
  Var record(Tensor value, const std::vector<Var> &inputs, Backward fn);

  const Tensor &value(std::size_t id) const { return nodes_[id].value; }
  const Tensor &value(Var v) const { return nodes_[v.id()].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  bool needs_grad(Var v) const { return nodes_[v.id()].needs_grad; }

  // Gradient buffer of a node, allocated as zeros on first use.
  Tensor &grad(std::size_t id);
  // Gradient after backward(); zeros if the node was never reached.
  Tensor grad_of(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and runs the recorded closures in reverse.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    Backward backward;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
};

// Differentiable operations. Shapes follow the value-level kernels in ops.hpp.
namespace ad {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
// a + v broadcast: v is (a.rows x 1) and is added to every column of a.
Var add_col(Var a, Var v);
// W x + b with b broadcast across columns.
Var affine(Var w, Var x, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var relu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
// Softmax over all entries of a (a row or column vector).
Var softmax(Var a);
// exp(a - max(a)). The shift is treated as a constant, which is exact for any
// consumer that normalizes the result.
Var exp_shifted(Var a);
Var concat_rows(Var top, Var bottom);
Var transpose(Var a);
// alpha * proposal + (1 - alpha) * previous, elementwise.
Var gate_mix(Var alpha, Var proposal, Var previous);
// Mean binary cross-entropy of a (1x1) probability against label y, with the
// probability clamped to [1e-12, 1 - 1e-12].
Var binary_cross_entropy(Var prob, double label);
// Sum of all entries, as a (1x1).
Var sum(Var a);

} // namespace ad

} // namespace graphmem::num
