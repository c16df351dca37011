#pragma once

#include <cstddef>
#include <deque>
#include <functional>

#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Reverse-mode gradient recorder.
///
/// Every op appends one node holding its output value and a closure that
/// pushes the node's gradient back into its inputs. Nodes are stored in
/// creation order, which is already a topological order, so backward() is a
/// single reverse sweep. A tape is owned by one thread; build one per sample
/// when differentiating in parallel.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf whose gradient is accumulated by backward().
  Var parameter(Tensor value);

  /// Records an op output. `backward` is dropped when no input needs a gradient.
  Var record(Tensor value, bool requires_grad, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& value(Var v) const { return value(v.id); }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var v) const { return requires_grad(v.id); }

  /// Gradient buffer for a node, zero-initialised on first access.
  Tensor& grad_buffer(std::size_t id);

  /// Gradient of the last backward() loss with respect to `v`. Zero when
  /// `v` did not influence the loss.
  Tensor grad(Var v) const;

  /// Propagates d(loss)/d(node) to every node that requires a gradient.
  /// Throws UsageError when `loss` is not a single-element tensor.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::deque<Node> nodes_;
};

}  // namespace quantcal
