#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "whitebait/tensor.hpp"

namespace whitebait {

// A trainable tensor with its gradient and RMSProp accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor gradient;
  Tensor accumulator;  // moving average of squared gradients, >= 0
  // Frozen parameters enter the tape as constants and receive no gradient.
  bool frozen = false;
  // Per-parameter multiplier on the schedule's learning rate.
  double lr_scale = 1.0;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), gradient(value.shape()), accumulator(value.shape()) {}

  std::size_t size() const { return value.size(); }
  void zero_grad() { gradient.fill(0.0); }
};

// Handle to a node on a Tape.
struct Var {
  std::uint32_t id = std::numeric_limits<std::uint32_t>::max();
  bool valid() const { return id != std::numeric_limits<std::uint32_t>::max(); }
};

// Reverse-mode recording of one forward pass. Nodes are appended in
// evaluation order, so the node vector is already topologically sorted and
// backward is a single reverse sweep.
class Tape {
 public:
  // Propagates the node's gradient into its inputs (or into a Parameter).
  using Backward = std::function<void(Tape&, std::uint32_t self)>;

  Var constant(Tensor value);
  // Leaf bound to a parameter; its gradient is added to p.gradient during
  // backward. A frozen parameter becomes a constant.
  Var param(Parameter& p);

  // Appends a computed node. `value` must be finite (NumericError otherwise).
  Var record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, Backward backward);
  Var record(std::string_view op, Tensor value, const std::vector<Var>& inputs, Backward backward);
  // Node whose gradient does not come from other tape nodes (e.g. a gather
  // from a Parameter). requires_grad must be decided by the caller.
  Var record_leaf(std::string_view op, Tensor value, bool requires_grad, Backward backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  // Gradient buffer, allocated (zeroed) on first access.
  Tensor& grad(Var v);
  Tensor& grad(std::uint32_t id) { return grad(Var{id}); }
  bool has_grad(Var v) const { return !nodes_.at(v.id).grad.values().empty(); }
  const std::string& op_name(Var v) const { return nodes_.at(v.id).op; }

  // Seeds d(loss)/d(loss) = 1 and sweeps in reverse. Throws ShapeError when
  // loss is not a single element. Can only be called once per tape.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  // Number of times each node's backward function ran in the last sweep.
  const std::vector<std::uint32_t>& visit_counts() const { return visits_; }

 private:
  struct Node {
    std::string op;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };

  Var push(std::string_view op, Tensor value, bool requires_grad, Backward backward);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> visits_;
  bool swept_ = false;
};

}  // namespace whitebait
