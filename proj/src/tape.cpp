#include "whitebait/tape.hpp"

#include "whitebait/error.hpp"

namespace whitebait {

Var Tape::push(std::string_view op, Tensor value, bool requires_grad, Backward backward) {
  if (!value.all_finite()) throw NumericError("non-finite value produced by " + std::string(op));
  Node n;
  n.op = std::string(op);
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) { return push("constant", std::move(value), false, nullptr); }

Var Tape::param(Parameter& p) {
  if (p.frozen) return push("param", p.value, false, nullptr);
  Parameter* target = &p;
  return push("param", p.value, true, [target](Tape& t, std::uint32_t self) {
    target->gradient.add_(t.nodes_[self].grad);
  });
}

Var Tape::record(std::string_view op, Tensor value, std::initializer_list<Var> inputs, Backward backward) {
  bool rg = false;
  for (Var in : inputs) rg = rg || nodes_.at(in.id).requires_grad;
  return push(op, std::move(value), rg, std::move(backward));
}

Var Tape::record(std::string_view op, Tensor value, const std::vector<Var>& inputs, Backward backward) {
  bool rg = false;
  for (Var in : inputs) rg = rg || nodes_.at(in.id).requires_grad;
  return push(op, std::move(value), rg, std::move(backward));
}

Var Tape::record_leaf(std::string_view op, Tensor value, bool requires_grad, Backward backward) {
  return push(op, std::move(value), requires_grad, std::move(backward));
}

Tensor& Tape::grad(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.grad.values().empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (swept_) throw std::logic_error("Tape::backward called twice");
  const Node& root = nodes_.at(loss.id);
  if (root.value.size() != 1)
    throw ShapeError("backward: loss must be a scalar, got shape " + shape_string(root.value.shape()));
  swept_ = true;
  visits_.assign(nodes_.size(), 0);
  if (!root.requires_grad) return;
  grad(loss).fill(1.0);
  for (std::int64_t i = loss.id; i >= 0; --i) {
    auto id = static_cast<std::uint32_t>(i);
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.values().empty()) continue;
    if (!n.grad.all_finite()) throw NumericError("non-finite gradient at " + n.op);
    ++visits_[id];
    n.backward(*this, id);
  }
}

}  // namespace whitebait
