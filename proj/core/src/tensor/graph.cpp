#include "edakd/tensor/graph.hpp"

#include <algorithm>

#include "edakd/errors.hpp"

namespace edakd::tensor {

const Tensor& Var::value() const { return graph_->value(id_); }

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = grad_enabled_;
  return push(std::move(n));
}

Var Graph::parameter(const ParameterSet& params, std::size_t index) {
  Node n;
  n.external = &params[index].tensor;
  n.needs_grad = grad_enabled_ && params[index].tensor.requires_grad();
  n.param_set = &params;
  n.param_index = index;
  return push(std::move(n));
}

Var Graph::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(fn));
}

Var Graph::record(Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_) {
    n.needs_grad = std::any_of(inputs.begin(), inputs.end(),
                               [this](const Var& v) { return nodes_[v.id()].needs_grad; });
  }
  if (n.needs_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

const Tensor& Graph::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

std::span<double> Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(value(id).size(), 0.0);
  return n.grad;
}

void Graph::backward(Var root) {
  if (root.value().size() != 1) {
    throw ShapeError("backward root must be a single value, got " + to_string(root.shape()));
  }
  if (!nodes_[root.id()].needs_grad) return;
  grad_buffer(root.id())[0] += 1.0;
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, id);
  }
}

void Graph::for_each_parameter_grad(
    const std::function<void(const ParameterSet&, std::size_t, std::span<const double>)>& fn)
    const {
  for (const auto& n : nodes_) {
    if (n.param_set && !n.grad.empty()) fn(*n.param_set, n.param_index, n.grad);
  }
}

void Graph::count_macs(std::uint64_t macs) {
  if (!count_macs_) return;
  std::string scope;
  for (const auto& s : scopes_) {
    if (!scope.empty()) scope += '.';
    scope += s;
  }
  mac_records_.push_back({std::move(scope), macs});
}

void Graph::push_scope(std::string_view name) { scopes_.emplace_back(name); }

void Graph::pop_scope() {
  if (!scopes_.empty()) scopes_.pop_back();
}

}  // namespace edakd::tensor
