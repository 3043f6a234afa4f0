#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edakd/tensor/tensor.hpp"

namespace edakd::tensor {

class Graph;

/// Handle to a node recorded on a Graph.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

using BackwardFn = std::function<void(Graph&, std::size_t)>;

struct MacRecord {
  std::string scope;
  std::uint64_t macs = 0;
};

/// Reverse-mode tape. One Graph per forward pass; parameters are referenced,
/// not copied, so a ParameterSet may back many graphs concurrently as long as
/// it is not mutated meanwhile. Gradients of parameters stay on the graph until
/// collected with for_each_parameter_grad.
class Graph {
 public:
  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool grad_enabled() const noexcept { return grad_enabled_; }

  Var constant(Tensor value);
  /// Leaf whose gradient can be read after backward (when grad is enabled).
  Var variable(Tensor value);
  /// Leaf that references params[index]; differentiable iff the parameter
  /// requires grad and the graph has grad enabled.
  Var parameter(const ParameterSet& params, std::size_t index);

  /// Records an op output. `fn` is kept only if some input needs a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn fn);

  /// Seeds d(root)/d(root) = 1 and propagates. `root` must hold one value.
  void backward(Var root);

  const Tensor& value(std::size_t id) const;
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  /// Accumulated gradient of a node; empty when none reached it.
  std::span<const double> grad(std::size_t id) const { return nodes_[id].grad; }
  std::span<const double> grad(Var v) const { return grad(v.id()); }
  /// Zero-initialized accumulation buffer for a node that needs a gradient.
  std::span<double> grad_buffer(std::size_t id);

  void for_each_parameter_grad(
      const std::function<void(const ParameterSet&, std::size_t, std::span<const double>)>& fn)
      const;

  std::size_t node_count() const noexcept { return nodes_.size(); }

  // MAC accounting used by the profiler. Ops report closed-form counts into
  // the innermost named scope.
  void enable_mac_counting(bool on) noexcept { count_macs_ = on; }
  bool mac_counting() const noexcept { return count_macs_; }
  void count_macs(std::uint64_t macs);
  void push_scope(std::string_view name);
  void pop_scope();
  const std::vector<MacRecord>& mac_records() const noexcept { return mac_records_; }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    std::vector<double> grad;
    bool needs_grad = false;
    BackwardFn backward;
    const ParameterSet* param_set = nullptr;
    std::size_t param_index = 0;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  bool grad_enabled_;
  bool count_macs_ = false;
  std::vector<std::string> scopes_;
  std::vector<MacRecord> mac_records_;
};

/// RAII helper for Graph::push_scope / pop_scope.
class ScopeGuard {
 public:
  ScopeGuard(Graph& graph, std::string_view name) : graph_(graph) { graph_.push_scope(name); }
  ~ScopeGuard() { graph_.pop_scope(); }
  ScopeGuard(const ScopeGuard&) = delete;
  ScopeGuard& operator=(const ScopeGuard&) = delete;

 private:
  Graph& graph_;
};

}  // namespace edakd::tensor
