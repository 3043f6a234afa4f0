#pragma once

#include <cstddef>
#include <span>

#include "edakd/tensor/tensor.hpp"

namespace edakd::tensor {

struct OptimizerConfig {
  double base_lr = 1e-3;
  double min_lr = 1e-6;
  double weight_decay = 1e-4;
  std::size_t batch_size = 16;
  std::size_t epochs = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// Throws ConfigError unless 0 < min_lr <= base_lr, weight_decay >= 0, epochs >= 1.
  void validate() const;
};

/// Cosine annealing from base_lr at step 0 to min_lr at total_steps.
double cosine_lr(std::size_t step, std::size_t total_steps, const OptimizerConfig& config);

/// One AdamW update over every parameter with requires_grad, reading gradients
/// from each tensor's grad buffer. Weight decay is decoupled:
///   p <- p - lr*wd*p - lr * m_hat / (sqrt(v_hat) + eps)
/// `step_index` is 1-based (bias correction). Throws TrainingDiverged before
/// touching any parameter if a gradient is non-finite.
void adamw_step(ParameterSet& params, const OptimizerConfig& config, double lr,
                std::size_t step_index);

/// L2 norm of all gradients across the given sets.
double global_grad_norm(std::span<ParameterSet* const> sets);

/// Rescales gradients so their global norm is at most max_norm. Returns the
/// pre-clip norm.
double clip_grad_norm(std::span<ParameterSet* const> sets, double max_norm);

}  // namespace edakd::tensor
