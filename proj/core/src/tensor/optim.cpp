#include "edakd/tensor/optim.hpp"

#include <cmath>
#include <numbers>

#include "edakd/errors.hpp"

namespace edakd::tensor {

void OptimizerConfig::validate() const {
  if (!(min_lr > 0.0) || !(min_lr <= base_lr)) {
    throw ConfigError("optimizer: require 0 < min_lr <= base_lr");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("optimizer: weight_decay must be >= 0");
  if (epochs < 1) throw ConfigError("optimizer: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("optimizer: batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("optimizer: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("optimizer: eps must be positive");
}

double cosine_lr(std::size_t step, std::size_t total_steps, const OptimizerConfig& config) {
  if (total_steps == 0) return config.base_lr;
  if (step >= total_steps) return config.min_lr;
  const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
  return config.min_lr +
         (config.base_lr - config.min_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void adamw_step(ParameterSet& params, const OptimizerConfig& config, double lr,
                std::size_t step_index) {
  if (step_index == 0) throw ConfigError("adamw_step: step_index is 1-based");
  for (const auto& p : params) {
    if (!p.tensor.requires_grad() || !p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) throw TrainingDiverged("non-finite gradient in parameter " + p.name);
    }
  }
  const double t = static_cast<double>(step_index);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  const double decay = lr * config.weight_decay;
  for (auto& p : params) {
    if (!p.tensor.requires_grad() || !p.tensor.has_grad()) continue;
    auto w = p.tensor.values();
    auto g = p.tensor.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= decay * w[i];
      p.first_moment[i] = config.beta1 * p.first_moment[i] + (1.0 - config.beta1) * g[i];
      p.second_moment[i] = config.beta2 * p.second_moment[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = p.first_moment[i] / bc1;
      const double v_hat = p.second_moment[i] / bc2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

double global_grad_norm(std::span<ParameterSet* const> sets) {
  double s = 0.0;
  for (const ParameterSet* set : sets) {
    for (const auto& p : *set) {
      if (!p.tensor.has_grad()) continue;
      for (double g : p.tensor.grad()) s += g * g;
    }
  }
  return std::sqrt(s);
}

double clip_grad_norm(std::span<ParameterSet* const> sets, double max_norm) {
  const double norm = global_grad_norm(sets);
  if (!std::isfinite(norm)) throw TrainingDiverged("non-finite gradient norm");
  if (norm > max_norm && norm > 0.0) {
    const double k = max_norm / norm;
    for (ParameterSet* set : sets) {
      for (auto& p : *set) {
        if (!p.tensor.has_grad()) continue;
        for (double& g : p.tensor.grad()) g *= k;
      }
    }
  }
  return norm;
}

}  // namespace edakd::tensor
