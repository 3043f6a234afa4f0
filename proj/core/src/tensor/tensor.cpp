#include "edakd/tensor/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "edakd/errors.hpp"

namespace edakd::tensor {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive: " + to_string(shape_));
  }
  values_.assign(numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive: " + to_string(shape_));
  }
  if (numel(shape_) != values_.size()) {
    throw ShapeError("shape " + to_string(shape_) + " does not match " +
                     std::to_string(values_.size()) + " values");
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + to_string(shape_));
  }
  return shape_[axis];
}

void Tensor::zero_grad() { grad_.assign(values_.size(), 0.0); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::size_t ParameterSet::add(std::string name, Tensor init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
  const std::size_t n = init.size();
  init.set_requires_grad(true);
  Parameter p{name, std::move(init), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

std::optional<std::size_t> ParameterSet::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

void ParameterSet::set_trainable(bool trainable) {
  for (auto& p : params_) p.tensor.set_requires_grad(trainable);
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

}  // namespace edakd::tensor
