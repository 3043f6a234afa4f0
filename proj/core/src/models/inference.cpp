#include "edakd/models/inference.hpp"

#include <cmath>

#include "edakd/errors.hpp"
#include "edakd/parallel.hpp"

namespace edakd::models {

std::vector<double> denoise(const ModelGraph& model, std::span<const double> samples,
                            const ForwardOptions& options) {
  if (samples.size() != model.config().input_length) {
    throw ShapeError("denoise expects " + std::to_string(model.config().input_length) +
                     " samples, got " + std::to_string(samples.size()));
  }
  const auto norm = signal::normalize(samples);
  const auto out = model.predict_normalized(norm.values, norm.stats, options);
  auto restored = signal::denormalize(out, norm.stats);
  for (double v : restored) {
    if (!std::isfinite(v)) throw InferenceError("model produced a non-finite output");
  }
  return restored;
}

signal::Segment denoise(const ModelGraph& model, const signal::Segment& segment) {
  signal::Segment out = segment;
  out.samples = denoise(model, segment.samples);
  return out;
}

std::vector<std::vector<double>> denoise_all(const ModelGraph& model,
                                             const std::vector<std::vector<double>>& inputs,
                                             int jobs) {
  std::vector<std::vector<double>> out(inputs.size());
  parallel_for(inputs.size(), jobs, [&](std::size_t i) { out[i] = denoise(model, inputs[i]); });
  return out;
}

}  // namespace edakd::models
