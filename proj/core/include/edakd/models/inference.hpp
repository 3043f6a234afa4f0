#pragma once

#include <span>
#include <vector>

#include "edakd/models/model.hpp"

namespace edakd::models {

/// normalize -> forward -> denormalize with the input's own statistics.
/// Throws InferenceError on non-finite output.
std::vector<double> denoise(const ModelGraph& model, std::span<const double> samples,
                            const ForwardOptions& options = {});
signal::Segment denoise(const ModelGraph& model, const signal::Segment& segment);

/// Denoises many segments; output order matches input regardless of `jobs`.
std::vector<std::vector<double>> denoise_all(const ModelGraph& model,
                                             const std::vector<std::vector<double>>& inputs,
                                             int jobs = 1);

}  // namespace edakd::models
