#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edakd/models/model.hpp"

namespace edakd::models {

struct LayerProfile {
  std::string name;
  std::string type;
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
};

struct ProfileReport {
  std::string model;
  std::uint64_t param_count = 0;
  double size_mb = 0.0;  // float32 storage, 1 MB = 2^20 bytes
  std::uint64_t macs = 0;
  std::uint64_t flops = 0;  // 2 * macs
  std::vector<LayerProfile> layers;
};

/// 4 * params / 2^20.
double size_mb(std::uint64_t params);
/// Rounds half away from zero to two decimals.
double round2(double value);

/// Counts parameters per layer and MACs of one forward pass over an
/// input of `input_length` samples.
ProfileReport profile(const ModelGraph& model, std::size_t input_length = 512);

nlohmann::ordered_json profile_to_json(const ProfileReport& report);
/// Complexity table: model, params (M), size (MB), MACs (M), FLOPs (M).
std::string format_profile_table(std::span<const ProfileReport> reports);
/// Per-layer rows followed by a total row.
std::string format_layer_table(const ProfileReport& report);

}  // namespace edakd::models
