#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string_view>
#include <vector>

#include "edakd/augment/noise.hpp"
#include "edakd/signal/kv_config.hpp"

namespace edakd::augment {

enum class NoiseKind { real_ma, colored };
enum class DistortionKind { clipping, impulse, shearing };

std::string_view to_string(NoiseKind kind);
std::string_view to_string(DistortionKind kind);
NoiseKind parse_noise_kind(std::string_view text);
DistortionKind parse_distortion_kind(std::string_view text);

/// Sampling ranges. Defaults are the published augmentation table.
struct AugmentRanges {
  double ma_scale_min = 0.7, ma_scale_max = 1.3;
  double snr_db_min = 20.0, snr_db_max = 30.0;
  double beta_min = 0.0, beta_max = 2.0;
  double clip_min = 0.05, clip_max = 0.20;
  double impulse_amp_min = 5.0, impulse_amp_max = 30.0;
  int impulse_count_min = 1, impulse_count_max = 3;
  int impulse_width_min = 1, impulse_width_max = 11;
  int shear_count_min = 1, shear_count_max = 3;

  /// Checks min <= max everywhere; unless allow_out_of_range, also checks that
  /// every range sits inside the defaults.
  void validate(bool allow_out_of_range = false) const;
  static AugmentRanges from_config(const signal::KeyValueConfig& config,
                                   bool allow_out_of_range = false);
  static std::vector<std::string> config_keys();
};

/// One noise category plus one distortion category, fully parameterized.
/// Positions, signs and noise samples are drawn from `seed` when applied.
struct AugmentationPlan {
  NoiseKind noise = NoiseKind::colored;
  double ma_scale = 1.0;
  std::size_t ma_shift = 0;
  std::size_t ma_pick = 0;
  double snr_db = 25.0;
  double beta = 1.0;

  DistortionKind distortion = DistortionKind::clipping;
  double clip_p = 0.1;
  double impulse_amp = 10.0;
  int impulse_count = 1;
  int impulse_width = 1;
  int shear_count = 1;

  std::uint64_t seed = 0;

  bool within(const AugmentRanges& ranges) const;
  bool operator==(const AugmentationPlan&) const = default;
};

/// Draws a plan; real_ma is only eligible when bank_size > 0.
AugmentationPlan sample_plan(const AugmentRanges& ranges, std::size_t bank_size,
                             std::uint64_t seed);

nlohmann::ordered_json plan_to_json(const AugmentationPlan& plan);
AugmentationPlan plan_from_json(const nlohmann::json& json);

struct CorruptedPair {
  std::vector<double> input;
  std::vector<double> target;
};

/// Applies the plan's noise, then its distortion. The target is a copy of clean.
CorruptedPair corrupt(std::span<const double> clean, const AugmentationPlan& plan,
                      const MaBank& bank);

}  // namespace edakd::augment
