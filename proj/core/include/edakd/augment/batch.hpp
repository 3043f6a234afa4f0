#pragma once

#include <cstdint>
#include <vector>

#include "edakd/augment/plan.hpp"
#include "edakd/signal/segment.hpp"

namespace edakd::augment {

enum class AugmentMode { dynamic, fixed };

inline constexpr double kCleanFraction = 0.2;
inline constexpr std::size_t kMinBatchSize = 5;

/// Number of clean pairs in a batch of `batch_size`: round(0.2 * batch_size).
std::size_t clean_count(std::size_t batch_size);

struct TrainingPair {
  std::size_t segment_index = 0;
  bool clean = false;
  AugmentationPlan plan;  // meaningful only when !clean
  std::vector<double> input;
  std::vector<double> target;
};

/// Per-segment plan seed. Fixed mode ignores the epoch.
std::uint64_t plan_seed(std::uint64_t seed, std::size_t epoch, std::size_t segment_index,
                        AugmentMode mode);

/// Partition of [0, pool_size) into batches. Dynamic mode reshuffles each
/// epoch; fixed mode keeps index order. A trailing batch smaller than the
/// minimum batch size is dropped.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t pool_size, std::size_t batch_size,
                                                    std::size_t epoch, std::uint64_t seed,
                                                    AugmentMode mode);

/// Builds (input, target) pairs for one batch. round(0.2 * B) members are
/// clean pairs (x, x); the rest are corrupted under their per-segment plan.
/// Clean members are the ones with the smallest per-segment hash, so the choice
/// is independent of batch order. Throws ConfigError when fewer than 5 indices.
std::vector<TrainingPair> make_batch(const std::vector<signal::Segment>& pool,
                                     std::span<const std::size_t> indices, const MaBank& bank,
                                     const AugmentRanges& ranges, std::size_t epoch,
                                     std::uint64_t seed, AugmentMode mode, int jobs = 1);

/// Every segment corrupted once under a fixed plan (no clean pairs); used as
/// the validation set so that denoising gains are measurable on every item.
std::vector<TrainingPair> static_validation_pairs(const std::vector<signal::Segment>& pool,
                                                  const MaBank& bank, const AugmentRanges& ranges,
                                                  std::uint64_t seed, int jobs = 1);

}  // namespace edakd::augment
