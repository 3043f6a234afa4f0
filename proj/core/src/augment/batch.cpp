#include "edakd/augment/batch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edakd/errors.hpp"
#include "edakd/parallel.hpp"

namespace edakd::augment {

namespace {

constexpr std::uint64_t kCleanSalt = 0xc1ea2;
constexpr std::uint64_t kShuffleSalt = 0x5f1e;

std::uint64_t epoch_key(std::size_t epoch, AugmentMode mode) {
  return mode == AugmentMode::fixed ? 0 : static_cast<std::uint64_t>(epoch) + 1;
}

}  // namespace

std::size_t clean_count(std::size_t batch_size) {
  return static_cast<std::size_t>(std::llround(kCleanFraction * static_cast<double>(batch_size)));
}

std::uint64_t plan_seed(std::uint64_t seed, std::size_t epoch, std::size_t segment_index,
                        AugmentMode mode) {
  return derive_seed(seed, {epoch_key(epoch, mode), segment_index});
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t pool_size, std::size_t batch_size,
                                                    std::size_t epoch, std::uint64_t seed,
                                                    AugmentMode mode) {
  if (batch_size < kMinBatchSize) {
    throw ConfigError("batch size " + std::to_string(batch_size) +
                      " is below 5; the 20% clean mix cannot be realized");
  }
  std::vector<std::size_t> order(pool_size);
  std::iota(order.begin(), order.end(), 0);
  if (mode == AugmentMode::dynamic) {
    Rng rng(derive_seed(seed, {kShuffleSalt, epoch}));
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < pool_size; start += batch_size) {
    const std::size_t end = std::min(pool_size, start + batch_size);
    if (end - start < kMinBatchSize) break;
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<TrainingPair> make_batch(const std::vector<signal::Segment>& pool,
                                     std::span<const std::size_t> indices, const MaBank& bank,
                                     const AugmentRanges& ranges, std::size_t epoch,
                                     std::uint64_t seed, AugmentMode mode, int jobs) {
  if (indices.size() < kMinBatchSize) {
    throw ConfigError("batch of " + std::to_string(indices.size()) +
                      " segments is below 5; the 20% clean mix cannot be realized");
  }
  const std::size_t n = indices.size();
  const std::size_t n_clean = clean_count(n);

  // Clean slots: smallest per-segment hash, ties broken by segment index.
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  auto key = [&](std::size_t slot) {
    return derive_seed(seed, {kCleanSalt, epoch_key(epoch, mode), indices[slot]});
  };
  std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = key(a), kb = key(b);
    return ka != kb ? ka < kb : indices[a] < indices[b];
  });
  std::vector<bool> is_clean(n, false);
  for (std::size_t i = 0; i < n_clean; ++i) is_clean[rank[i]] = true;

  std::vector<TrainingPair> out(n);
  parallel_for(n, jobs, [&](std::size_t slot) {
    const std::size_t idx = indices[slot];
    if (idx >= pool.size()) throw ConfigError("batch index out of range");
    const auto& clean = pool[idx].samples;
    TrainingPair& tp = out[slot];
    tp.segment_index = idx;
    tp.clean = is_clean[slot];
    if (tp.clean) {
      tp.input = clean;
      tp.target = clean;
    } else {
      tp.plan = sample_plan(ranges, bank.size(), plan_seed(seed, epoch, idx, mode));
      auto pair = corrupt(clean, tp.plan, bank);
      tp.input = std::move(pair.input);
      tp.target = std::move(pair.target);
    }
  });
  return out;
}

std::vector<TrainingPair> static_validation_pairs(const std::vector<signal::Segment>& pool,
                                                  const MaBank& bank, const AugmentRanges& ranges,
                                                  std::uint64_t seed, int jobs) {
  std::vector<TrainingPair> out(pool.size());
  parallel_for(pool.size(), jobs, [&](std::size_t i) {
    TrainingPair& tp = out[i];
    tp.segment_index = i;
    tp.plan = sample_plan(ranges, bank.size(), plan_seed(seed, 0, i, AugmentMode::fixed));
    auto pair = corrupt(pool[i].samples, tp.plan, bank);
    tp.input = std::move(pair.input);
    tp.target = std::move(pair.target);
  });
  return out;
}

}  // namespace edakd::augment
