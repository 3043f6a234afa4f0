#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "edakd/distill/trainer.hpp"
#include "edakd/tensor/tensor.hpp"

namespace edakd::distill {

struct TrainState {
  std::size_t step = 0;
  std::optional<std::size_t> best_epoch;
  double best_val_mae = 0.0;
  std::vector<EpochRecord> epochs;
  std::vector<LossBreakdown> batches;
  double max_composition_error = 0.0;
};

/// Float64 archive of weights and AdamW moments (`<path>`) plus a JSON
/// sidecar (`<path>.json`) holding counters and history.
void save_train_state(const std::filesystem::path& path, const TrainState& state,
                      const tensor::ParameterSet& model, const tensor::ParameterSet* projections);
/// Returns nullopt when no state file exists; throws FormatError on mismatch.
std::optional<TrainState> load_train_state(const std::filesystem::path& path,
                                           tensor::ParameterSet& model,
                                           tensor::ParameterSet* projections);

}  // namespace edakd::distill
