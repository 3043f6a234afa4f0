#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "edakd/augment/batch.hpp"
#include "edakd/distill/losses.hpp"
#include "edakd/models/model.hpp"
#include "edakd/tensor/optim.hpp"

namespace edakd::distill {

enum class TrainMode { teacher, student, student_kd };

std::string_view to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view text);

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_total = 0.0;
  double train_recon = 0.0;
  double train_response = 0.0;
  double train_feature = 0.0;
  double val_mae = 0.0;
  double val_snr_imp = 0.0;
};

struct TrainConfig {
  tensor::OptimizerConfig optim;
  augment::AugmentRanges ranges;
  LossWeights weights;
  double grad_clip = 5.0;
  std::uint64_t seed = 0;
  int jobs = 1;
  /// Output directory for checkpoints, logs and resumable state; empty keeps
  /// everything in memory.
  std::filesystem::path out_dir;
  std::string tag;           // file prefix, defaults to the mode name
  bool save_state = true;    // write resumable state after every epoch
  double identity_tolerance = 1e-10;
  std::function<void(const EpochRecord&)> on_epoch;  // progress hook
};


struct TrainRun {
  std::string tag;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  std::vector<LossBreakdown> batches;  // every optimizer step, in order
  std::optional<std::size_t> best_epoch;
  double best_val_mae = 0.0;
  std::filesystem::path best_checkpoint;
  std::filesystem::path log_path;
  /// Largest |total - composed| seen over all logged batches.
  double max_composition_error = 0.0;
};

struct ValidationScore {
  double mae = 0.0;      // de-normalized, μS
  double snr_imp = 0.0;  // mean per-segment dB
};

/// Owns the optimization of one model (plus projections when distilling).
/// Per-item gradients are reduced in item order, so results do not depend on
/// the worker count.
class Trainer {
 public:
  Trainer(TrainMode mode, models::ModelGraph& model, TrainConfig config,
          const models::ModelGraph* teacher = nullptr, ProjectionSet* projections = nullptr);

  /// Trains up to optim.epochs total epochs, continuing after any restored state.
  TrainRun run(const std::vector<signal::Segment>& train_pool,
               const std::vector<augment::TrainingPair>& validation, const augment::MaBank& bank);

  /// Restores weights, moments and history written by a previous run with
  /// the same out_dir and tag. Returns false when no state exists.
  bool resume();

  std::size_t epochs_done() const noexcept { return run_.epochs.size(); }
  const TrainRun& history() const noexcept { return run_; }

  /// One epoch of optimization; returns the record without validation fields.
  EpochRecord train_epoch(std::size_t epoch, const std::vector<signal::Segment>& train_pool,
                          const augment::MaBank& bank);
  ValidationScore validate(const std::vector<augment::TrainingPair>& validation) const;

  std::filesystem::path checkpoint_path() const;
  std::filesystem::path log_path() const;
  std::filesystem::path state_path() const;

 private:
  LossBreakdown train_batch(const std::vector<augment::TrainingPair>& batch, std::size_t epoch,
                            std::size_t batch_index, double lr);

  TrainMode mode_;
  models::ModelGraph& model_;
  TrainConfig config_;
  const models::ModelGraph* teacher_;
  ProjectionSet* projections_;
  std::size_t step_ = 0;
  TrainRun run_;
};

/// Writes epoch records as JSONL with fixed key order.
void write_train_log(const std::filesystem::path& path, const std::vector<EpochRecord>& epochs);
std::vector<EpochRecord> read_train_log(const std::filesystem::path& path);

}  // namespace edakd::distill
