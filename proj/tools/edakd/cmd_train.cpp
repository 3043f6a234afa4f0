#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "edakd/augment/batch.hpp"
#include "edakd/augment/noise.hpp"
#include "edakd/distill/trainer.hpp"
#include "edakd/errors.hpp"
#include "edakd/models/archive.hpp"
#include "edakd/rng.hpp"
#include "edakd/signal/io.hpp"
#include "output.hpp"

namespace edakd::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum : std::uint64_t { kModelStream = 11, kProjectionStream = 12, kValidationStream = 13 };

struct TrainInputs {
  std::vector<signal::Segment> train;
  std::vector<augment::TrainingPair> validation;
  augment::MaBank bank;
};

TrainInputs load_inputs(const Globals& g, const TrainOptions& o, const augment::AugmentRanges& ranges) {
  TrainInputs in;
  in.train = signal::read_segments_jsonl(g.path(o.train));
  if (o.limit > 0 && in.train.size() > o.limit) in.train.resize(o.limit);
  const auto val = signal::read_segments_jsonl(g.path(o.val));
  if (in.train.empty() || val.empty()) throw ConfigError("training and validation sets must not be empty");
  const fs::path bank_path = g.path(o.bank);
  if (fs::exists(bank_path)) in.bank = augment::MaBank::load_jsonl(bank_path);
  in.validation =
      augment::static_validation_pairs(val, in.bank, ranges, derive_seed(g.seed, {kValidationStream}), g.jobs);
  return in;
}

distill::TrainConfig train_config(const Globals& g, const TrainOptions& o, const std::string& tag) {
  distill::TrainConfig c;
  c.optim = g.config.optim();
  if (o.epochs) c.optim.epochs = *o.epochs;
  if (o.batch_size) c.optim.batch_size = *o.batch_size;
  c.optim.validate();
  c.ranges = g.config.ranges();
  c.weights = g.config.loss_weights();
  c.grad_clip = g.config.grad_clip();
  c.seed = g.seed;
  c.jobs = g.jobs;
  c.out_dir = g.path(o.out.empty() ? fs::path("runs") / tag : o.out);
  c.tag = tag;
  c.save_state = true;
  c.on_epoch = [tag](const distill::EpochRecord& e) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s epoch %zu: lr %.3g train %.5f val_mae %.5f val_snr_imp %.3f dB",
                  tag.c_str(), e.epoch, e.lr, e.train_total, e.val_mae, e.val_snr_imp);
    note(buf);
  };
  return c;
}

ordered_json run_summary(const distill::TrainRun& run, distill::TrainMode mode, const distill::TrainConfig& c,
                         std::size_t train_segments, std::size_t val_segments) {
  ordered_json j;
  j["tag"] = run.tag;
  j["mode"] = std::string(distill::to_string(mode));
  j["seed"] = run.seed;
  j["epochs"] = run.epochs.size();
  j["batch_size"] = c.optim.batch_size;
  j["train_segments"] = train_segments;
  j["val_segments"] = val_segments;
  j["steps"] = run.batches.size();
  if (run.best_epoch) {
    j["best_epoch"] = *run.best_epoch;
    j["best_val_mae"] = run.best_val_mae;
    j["best_val_snr_imp"] = run.epochs.at(*run.best_epoch).val_snr_imp;
  } else {
    j["best_epoch"] = nullptr;
    j["best_val_mae"] = nullptr;
    j["best_val_snr_imp"] = nullptr;
  }
  j["final_train_total"] = run.epochs.empty() ? 0.0 : run.epochs.back().train_total;
  j["max_composition_error"] = run.max_composition_error;
  j["checkpoint"] = run.best_checkpoint.filename().string();
  j["log"] = run.log_path.filename().string();
  return j;
}

int train(const Globals& g, const TrainOptions& o, distill::TrainMode mode) {
  const std::string tag(distill::to_string(mode));
  auto cfg = train_config(g, o, tag);
  const auto inputs = load_inputs(g, o, cfg.ranges);

  std::optional<models::ModelGraph> teacher;
  std::optional<distill::ProjectionSet> projections;
  models::ModelGraph model;
  if (mode == distill::TrainMode::teacher) {
    model = models::build_teacher(g.config.teacher_model(), derive_seed(g.seed, {kModelStream, 0}));
  } else {
    model = models::build_student(g.config.student_model(), derive_seed(g.seed, {kModelStream, 1}));
  }
  if (mode == distill::TrainMode::student_kd) {
    const fs::path tp = g.path(o.teacher);
    if (!fs::exists(tp)) throw ConfigError("teacher weights not found: " + tp.string());
    teacher = models::load_model(tp);
    projections.emplace(model.config(), teacher->config(), derive_seed(g.seed, {kProjectionStream}));
  }

  distill::Trainer trainer(mode, model, cfg, teacher ? &*teacher : nullptr, projections ? &*projections : nullptr);
  if (o.resume) {
    if (trainer.resume()) {
      note(tag + ": resumed after epoch " + std::to_string(trainer.epochs_done()));
    } else {
      note(tag + ": no saved state, starting fresh");
    }
  }
  const auto run = trainer.run(inputs.train, inputs.validation, inputs.bank);
  write_json(cfg.out_dir / (tag + "_summary.json"),
             run_summary(run, mode, cfg, inputs.train.size(), inputs.validation.size()));
  note(tag + ": " + std::to_string(run.epochs.size()) + " epochs, checkpoint " + run.best_checkpoint.string());
  return 0;
}

}  // namespace

int cmd_train_teacher(const Globals& g, const TrainOptions& o) {
  return train(g, o, distill::TrainMode::teacher);
}

int cmd_distill(const Globals& g, const TrainOptions& o) {
  return train(g, o, o.no_kd ? distill::TrainMode::student : distill::TrainMode::student_kd);
}

}  // namespace edakd::cli
