#include "edakd/distill/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "edakd/distill/train_state.hpp"
#include "edakd/errors.hpp"
#include "edakd/evaluate/metrics.hpp"
#include "edakd/models/archive.hpp"
#include "edakd/models/inference.hpp"
#include "edakd/parallel.hpp"
#include "edakd/signal/io.hpp"
#include "edakd/tensor/ops.hpp"

namespace edakd::distill {

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::teacher: return "teacher";
    case TrainMode::student: return "student";
    case TrainMode::student_kd: return "student_kd";
  }
  return "?";
}

TrainMode parse_train_mode(std::string_view text) {
  if (text == "teacher") return TrainMode::teacher;
  if (text == "student") return TrainMode::student;
  if (text == "student_kd") return TrainMode::student_kd;
  throw ConfigError("unknown training mode '" + std::string(text) + "'");
}

Trainer::Trainer(TrainMode mode, models::ModelGraph& model, TrainConfig config,
                 const models::ModelGraph* teacher, ProjectionSet* projections)
    : mode_(mode),
      model_(model),
      config_(std::move(config)),
      teacher_(teacher),
      projections_(projections) {
  config_.optim.validate();
  config_.ranges.validate(true);
  if (config_.tag.empty()) config_.tag = std::string(to_string(mode));
  if (config_.grad_clip <= 0.0) throw ConfigError("gradient clip norm must be positive");
  const auto kind = model_.config().kind;
  if (mode == TrainMode::teacher && kind != models::ModelKind::teacher) {
    throw ConfigError("teacher training needs a teacher model");
  }
  if (mode != TrainMode::teacher && kind != models::ModelKind::student) {
    throw ConfigError("student training needs a student model");
  }
  if (mode == TrainMode::student_kd) {
    if (teacher_ == nullptr || projections_ == nullptr) {
      throw ConfigError("distillation needs a teacher and projection layers");
    }
    if (teacher_->config().kind != models::ModelKind::teacher) {
      throw ConfigError("distillation source must be a teacher model");
    }
  }
  if (mode != TrainMode::student_kd) projections_ = nullptr;
  run_.tag = config_.tag;
  run_.seed = config_.seed;
}

std::filesystem::path Trainer::checkpoint_path() const {
  return config_.out_dir.empty() ? std::filesystem::path{}
                                 : config_.out_dir / (config_.tag + "_best.edaw");
}

std::filesystem::path Trainer::log_path() const {
  return config_.out_dir.empty() ? std::filesystem::path{}
                                 : config_.out_dir / (config_.tag + "_log.jsonl");
}

std::filesystem::path Trainer::state_path() const {
  return config_.out_dir.empty() ? std::filesystem::path{}
                                 : config_.out_dir / (config_.tag + "_state.edaw");
}

namespace {

struct GradLayout {
  const tensor::ParameterSet* model = nullptr;
  const tensor::ParameterSet* proj = nullptr;
  std::vector<std::size_t> model_offset;
  std::vector<std::size_t> proj_offset;
  std::size_t total = 0;

  GradLayout(const tensor::ParameterSet& m, const tensor::ParameterSet* p) : model(&m), proj(p) {
    for (const auto& prm : m) {
      model_offset.push_back(total);
      total += prm.tensor.size();
    }
    if (p) {
      for (const auto& prm : *p) {
        proj_offset.push_back(total);
        total += prm.tensor.size();
      }
    }
  }

  std::size_t offset(const tensor::ParameterSet& set, std::size_t idx) const {
    if (&set == model) return model_offset[idx];
    if (proj && &set == proj) return proj_offset[idx];
    throw Error("gradient reached a parameter outside the trained sets");
  }
};

struct ItemResult {
  LossBreakdown loss;
};

}  // namespace

LossBreakdown Trainer::train_batch(const std::vector<augment::TrainingPair>& batch,
                                   std::size_t epoch, std::size_t batch_index, double lr) {
  auto& mparams = model_.params();
  tensor::ParameterSet* pparams = projections_ ? &projections_->params() : nullptr;
  const GradLayout layout(mparams, pparams);
  const std::size_t n = batch.size();
  const std::size_t wave = std::max<std::size_t>(1, std::min<std::size_t>(n, config_.jobs));
  std::vector<std::vector<double>> buffers(wave, std::vector<double>(layout.total));
  std::vector<double> grad_sum(layout.total, 0.0);
  std::vector<LossBreakdown> losses(n);

  auto run_item = [&](std::size_t i, std::vector<double>& buf) {
    const auto& pair = batch[i];
    const auto stats = signal::compute_stats(pair.input);
    const auto len = pair.input.size();
    tensor::Graph g(true);
    const Var x = g.constant(Tensor({1, len}, signal::normalize_with(pair.input, stats)));
    const Var y = g.constant(Tensor({1, len}, signal::normalize_with(pair.target, stats)));
    const auto fwd = model_.forward(g, x, stats);

    LossBreakdown lb;
    Var total;
    if (mode_ == TrainMode::teacher) {
      total = loss_teacher(fwd.output, y);
      lb.total = lb.recon = total.value()[0];
    } else {
      std::optional<Tensor> yt;
      std::vector<Tensor> taps_t;
      if (mode_ == TrainMode::student_kd) {
        tensor::Graph tg(false);
        const Var tx = tg.constant(x.value());
        const auto tf = teacher_->forward(tg, tx, stats);
        yt = tf.output.value();
        for (const auto& t : tf.taps) taps_t.push_back(t.value());
      }
      const StudentLoss sl = loss_student(g, y, fwd.output, yt ? &*yt : nullptr, fwd.taps, taps_t,
                                          projections_, config_.weights);
      total = sl.total;
      lb = sl.values;
    }
    if (!std::isfinite(lb.total)) {
      throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + ", segment " +
                             std::to_string(pair.segment_index));
    }
    g.backward(total);
    std::fill(buf.begin(), buf.end(), 0.0);
    g.for_each_parameter_grad([&](const tensor::ParameterSet& set, std::size_t idx,
                                  std::span<const double> grad) {
      const std::size_t off = layout.offset(set, idx);
      for (std::size_t k = 0; k < grad.size(); ++k) buf[off + k] += grad[k];
    });
    losses[i] = lb;
  };

  for (std::size_t start = 0; start < n; start += wave) {
    const std::size_t count = std::min(wave, n - start);
    parallel_for(count, config_.jobs, [&](std::size_t k) { run_item(start + k, buffers[k]); });
    for (std::size_t k = 0; k < count; ++k) {
      const auto& buf = buffers[k];
      for (std::size_t j = 0; j < layout.total; ++j) grad_sum[j] += buf[j];
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  auto scatter = [&](tensor::ParameterSet& set, const std::vector<std::size_t>& offsets) {
    for (std::size_t p = 0; p < set.size(); ++p) {
      auto& t = set[p].tensor;
      if (!t.requires_grad()) continue;
      t.zero_grad();
      auto g = t.grad();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] = grad_sum[offsets[p] + k] * inv_n;
    }
  };
  scatter(mparams, layout.model_offset);
  if (pparams) scatter(*pparams, layout.proj_offset);

  std::vector<tensor::ParameterSet*> sets{&mparams};
  if (pparams) sets.push_back(pparams);
  tensor::clip_grad_norm(sets, config_.grad_clip);
  ++step_;
  try {
    tensor::adamw_step(mparams, config_.optim, lr, step_);
    if (pparams) tensor::adamw_step(*pparams, config_.optim, lr, step_);
  } catch (const TrainingDiverged& e) {
    throw TrainingDiverged("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
  }

  LossBreakdown mean;
  for (const auto& l : losses) {
    mean.total += l.total;
    mean.recon += l.recon;
    mean.kd += l.kd;
    mean.response += l.response;
    mean.feature += l.feature;
  }
  mean.total *= inv_n;
  mean.recon *= inv_n;
  mean.kd *= inv_n;
  mean.response *= inv_n;
  mean.feature *= inv_n;

  if (mode_ != TrainMode::teacher) {
    const double err = composition_error(mean, config_.weights);
    run_.max_composition_error = std::max(run_.max_composition_error, err);
    if (err > config_.identity_tolerance) {
      throw Error("loss composition identity violated by " + std::to_string(err) + " at epoch " +
                  std::to_string(epoch) + ", batch " + std::to_string(batch_index));
    }
  }
  return mean;
}

EpochRecord Trainer::train_epoch(std::size_t epoch, const std::vector<signal::Segment>& pool,
                                 const augment::MaBank& bank) {
  const auto& o = config_.optim;
  EpochRecord rec;
  rec.epoch = epoch;
  rec.lr = tensor::cosine_lr(epoch, std::max<std::size_t>(o.epochs - 1, 1), o);
  const auto batches =
      augment::epoch_batches(pool.size(), o.batch_size, epoch, config_.seed, augment::AugmentMode::dynamic);
  if (batches.empty()) {
    throw ConfigError("training pool of " + std::to_string(pool.size()) +
                      " segments yields no batch of at least 5");
  }
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const auto pairs = augment::make_batch(pool, batches[b], bank, config_.ranges, epoch,
                                           config_.seed, augment::AugmentMode::dynamic, config_.jobs);
    const LossBreakdown l = train_batch(pairs, epoch, b, rec.lr);
    run_.batches.push_back(l);
    rec.train_total += l.total;
    rec.train_recon += l.recon;
    rec.train_response += l.response;
    rec.train_feature += l.feature;
  }
  const double inv = 1.0 / static_cast<double>(batches.size());
  rec.train_total *= inv;
  rec.train_recon *= inv;
  rec.train_response *= inv;
  rec.train_feature *= inv;
  return rec;
}

ValidationScore Trainer::validate(const std::vector<augment::TrainingPair>& validation) const {
  if (validation.empty()) throw ConfigError("validation set is empty");
  std::vector<double> maes(validation.size()), snrs(validation.size());
  parallel_for(validation.size(), config_.jobs, [&](std::size_t i) {
    const auto& p = validation[i];
    const auto est = models::denoise(model_, p.input);
    maes[i] = evaluate::mae(est, p.target);
    snrs[i] = evaluate::snr_improvement(p.input, p.target, est);
  });
  ValidationScore s;
  for (std::size_t i = 0; i < validation.size(); ++i) {
    s.mae += maes[i];
    s.snr_imp += snrs[i];
  }
  s.mae /= static_cast<double>(validation.size());
  s.snr_imp /= static_cast<double>(validation.size());
  return s;
}

bool Trainer::resume() {
  if (config_.out_dir.empty()) return false;
  auto state = load_train_state(state_path(), model_.params(),
                                projections_ ? &projections_->params() : nullptr);
  if (!state) return false;
  step_ = state->step;
  run_.epochs = std::move(state->epochs);
  run_.batches = std::move(state->batches);
  run_.best_epoch = state->best_epoch;
  run_.best_val_mae = state->best_val_mae;
  run_.max_composition_error = state->max_composition_error;
  if (run_.best_epoch) run_.best_checkpoint = checkpoint_path();
  run_.log_path = log_path();
  return true;
}

TrainRun Trainer::run(const std::vector<signal::Segment>& pool,
                      const std::vector<augment::TrainingPair>& validation,
                      const augment::MaBank& bank) {
  if (!config_.out_dir.empty()) std::filesystem::create_directories(config_.out_dir);
  run_.log_path = log_path();
  std::vector<double> seconds;
  for (std::size_t epoch = run_.epochs.size(); epoch < config_.optim.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRecord rec = train_epoch(epoch, pool, bank);
    const ValidationScore v = validate(validation);
    rec.val_mae = v.mae;
    rec.val_snr_imp = v.snr_imp;
    // Strict improvement: on equal MAE the earlier epoch is kept.
    if (!run_.best_epoch || rec.val_mae < run_.best_val_mae) {
      run_.best_epoch = epoch;
      run_.best_val_mae = rec.val_mae;
      if (!config_.out_dir.empty()) {
        models::save_model(checkpoint_path(), model_);
        run_.best_checkpoint = checkpoint_path();
      }
    }
    run_.epochs.push_back(rec);
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (!config_.out_dir.empty()) {
      write_train_log(log_path(), run_.epochs);
      if (config_.save_state) {
        TrainState st{step_, run_.best_epoch, run_.best_val_mae, run_.epochs, run_.batches,
                      run_.max_composition_error};
        save_train_state(state_path(), st, model_.params(),
                         projections_ ? &projections_->params() : nullptr);
      }
      nlohmann::ordered_json timing;
      timing["tag"] = config_.tag;
      timing["epoch_seconds"] = seconds;
      signal::write_text(config_.out_dir / (config_.tag + "_timing.json"), timing.dump(2) + "\n");
    }
    if (config_.on_epoch) config_.on_epoch(rec);
  }
  return run_;
}

void write_train_log(const std::filesystem::path& path, const std::vector<EpochRecord>& epochs) {
  std::vector<signal::OrderedJson> rows;
  for (const auto& e : epochs) {
    signal::OrderedJson j;
    j["epoch"] = e.epoch;
    j["lr"] = e.lr;
    j["train_total"] = e.train_total;
    j["train_recon"] = e.train_recon;
    j["train_response"] = e.train_response;
    j["train_feature"] = e.train_feature;
    j["val_mae"] = e.val_mae;
    j["val_snr_imp"] = e.val_snr_imp;
    rows.push_back(std::move(j));
  }
  signal::write_jsonl(path, rows);
}

std::vector<EpochRecord> read_train_log(const std::filesystem::path& path) {
  std::vector<EpochRecord> out;
  for (const auto& j : signal::read_jsonl(path)) {
    try {
      EpochRecord e;
      e.epoch = j.at("epoch").get<std::size_t>();
      e.lr = j.at("lr").get<double>();
      e.train_total = j.at("train_total").get<double>();
      e.train_recon = j.at("train_recon").get<double>();
      e.train_response = j.at("train_response").get<double>();
      e.train_feature = j.at("train_feature").get<double>();
      e.val_mae = j.at("val_mae").get<double>();
      e.val_snr_imp = j.at("val_snr_imp").get<double>();
      out.push_back(e);
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError(path.string() + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace edakd::distill
