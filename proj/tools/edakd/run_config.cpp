#include "run_config.hpp"

#include <algorithm>
#include <sstream>

#include "edakd/errors.hpp"

namespace edakd::cli {

namespace {

const std::vector<std::string> kLocalKeys{
    "seed", "jobs",
    "synth.duration_s", "synth.rate_hz", "synth.tonic_low", "synth.tonic_high",
    "synth.tonic_knot_interval_s", "synth.scr_rate_per_min", "synth.scr_amp_log_mu",
    "synth.scr_amp_log_sigma", "synth.rise_tau_s", "synth.decay_tau_s", "synth.seed",
    "data.subjects", "data.recording_s", "data.overlap", "data.train_fraction",
    "data.train_segments", "data.val_segments", "data.ma_bank_size",
    "cohort.subjects", "cohort.recordings_per_subject", "cohort.baseline_s", "cohort.event_s",
    "model.channels", "model.kernel", "model.heads", "model.ffn_expansion", "model.ffn_kernel",
    "model.film", "model.student_film",
    "optim.base_lr", "optim.min_lr", "optim.weight_decay", "optim.batch_size", "optim.epochs",
    "optim.beta1", "optim.beta2", "optim.eps", "optim.grad_clip",
    "loss.recon_weight", "loss.kd_weight", "loss.feature_weight",
    "evaluate.target_specificity"};

std::array<std::size_t, models::kEncoderBlocks> parse_channels(const std::string& text) {
  std::array<std::size_t, models::kEncoderBlocks> out{};
  std::stringstream ss(text);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == out.size()) throw ConfigError("model.channels needs 5 widths");
    try {
      const long long v = std::stoll(item);
      if (v <= 0) throw ConfigError("model.channels entries must be positive");
      out[n++] = static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      throw ConfigError("model.channels: not an integer: '" + item + "'");
    }
  }
  if (n != out.size()) throw ConfigError("model.channels needs 5 widths");
  return out;
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = [] {
    auto k = kLocalKeys;
    for (auto& a : augment::AugmentRanges::config_keys()) k.push_back(a);
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

RunConfig RunConfig::load(const std::filesystem::path& path, bool allow_out_of_range) {
  RunConfig c;
  c.kv_ = signal::KeyValueConfig::load(path);
  c.allow_out_of_range_ = allow_out_of_range;
  const auto& known = known_keys();
  for (const auto& key : c.kv_.keys()) {
    if (!std::binary_search(known.begin(), known.end(), key)) {
      throw ConfigError(path.string() + ": unknown key '" + key + "'");
    }
  }
  // Fail early rather than at first use.
  c.synth();
  c.ranges();
  c.teacher_model();
  c.optim();
  return c;
}

signal::SynthConfig RunConfig::synth() const { return signal::SynthConfig::from_config(kv_); }

augment::AugmentRanges RunConfig::ranges() const {
  return augment::AugmentRanges::from_config(kv_, allow_out_of_range_);
}

models::ModelConfig RunConfig::teacher_model() const {
  auto m = models::teacher_config();
  if (auto ch = kv_.get("model.channels")) m.encoder_channels = parse_channels(*ch);
  m.kernel = size("model.kernel", m.kernel);
  m.heads = size("model.heads", m.heads);
  m.ffn_expansion = size("model.ffn_expansion", m.ffn_expansion);
  m.ffn_kernel = size("model.ffn_kernel", m.ffn_kernel);
  m.film = kv_.get_bool("model.film", m.film);
  m.validate();
  return m;
}

models::ModelConfig RunConfig::student_model() const {
  const auto t = teacher_model();
  auto s = models::student_config(t, kv_.get_bool("model.student_film", t.film));
  s.validate();
  return s;
}

tensor::OptimizerConfig RunConfig::optim() const {
  tensor::OptimizerConfig o;
  o.base_lr = real("optim.base_lr", o.base_lr);
  o.min_lr = real("optim.min_lr", o.min_lr);
  o.weight_decay = real("optim.weight_decay", o.weight_decay);
  o.batch_size = size("optim.batch_size", o.batch_size);
  o.epochs = size("optim.epochs", o.epochs);
  o.beta1 = real("optim.beta1", o.beta1);
  o.beta2 = real("optim.beta2", o.beta2);
  o.eps = real("optim.eps", o.eps);
  o.validate();
  return o;
}

distill::LossWeights RunConfig::loss_weights() const {
  distill::LossWeights w;
  w.recon_weight = real("loss.recon_weight", w.recon_weight);
  w.kd_weight = real("loss.kd_weight", w.kd_weight);
  w.feature_weight = real("loss.feature_weight", w.feature_weight);
  return w;
}

double RunConfig::grad_clip() const { return real("optim.grad_clip", 5.0); }

std::optional<std::uint64_t> RunConfig::seed() const {
  if (!kv_.has("seed")) return std::nullopt;
  const long long v = kv_.get_int("seed", 0);
  if (v < 0) throw ConfigError("seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

std::optional<int> RunConfig::jobs() const {
  if (!kv_.has("jobs")) return std::nullopt;
  return static_cast<int>(kv_.get_int("jobs", 1));
}

std::size_t RunConfig::size(const std::string& key, std::size_t fallback) const {
  const long long v = kv_.get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

double RunConfig::real(const std::string& key, double fallback) const {
  return kv_.get_double(key, fallback);
}

}  // namespace edakd::cli
