#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edakd/augment/plan.hpp"
#include "edakd/distill/losses.hpp"
#include "edakd/models/model.hpp"
#include "edakd/signal/kv_config.hpp"
#include "edakd/signal/synth.hpp"
#include "edakd/tensor/optim.hpp"

namespace edakd::cli {

/// Flat key=value run configuration. Unknown keys are rejected on load.
class RunConfig {
 public:
  RunConfig() = default;
  static RunConfig load(const std::filesystem::path& path, bool allow_out_of_range);
  static const std::vector<std::string>& known_keys();

  signal::SynthConfig synth() const;
  augment::AugmentRanges ranges() const;
  models::ModelConfig teacher_model() const;
  models::ModelConfig student_model() const;
  tensor::OptimizerConfig optim() const;
  distill::LossWeights loss_weights() const;
  double grad_clip() const;

  std::optional<std::uint64_t> seed() const;
  std::optional<int> jobs() const;
  std::size_t size(const std::string& key, std::size_t fallback) const;
  double real(const std::string& key, double fallback) const;

 private:
  signal::KeyValueConfig kv_;
  bool allow_out_of_range_ = false;
};

/// Options shared by every subcommand.
struct Globals {
  std::filesystem::path workdir = ".";
  std::uint64_t seed = 0;
  int jobs = 1;
  RunConfig config;
  bool allow_out_of_range = false;

  std::filesystem::path path(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : workdir / p;
  }
};

}  // namespace edakd::cli
