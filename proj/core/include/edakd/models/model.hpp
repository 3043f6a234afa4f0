#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edakd/signal/segment.hpp"
#include "edakd/tensor/graph.hpp"

namespace edakd::models {

using tensor::Graph;
using tensor::ParameterSet;
using tensor::Tensor;
using tensor::Var;

inline constexpr std::size_t kEncoderBlocks = 5;
inline constexpr double kLeakySlope = 0.01;
inline constexpr std::size_t kNormGroups = 8;

enum class ModelKind { teacher, student };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ModelConfig {
  ModelKind kind = ModelKind::teacher;
  std::array<std::size_t, kEncoderBlocks> encoder_channels{16, 32, 64, 128, 256};
  std::size_t kernel = 3;
  std::size_t input_length = 512;
  bool film = true;
  // Transformer bottleneck (teacher only).
  std::size_t heads = 4;
  std::size_t ffn_expansion = 2;
  std::size_t ffn_kernel = 3;

  /// Throws ConfigError on odd kernels, zero widths, lengths not divisible by
  /// 2^5 or widths not divisible by the head count.
  void validate() const;
  /// Decoder stage output widths: C4, C3, C2, C1, C1.
  std::array<std::size_t, kEncoderBlocks> decoder_channels() const;
};

ModelConfig teacher_config();
/// Student derived from a teacher: every width halved, no bottleneck transformer.
ModelConfig student_config(const ModelConfig& teacher = teacher_config(), bool keep_film = true);

/// GroupNorm group count for `channels` (8, or 1 below 8 channels).
std::size_t norm_groups(std::size_t channels);

struct LayerInfo {
  std::string name;  // parameters of this layer are named "<name>.<...>"
  std::string type;
};

struct ForwardOptions {
  /// Replace every FiLM layer by a pass-through.
  bool bypass_film = false;
};

struct ForwardResult {
  Var output;                              // [1, L], normalized space
  std::array<Var, kEncoderBlocks> taps;    // block i output, [C_i, L / 2^(i+1)]
};

/// Layer list plus parameter table for the teacher or student U-Net.
class ModelGraph {
 public:
  ModelGraph() = default;
  ModelGraph(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  ParameterSet& params() noexcept { return params_; }
  const ParameterSet& params() const noexcept { return params_; }
  const std::vector<LayerInfo>& layers() const noexcept { return layers_; }

  /// `input` is the z-scored segment [1, L]; `stats` are the raw segment's
  /// mean and standard deviation, which condition FiLM.
  ForwardResult forward(Graph& graph, Var input, const signal::NormStats& stats,
                        const ForwardOptions& options = {}) const;

  /// Gradient-free forward on a normalized segment.
  std::vector<double> predict_normalized(std::span<const double> input,
                                         const signal::NormStats& stats,
                                         const ForwardOptions& options = {}) const;

 private:
  std::size_t param(const std::string& name) const;
  Var p(Graph& graph, const std::string& name) const;
  Var conv(Graph& g, const std::string& layer, Var x, std::size_t stride, std::size_t padding) const;
  Var separable(Graph& g, const std::string& layer, Var x, std::size_t stride,
                std::size_t padding) const;
  Var norm(Graph& g, const std::string& layer, Var x) const;
  Var film(Graph& g, const std::string& layer, Var x, const signal::NormStats& stats,
           const ForwardOptions& options) const;
  Var encoder_block(Graph& g, std::size_t block, Var x, const signal::NormStats& stats,
                    const ForwardOptions& options) const;
  Var bottleneck(Graph& g, Var x) const;
  Var decoder_stage(Graph& g, std::size_t stage, Var x, Var skip) const;

  void add_layer(std::string name, std::string type);
  void add_conv(const std::string& name, std::size_t c_out, std::size_t c_in, std::size_t k,
                bool bias, std::uint64_t seed);
  void add_separable(const std::string& name, std::size_t c_out, std::size_t c_in, std::size_t k,
                     std::uint64_t seed);
  void add_norm(const std::string& name, std::size_t channels, const char* type);
  void add_film(const std::string& name, std::size_t channels);

  ModelConfig config_;
  ParameterSet params_;
  std::vector<LayerInfo> layers_;
};

ModelGraph build_teacher(const ModelConfig& config = teacher_config(), std::uint64_t seed = 0);
ModelGraph build_student(const ModelConfig& config = student_config(), std::uint64_t seed = 0);
ModelGraph build_model(const ModelConfig& config, std::uint64_t seed = 0);

/// Applies x' = gamma * x + beta with gamma = W_gamma * mu + b_gamma + 1 and
/// beta = W_beta * sigma + b_beta (per channel). Parameters are looked up as
/// "<prefix>.w_gamma", "<prefix>.b_gamma", "<prefix>.w_beta", "<prefix>.b_beta".
Var film_modulate(Graph& graph, Var x, const signal::NormStats& stats, const ParameterSet& params,
                  const std::string& prefix);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
Tensor uniform_fan_in(tensor::Shape shape, std::size_t fan_in, std::uint64_t seed);
/// Normal(0, sqrt(2/fan_in)) initialization.
Tensor he_normal(tensor::Shape shape, std::size_t fan_in, std::uint64_t seed);

}  // namespace edakd::models
