#include <cmath>
#include <random>

#include "edakd/errors.hpp"
#include "edakd/models/model.hpp"
#include "edakd/rng.hpp"
#include "edakd/tensor/ops.hpp"

namespace edakd::models {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::teacher ? "teacher" : "student";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "teacher") return ModelKind::teacher;
  if (text == "student") return ModelKind::student;
  throw ConfigError("unknown model kind '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  if (kernel == 0 || kernel % 2 == 0) throw ConfigError("kernel size must be odd");
  for (std::size_t c : encoder_channels) {
    if (c == 0) throw ConfigError("encoder widths must be positive");
  }
  if (input_length == 0 || input_length % (std::size_t{1} << kEncoderBlocks) != 0) {
    throw ConfigError("input length must be a positive multiple of 32");
  }
  if (kind == ModelKind::teacher) {
    if (heads == 0 || encoder_channels.back() % heads != 0) {
      throw ConfigError("bottleneck width must be divisible by the head count");
    }
    if (ffn_expansion == 0 || ffn_kernel == 0 || ffn_kernel % 2 == 0) {
      throw ConfigError("feed-forward expansion must be positive and its kernel odd");
    }
  }
}

std::array<std::size_t, kEncoderBlocks> ModelConfig::decoder_channels() const {
  const auto& c = encoder_channels;
  return {c[3], c[2], c[1], c[0], c[0]};
}

ModelConfig teacher_config() { return ModelConfig{}; }

ModelConfig student_config(const ModelConfig& teacher, bool keep_film) {
  ModelConfig s = teacher;
  s.kind = ModelKind::student;
  for (auto& c : s.encoder_channels) {
    if (c % 2 != 0) throw ConfigError("teacher widths must be even to halve them");
    c /= 2;
  }
  s.film = keep_film;
  return s;
}

std::size_t norm_groups(std::size_t channels) {
  return channels >= kNormGroups && channels % kNormGroups == 0 ? kNormGroups : 1;
}

Tensor uniform_fan_in(tensor::Shape shape, std::size_t fan_in, std::uint64_t seed) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& v : t.values()) v = u(rng);
  return t;
}

Tensor he_normal(tensor::Shape shape, std::size_t fan_in, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (double& v : t.values()) v = n(rng);
  return t;
}

Var film_modulate(Graph& g, Var x, const signal::NormStats& stats, const ParameterSet& params,
                  const std::string& prefix) {
  auto lookup = [&](const char* leaf) {
    const auto idx = params.find(prefix + "." + leaf);
    if (!idx) throw ConfigError("missing FiLM parameter " + prefix + "." + leaf);
    return g.parameter(params, *idx);
  };
  const Var mu = g.constant(Tensor({1}, {stats.mu}));
  const Var sigma = g.constant(Tensor({1}, {stats.sigma}));
  const Var gamma = ops::add_scalar(ops::linear(mu, lookup("w_gamma"), lookup("b_gamma")), 1.0);
  const Var beta = ops::linear(sigma, lookup("w_beta"), lookup("b_beta"));
  return ops::channel_affine(x, gamma, beta);
}

}  // namespace edakd::models
