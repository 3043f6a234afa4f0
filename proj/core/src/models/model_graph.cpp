#include <string>

#include "edakd/errors.hpp"
#include "edakd/models/model.hpp"
#include "edakd/rng.hpp"
#include "edakd/tensor/ops.hpp"

namespace edakd::models {

namespace {

std::string block_name(const char* prefix, std::size_t i) { return prefix + std::to_string(i + 1); }

}  // namespace

void ModelGraph::add_layer(std::string name, std::string type) {
  layers_.push_back({std::move(name), std::move(type)});
}

void ModelGraph::add_conv(const std::string& name, std::size_t c_out, std::size_t c_in,
                          std::size_t k, bool bias, std::uint64_t seed) {
  const std::size_t fan_in = c_in * k;
  params_.add(name + ".weight", uniform_fan_in({c_out, c_in, k}, fan_in, derive_seed(seed, {0})));
  if (bias) params_.add(name + ".bias", uniform_fan_in({c_out}, fan_in, derive_seed(seed, {1})));
  add_layer(name, "conv1d");
}

void ModelGraph::add_separable(const std::string& name, std::size_t c_out, std::size_t c_in,
                               std::size_t k, std::uint64_t seed) {
  params_.add(name + ".dw.weight", uniform_fan_in({c_in, 1, k}, k, derive_seed(seed, {0})));
  params_.add(name + ".pw.weight", uniform_fan_in({c_out, c_in, 1}, c_in, derive_seed(seed, {1})));
  params_.add(name + ".pw.bias", uniform_fan_in({c_out}, c_in, derive_seed(seed, {2})));
  add_layer(name, "ds_conv1d");
}

void ModelGraph::add_norm(const std::string& name, std::size_t channels, const char* type) {
  params_.add(name + ".gamma", Tensor({channels}, 1.0));
  params_.add(name + ".beta", Tensor({channels}, 0.0));
  add_layer(name, type);
}

void ModelGraph::add_film(const std::string& name, std::size_t channels) {
  params_.add(name + ".w_gamma", Tensor({channels, 1}, 0.0));
  params_.add(name + ".b_gamma", Tensor({channels}, 0.0));
  params_.add(name + ".w_beta", Tensor({channels, 1}, 0.0));
  params_.add(name + ".b_beta", Tensor({channels}, 0.0));
  add_layer(name, "film");
}

ModelGraph::ModelGraph(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  const bool teacher = config_.kind == ModelKind::teacher;
  const std::size_t k = config_.kernel;
  std::uint64_t layer_counter = 0;
  auto next_seed = [&] { return derive_seed(seed, {layer_counter++}); };

  std::size_t c_prev = 1;
  for (std::size_t i = 0; i < kEncoderBlocks; ++i) {
    const std::size_t c = config_.encoder_channels[i];
    const std::string b = block_name("enc", i);
    if (teacher) {
      add_conv(b + ".conv1", c, c_prev, k, true, next_seed());
    } else {
      add_separable(b + ".conv1", c, c_prev, k, next_seed());
    }
    add_norm(b + ".norm1", c, "group_norm");
    if (config_.film) add_film(b + ".film", c);
    if (teacher) {
      add_conv(b + ".conv2", c, c, k, true, next_seed());
    } else {
      add_separable(b + ".conv2", c, c, k, next_seed());
    }
    add_norm(b + ".norm2", c, "group_norm");
    add_conv(b + ".skip", c, c_prev, 1, true, next_seed());
    c_prev = c;
  }

  if (teacher) {
    const std::size_t c = config_.encoder_channels.back();
    const std::uint64_t s = next_seed();
    const char* names[] = {"wq", "wk", "wv", "wo"};
    const char* biases[] = {"bq", "bk", "bv", "bo"};
    for (int j = 0; j < 4; ++j) {
      params_.add(std::string("bottleneck.attn.") + names[j],
                  uniform_fan_in({c, c, 1}, c, derive_seed(s, {static_cast<std::uint64_t>(2 * j)})));
      params_.add(std::string("bottleneck.attn.") + biases[j],
                  uniform_fan_in({c}, c, derive_seed(s, {static_cast<std::uint64_t>(2 * j + 1)})));
    }
    add_layer("bottleneck.attn", "multi_head_attention");
    add_norm("bottleneck.norm1", c, "layer_norm");
    const std::size_t hidden = c * config_.ffn_expansion;
    add_conv("bottleneck.ffn1", hidden, c, config_.ffn_kernel, true, next_seed());
    add_conv("bottleneck.ffn2", c, hidden, config_.ffn_kernel, true, next_seed());
    add_norm("bottleneck.norm2", c, "layer_norm");
  }

  const auto dec = config_.decoder_channels();
  std::size_t c_in = config_.encoder_channels.back();
  for (std::size_t j = 0; j < kEncoderBlocks; ++j) {
    const std::size_t c_out = dec[j];
    const std::size_t c_skip = j + 1 < kEncoderBlocks ? config_.encoder_channels[3 - j] : 1;
    const std::string d = block_name("dec", j);
    const std::uint64_t s = next_seed();
    // PyTorch computes the transposed-conv fan-in from weight.size(1) * K.
    params_.add(d + ".up.weight", uniform_fan_in({c_in, c_out, 4}, c_out * 4, derive_seed(s, {0})));
    params_.add(d + ".up.bias", uniform_fan_in({c_out}, c_out * 4, derive_seed(s, {1})));
    add_layer(d + ".up", "conv_transpose1d");
    add_conv(d + ".fuse", c_out, c_out + c_skip, k, true, next_seed());
    add_norm(d + ".norm", c_out, "group_norm");
    c_in = c_out;
  }
  add_conv("head", 1, c_in, 1, true, next_seed());
}

std::size_t ModelGraph::param(const std::string& name) const {
  const auto idx = params_.find(name);
  if (!idx) throw ConfigError("model has no parameter named " + name);
  return *idx;
}

Var ModelGraph::p(Graph& g, const std::string& name) const { return g.parameter(params_, param(name)); }

Var ModelGraph::conv(Graph& g, const std::string& layer, Var x, std::size_t stride,
                     std::size_t padding) const {
  tensor::ScopeGuard scope(g, layer);
  return ops::conv1d(x, p(g, layer + ".weight"), p(g, layer + ".bias"), {stride, padding, 1});
}

Var ModelGraph::separable(Graph& g, const std::string& layer, Var x, std::size_t stride,
                          std::size_t padding) const {
  tensor::ScopeGuard scope(g, layer);
  return ops::depthwise_separable_conv1d(x, p(g, layer + ".dw.weight"), std::nullopt,
                                         p(g, layer + ".pw.weight"), p(g, layer + ".pw.bias"),
                                         stride, padding);
}

Var ModelGraph::norm(Graph& g, const std::string& layer, Var x) const {
  tensor::ScopeGuard scope(g, layer);
  return ops::group_norm(x, norm_groups(x.shape()[0]), p(g, layer + ".gamma"),
                         p(g, layer + ".beta"));
}

Var ModelGraph::film(Graph& g, const std::string& layer, Var x, const signal::NormStats& stats,
                     const ForwardOptions& options) const {
  if (!config_.film || options.bypass_film) return x;
  tensor::ScopeGuard scope(g, layer);
  return film_modulate(g, x, stats, params_, layer);
}

Var ModelGraph::encoder_block(Graph& g, std::size_t i, Var x, const signal::NormStats& stats,
                              const ForwardOptions& options) const {
  const std::string b = block_name("enc", i);
  const std::size_t pad = config_.kernel / 2;
  const bool teacher = config_.kind == ModelKind::teacher;
  Var h = teacher ? conv(g, b + ".conv1", x, 2, pad) : separable(g, b + ".conv1", x, 2, pad);
  h = norm(g, b + ".norm1", h);
  h = film(g, b + ".film", h, stats, options);
  h = ops::leaky_relu(h, kLeakySlope);
  h = teacher ? conv(g, b + ".conv2", h, 1, pad) : separable(g, b + ".conv2", h, 1, pad);
  h = norm(g, b + ".norm2", h);
  const Var skip = conv(g, b + ".skip", x, 2, 0);
  return ops::leaky_relu(ops::add(h, skip), kLeakySlope);
}

Var ModelGraph::bottleneck(Graph& g, Var x) const {
  Var a;
  {
    tensor::ScopeGuard scope(g, "bottleneck.attn");
    const ops::AttentionParams ap{p(g, "bottleneck.attn.wq"), p(g, "bottleneck.attn.bq"),
                                  p(g, "bottleneck.attn.wk"), p(g, "bottleneck.attn.bk"),
                                  p(g, "bottleneck.attn.wv"), p(g, "bottleneck.attn.bv"),
                                  p(g, "bottleneck.attn.wo"), p(g, "bottleneck.attn.bo")};
    a = ops::multi_head_attention(x, config_.heads, ap);
  }
  Var h;
  {
    tensor::ScopeGuard scope(g, "bottleneck.norm1");
    h = ops::layer_norm(ops::add(x, a), p(g, "bottleneck.norm1.gamma"),
                        p(g, "bottleneck.norm1.beta"));
  }
  const std::size_t pad = config_.ffn_kernel / 2;
  Var f = conv(g, "bottleneck.ffn1", h, 1, pad);
  f = ops::gelu(f);
  f = conv(g, "bottleneck.ffn2", f, 1, pad);
  tensor::ScopeGuard scope(g, "bottleneck.norm2");
  return ops::layer_norm(ops::add(h, f), p(g, "bottleneck.norm2.gamma"),
                         p(g, "bottleneck.norm2.beta"));
}

Var ModelGraph::decoder_stage(Graph& g, std::size_t j, Var x, Var skip) const {
  const std::string d = block_name("dec", j);
  Var up;
  {
    tensor::ScopeGuard scope(g, d + ".up");
    up = ops::conv_transpose1d(x, p(g, d + ".up.weight"), p(g, d + ".up.bias"), 2, 1);
  }
  const std::array<Var, 2> parts{up, skip};
  Var h = conv(g, d + ".fuse", ops::concat(parts), 1, config_.kernel / 2);
  h = norm(g, d + ".norm", h);
  return ops::leaky_relu(h, kLeakySlope);
}

ForwardResult ModelGraph::forward(Graph& g, Var input, const signal::NormStats& stats,
                                  const ForwardOptions& options) const {
  if (input.shape() != tensor::Shape{1, config_.input_length}) {
    throw ShapeError("model input must be [1, " + std::to_string(config_.input_length) + "], got " +
                     tensor::to_string(input.shape()));
  }
  ForwardResult r;
  Var x = input;
  for (std::size_t i = 0; i < kEncoderBlocks; ++i) {
    x = encoder_block(g, i, x, stats, options);
    r.taps[i] = x;
  }
  if (config_.kind == ModelKind::teacher) x = bottleneck(g, x);
  for (std::size_t j = 0; j < kEncoderBlocks; ++j) {
    const Var skip = j + 1 < kEncoderBlocks ? r.taps[3 - j] : input;
    x = decoder_stage(g, j, x, skip);
  }
  r.output = conv(g, "head", x, 1, 0);
  return r;
}

std::vector<double> ModelGraph::predict_normalized(std::span<const double> input,
                                                   const signal::NormStats& stats,
                                                   const ForwardOptions& options) const {
  Graph g(false);
  const Var x = g.constant(Tensor({1, input.size()}, std::vector<double>(input.begin(), input.end())));
  const auto r = forward(g, x, stats, options);
  const auto v = r.output.value().values();
  return {v.begin(), v.end()};
}

ModelGraph build_teacher(const ModelConfig& config, std::uint64_t seed) {
  if (config.kind != ModelKind::teacher) throw ConfigError("build_teacher needs a teacher config");
  return ModelGraph(config, seed);
}

ModelGraph build_student(const ModelConfig& config, std::uint64_t seed) {
  if (config.kind != ModelKind::student) throw ConfigError("build_student needs a student config");
  return ModelGraph(config, seed);
}

ModelGraph build_model(const ModelConfig& config, std::uint64_t seed) { return ModelGraph(config, seed); }

}  // namespace edakd::models
