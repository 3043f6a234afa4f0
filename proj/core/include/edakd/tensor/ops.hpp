#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "edakd/tensor/graph.hpp"

// Differentiable layer primitives. Feature maps are [channels, length].
namespace edakd::ops {

using tensor::Graph;
using tensor::Shape;
using tensor::Tensor;
using tensor::Var;

struct Conv1dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t groups = 1;
};

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                                 std::size_t padding);
std::size_t conv_transpose1d_output_length(std::size_t length, std::size_t kernel,
                                           std::size_t stride, std::size_t padding);

/// Cross-correlation. weight: [C_out, C_in/groups, K], bias: [C_out].
Var conv1d(Var input, Var weight, std::optional<Var> bias, Conv1dOptions options = {});

/// Transposed convolution (groups = 1). weight: [C_in, C_out, K].
Var conv_transpose1d(Var input, Var weight, std::optional<Var> bias, std::size_t stride,
                     std::size_t padding);

/// Depthwise conv (groups = C_in, dw_weight [C_in,1,K]) followed by a pointwise
/// conv (pw_weight [C_out,C_in,1]).
Var depthwise_separable_conv1d(Var input, Var dw_weight, std::optional<Var> dw_bias,
                               Var pw_weight, std::optional<Var> pw_bias, std::size_t stride,
                               std::size_t padding);

/// Normalizes each group of channels over (channels-in-group, length), then
/// applies per-channel gamma/beta ([C]).
Var group_norm(Var input, std::size_t groups, Var gamma, Var beta, double eps = 1e-5);

/// Normalizes over the channel axis independently at every position.
Var layer_norm(Var input, Var gamma, Var beta, double eps = 1e-5);

Var leaky_relu(Var input, double negative_slope);
/// Exact (erf) GELU.
Var gelu(Var input);

/// x: [in] or [rows, in]; weight: [out, in]; bias: [out].
Var linear(Var input, Var weight, std::optional<Var> bias);

/// Softmax along the last axis.
Var softmax(Var input);

/// Concatenation along axis 0 of rank-2 tensors with equal length.
Var concat(std::span<const Var> inputs);

Var add(Var a, Var b);
Var add_scalar(Var a, double c);
Var scale(Var a, double c);

/// x'[c, t] = gamma[c] * x[c, t] + beta[c].
Var channel_affine(Var input, Var gamma, Var beta);

/// Multi-head scaled dot-product attention over the length axis.
/// q, k, v: [C, L]; head h uses channels [h*C/heads, (h+1)*C/heads).
/// When `weights` is given it receives one [L, L] row-stochastic matrix per head.
Var scaled_dot_product_attention(Var q, Var k, Var v, std::size_t heads,
                                 std::vector<Tensor>* weights = nullptr);

struct AttentionParams {
  Var wq, bq, wk, bk, wv, bv, wo, bo;  // projections are [C, C, 1] / [C]
};

/// Self-attention with learned Q/K/V/O projections.
Var multi_head_attention(Var input, std::size_t heads, const AttentionParams& params,
                         std::vector<Tensor>* weights = nullptr);

/// Mean squared error, returns a single-value tensor.
Var mse(Var a, Var b);

/// Sum of all values, returns a single-value tensor.
Var sum(Var a);

}  // namespace edakd::ops
