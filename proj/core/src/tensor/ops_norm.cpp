#include <cmath>

#include "edakd/errors.hpp"
#include "edakd/tensor/ops.hpp"

namespace edakd::ops {
namespace {

void check_affine(const Var& gamma, const Var& beta, std::size_t channels, const char* op) {
  if (gamma.value().size() != channels || beta.value().size() != channels) {
    throw ShapeError(std::string(op) + " affine parameters must have " +
                     std::to_string(channels) + " entries");
  }
}

}  // namespace

Var group_norm(Var input, std::size_t groups, Var gamma, Var beta, double eps) {
  const Tensor& x = input.value();
  if (x.rank() != 2) throw ShapeError("group_norm expects [C,L], got " + tensor::to_string(x.shape()));
  const std::size_t channels = x.dim(0), length = x.dim(1);
  if (groups == 0 || channels % groups != 0) {
    throw ConfigError("group_norm: " + std::to_string(groups) + " groups do not divide " +
                      std::to_string(channels) + " channels");
  }
  check_affine(gamma, beta, channels, "group_norm");
  const std::size_t per_group = channels / groups;
  const std::size_t n = per_group * length;

  Tensor out(x.shape());
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(groups);
  const Tensor& ga = gamma.value();
  const Tensor& be = beta.value();
  for (std::size_t g = 0; g < groups; ++g) {
    const double* xg = x.data() + g * n;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += xg[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (xg[i] - mean) * (xg[i] - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[g] = inv;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = g * per_group + i / length;
      const double h = (xg[i] - mean) * inv;
      xhat[g * n + i] = h;
      out[g * n + i] = h * ga[c] + be[c];
    }
  }

  const std::size_t in_id = input.id(), g_id = gamma.id(), b_id = beta.id();
  return input.graph().record(
      std::move(out), {input, gamma, beta},
      [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& gr, std::size_t self) {
        const auto dy = gr.grad(self);
        if (gr.needs_grad(g_id) || gr.needs_grad(b_id)) {
          std::vector<double> dg(channels, 0.0), db(channels, 0.0);
          for (std::size_t c = 0; c < channels; ++c) {
            for (std::size_t t = 0; t < length; ++t) {
              dg[c] += dy[c * length + t] * xhat[c * length + t];
              db[c] += dy[c * length + t];
            }
          }
          if (gr.needs_grad(g_id)) {
            auto buf = gr.grad_buffer(g_id);
            for (std::size_t c = 0; c < channels; ++c) buf[c] += dg[c];
          }
          if (gr.needs_grad(b_id)) {
            auto buf = gr.grad_buffer(b_id);
            for (std::size_t c = 0; c < channels; ++c) buf[c] += db[c];
          }
        }
        if (!gr.needs_grad(in_id)) return;
        const Tensor& gv = gr.value(g_id);
        auto dx = gr.grad_buffer(in_id);
        for (std::size_t g = 0; g < groups; ++g) {
          double sum_d = 0.0, sum_dh = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = g * per_group + i / length;
            const double d = dy[g * n + i] * gv[c];
            sum_d += d;
            sum_dh += d * xhat[g * n + i];
          }
          const double scale = inv_std[g] / static_cast<double>(n);
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = g * per_group + i / length;
            const double d = dy[g * n + i] * gv[c];
            dx[g * n + i] += scale * (static_cast<double>(n) * d - sum_d - xhat[g * n + i] * sum_dh);
          }
        }
      });
}

Var layer_norm(Var input, Var gamma, Var beta, double eps) {
  const Tensor& x = input.value();
  if (x.rank() != 2) throw ShapeError("layer_norm expects [C,L], got " + tensor::to_string(x.shape()));
  const std::size_t channels = x.dim(0), length = x.dim(1);
  check_affine(gamma, beta, channels, "layer_norm");
  const Tensor& ga = gamma.value();
  const Tensor& be = beta.value();

  Tensor out(x.shape());
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(length);
  const double n = static_cast<double>(channels);
  for (std::size_t t = 0; t < length; ++t) {
    double mean = 0.0;
    for (std::size_t c = 0; c < channels; ++c) mean += x[c * length + t];
    mean /= n;
    double var = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const double d = x[c * length + t] - mean;
      var += d * d;
    }
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[t] = inv;
    for (std::size_t c = 0; c < channels; ++c) {
      const double h = (x[c * length + t] - mean) * inv;
      xhat[c * length + t] = h;
      out[c * length + t] = h * ga[c] + be[c];
    }
  }

  const std::size_t in_id = input.id(), g_id = gamma.id(), b_id = beta.id();
  return input.graph().record(
      std::move(out), {input, gamma, beta},
      [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& gr, std::size_t self) {
        const auto dy = gr.grad(self);
        if (gr.needs_grad(g_id)) {
          auto buf = gr.grad_buffer(g_id);
          for (std::size_t i = 0; i < dy.size(); ++i) buf[i / length] += dy[i] * xhat[i];
        }
        if (gr.needs_grad(b_id)) {
          auto buf = gr.grad_buffer(b_id);
          for (std::size_t i = 0; i < dy.size(); ++i) buf[i / length] += dy[i];
        }
        if (!gr.needs_grad(in_id)) return;
        const Tensor& gv = gr.value(g_id);
        auto dx = gr.grad_buffer(in_id);
        for (std::size_t t = 0; t < length; ++t) {
          double sum_d = 0.0, sum_dh = 0.0;
          for (std::size_t c = 0; c < channels; ++c) {
            const double d = dy[c * length + t] * gv[c];
            sum_d += d;
            sum_dh += d * xhat[c * length + t];
          }
          const double scale = inv_std[t] / n;
          for (std::size_t c = 0; c < channels; ++c) {
            const double d = dy[c * length + t] * gv[c];
            dx[c * length + t] += scale * (n * d - sum_d - xhat[c * length + t] * sum_dh);
          }
        }
      });
}

}  // namespace edakd::ops
