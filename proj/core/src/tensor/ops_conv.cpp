#include <Eigen/Core>
#include <algorithm>

#include "edakd/errors.hpp"
#include "edakd/tensor/ops.hpp"

namespace edakd::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

// Valid output positions t in [lo, hi) for which t*stride + k - pad lies in [0, length).
struct TapRange {
  std::size_t lo;
  std::size_t hi;
};

TapRange tap_range(std::size_t k, std::size_t length, std::size_t stride, std::size_t pad,
                   std::size_t positions) {
  // t*stride >= pad - k
  std::size_t lo = 0;
  if (pad > k) lo = (pad - k + stride - 1) / stride;
  // t*stride + k - pad <= length - 1  ->  t <= (length - 1 + pad - k) / stride
  std::size_t hi = 0;
  if (length + pad > k) hi = std::min(positions, (length - 1 + pad - k) / stride + 1);
  if (hi < lo) hi = lo;
  return {std::min(lo, positions), hi};
}

// col[(c*K + k), t] = x[c, t*stride + k - pad], zero outside.
void im2col(const double* x, std::size_t channels, std::size_t length, std::size_t kernel,
            std::size_t stride, std::size_t pad, std::size_t positions, double* col) {
  for (std::size_t c = 0; c < channels; ++c) {
    const double* xc = x + c * length;
    for (std::size_t k = 0; k < kernel; ++k) {
      double* row = col + (c * kernel + k) * positions;
      const auto [lo, hi] = tap_range(k, length, stride, pad, positions);
      std::fill(row, row + lo, 0.0);
      if (stride == 1) {
        std::copy(xc + lo + k - pad, xc + hi + k - pad, row + lo);
      } else {
        for (std::size_t t = lo; t < hi; ++t) row[t] = xc[t * stride + k - pad];
      }
      std::fill(row + hi, row + positions, 0.0);
    }
  }
}

// Adjoint of im2col: x[c, t*stride + k - pad] += col[(c*K + k), t].
void col2im_add(const double* col, std::size_t channels, std::size_t length, std::size_t kernel,
                std::size_t stride, std::size_t pad, std::size_t positions, double* x) {
  for (std::size_t c = 0; c < channels; ++c) {
    double* xc = x + c * length;
    for (std::size_t k = 0; k < kernel; ++k) {
      const double* row = col + (c * kernel + k) * positions;
      const auto [lo, hi] = tap_range(k, length, stride, pad, positions);
      for (std::size_t t = lo; t < hi; ++t) xc[t * stride + k - pad] += row[t];
    }
  }
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + " must have rank " + std::to_string(rank) + ", got " +
                     tensor::to_string(t.shape()));
  }
}

void check_bias(const std::optional<Var>& bias, std::size_t channels) {
  if (!bias) return;
  const Tensor& b = bias->value();
  if (b.rank() != 1 || b.size() != channels) {
    throw ShapeError("bias shape " + tensor::to_string(b.shape()) + " does not match " +
                     std::to_string(channels) + " output channels");
  }
}

}  // namespace

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride,
                                 std::size_t padding) {
  if (stride == 0) throw ConfigError("conv1d stride must be positive");
  if (length + 2 * padding < kernel) {
    throw ShapeError("conv1d input length " + std::to_string(length) + " (padding " +
                     std::to_string(padding) + ") shorter than kernel " + std::to_string(kernel));
  }
  return (length + 2 * padding - kernel) / stride + 1;
}

std::size_t conv_transpose1d_output_length(std::size_t length, std::size_t kernel,
                                           std::size_t stride, std::size_t padding) {
  if (stride == 0) throw ConfigError("conv_transpose1d stride must be positive");
  const std::size_t full = (length - 1) * stride + kernel;
  if (full <= 2 * padding) throw ShapeError("conv_transpose1d output length would be empty");
  return full - 2 * padding;
}

Var conv1d(Var input, Var weight, std::optional<Var> bias, Conv1dOptions opt) {
  Graph& graph = input.graph();
  const Tensor& x = input.value();
  const Tensor& w = weight.value();
  require_rank(x, 2, "conv1d input");
  require_rank(w, 3, "conv1d weight");
  const std::size_t c_in = x.dim(0), length = x.dim(1);
  const std::size_t c_out = w.dim(0), cig = w.dim(1), kernel = w.dim(2);
  const std::size_t groups = opt.groups;
  if (groups == 0 || c_in % groups != 0 || c_out % groups != 0) {
    throw ConfigError("conv1d groups=" + std::to_string(groups) + " must divide C_in=" +
                      std::to_string(c_in) + " and C_out=" + std::to_string(c_out));
  }
  if (cig != c_in / groups) {
    throw ShapeError("conv1d weight " + tensor::to_string(w.shape()) + " incompatible with input " +
                     tensor::to_string(x.shape()) + " and groups=" + std::to_string(groups));
  }
  check_bias(bias, c_out);
  const std::size_t stride = opt.stride, pad = opt.padding;
  const std::size_t positions = conv1d_output_length(length, kernel, stride, pad);
  const std::size_t cog = c_out / groups;
  const bool depthwise = cig == 1 && cog == 1;
  const bool pointwise = kernel == 1 && stride == 1 && pad == 0;

  graph.count_macs(static_cast<std::uint64_t>(kernel * cig * c_out * positions));

  Tensor out({c_out, positions});
  if (depthwise) {
    for (std::size_t c = 0; c < c_out; ++c) {
      const double* xc = x.data() + c * length;
      double* oc = out.data() + c * positions;
      for (std::size_t k = 0; k < kernel; ++k) {
        const double wk = w[c * kernel + k];
        const auto [lo, hi] = tap_range(k, length, stride, pad, positions);
        for (std::size_t t = lo; t < hi; ++t) oc[t] += wk * xc[t * stride + k - pad];
      }
    }
  } else {
    std::vector<double> col(pointwise ? 0 : cig * kernel * positions);
    for (std::size_t g = 0; g < groups; ++g) {
      const double* xg = x.data() + g * cig * length;
      if (!pointwise) im2col(xg, cig, length, kernel, stride, pad, positions, col.data());
      ConstMatMap cols(pointwise ? xg : col.data(), cig * kernel, positions);
      ConstMatMap wg(w.data() + g * cog * cig * kernel, cog, cig * kernel);
      MatMap og(out.data() + g * cog * positions, cog, positions);
      og.noalias() = wg * cols;
    }
  }
  if (bias) {
    const Tensor& b = bias->value();
    for (std::size_t c = 0; c < c_out; ++c) {
      double* oc = out.data() + c * positions;
      for (std::size_t t = 0; t < positions; ++t) oc[t] += b[c];
    }
  }

  const std::size_t in_id = input.id(), w_id = weight.id();
  const std::optional<std::size_t> b_id =
      bias ? std::optional<std::size_t>(bias->id()) : std::nullopt;
  std::vector<Var> inputs{input, weight};
  if (bias) inputs.push_back(*bias);
  return graph.record(
      std::move(out), inputs,
      [=](Graph& g, std::size_t self) {
        const auto dy = g.grad(self);
        const Tensor& xv = g.value(in_id);
        const Tensor& wv = g.value(w_id);
        if (b_id && g.needs_grad(*b_id)) {
          auto db = g.grad_buffer(*b_id);
          for (std::size_t c = 0; c < c_out; ++c) {
            double s = 0.0;
            for (std::size_t t = 0; t < positions; ++t) s += dy[c * positions + t];
            db[c] += s;
          }
        }
        const bool need_x = g.needs_grad(in_id);
        const bool need_w = g.needs_grad(w_id);
        if (!need_x && !need_w) return;
        std::span<double> dx = need_x ? g.grad_buffer(in_id) : std::span<double>{};
        std::span<double> dw = need_w ? g.grad_buffer(w_id) : std::span<double>{};
        if (depthwise) {
          for (std::size_t c = 0; c < c_out; ++c) {
            const double* xc = xv.data() + c * length;
            const double* dyc = dy.data() + c * positions;
            for (std::size_t k = 0; k < kernel; ++k) {
              const auto [lo, hi] = tap_range(k, length, stride, pad, positions);
              if (need_w) {
                double s = 0.0;
                for (std::size_t t = lo; t < hi; ++t) s += dyc[t] * xc[t * stride + k - pad];
                dw[c * kernel + k] += s;
              }
              if (need_x) {
                const double wk = wv[c * kernel + k];
                double* dxc = dx.data() + c * length;
                for (std::size_t t = lo; t < hi; ++t) dxc[t * stride + k - pad] += dyc[t] * wk;
              }
            }
          }
          return;
        }
        std::vector<double> col(pointwise ? 0 : cig * kernel * positions);
        for (std::size_t gi = 0; gi < groups; ++gi) {
          ConstMatMap dyg(dy.data() + gi * cog * positions, cog, positions);
          const double* xg = xv.data() + gi * cig * length;
          if (need_w) {
            if (!pointwise) im2col(xg, cig, length, kernel, stride, pad, positions, col.data());
            ConstMatMap cols(pointwise ? xg : col.data(), cig * kernel, positions);
            MatMap dwg(dw.data() + gi * cog * cig * kernel, cog, cig * kernel);
            dwg.noalias() += dyg * cols.transpose();
          }
          if (need_x) {
            ConstMatMap wg(wv.data() + gi * cog * cig * kernel, cog, cig * kernel);
            if (pointwise) {
              MatMap dxg(dx.data() + gi * cig * length, cig, length);
              dxg.noalias() += wg.transpose() * dyg;
            } else {
              MatMap dcol(col.data(), cig * kernel, positions);
              dcol.noalias() = wg.transpose() * dyg;
              col2im_add(col.data(), cig, length, kernel, stride, pad, positions,
                         dx.data() + gi * cig * length);
            }
          }
        }
      });
}

Var conv_transpose1d(Var input, Var weight, std::optional<Var> bias, std::size_t stride,
                     std::size_t padding) {
  Graph& graph = input.graph();
  const Tensor& x = input.value();
  const Tensor& w = weight.value();
  require_rank(x, 2, "conv_transpose1d input");
  require_rank(w, 3, "conv_transpose1d weight");
  const std::size_t c_in = x.dim(0), length = x.dim(1);
  if (w.dim(0) != c_in) {
    throw ShapeError("conv_transpose1d weight " + tensor::to_string(w.shape()) +
                     " incompatible with input " + tensor::to_string(x.shape()));
  }
  const std::size_t c_out = w.dim(1), kernel = w.dim(2);
  check_bias(bias, c_out);
  const std::size_t out_len = conv_transpose1d_output_length(length, kernel, stride, padding);

  graph.count_macs(static_cast<std::uint64_t>(c_in * c_out * kernel * length));

  Tensor out({c_out, out_len});
  {
    std::vector<double> col(c_out * kernel * length);
    ConstMatMap wm(w.data(), c_in, c_out * kernel);
    ConstMatMap xm(x.data(), c_in, length);
    MatMap cm(col.data(), c_out * kernel, length);
    cm.noalias() = wm.transpose() * xm;
    col2im_add(col.data(), c_out, out_len, kernel, stride, padding, length, out.data());
  }
  if (bias) {
    const Tensor& b = bias->value();
    for (std::size_t c = 0; c < c_out; ++c) {
      double* oc = out.data() + c * out_len;
      for (std::size_t t = 0; t < out_len; ++t) oc[t] += b[c];
    }
  }

  const std::size_t in_id = input.id(), w_id = weight.id();
  const std::optional<std::size_t> b_id =
      bias ? std::optional<std::size_t>(bias->id()) : std::nullopt;
  std::vector<Var> inputs{input, weight};
  if (bias) inputs.push_back(*bias);
  return graph.record(std::move(out), inputs, [=](Graph& g, std::size_t self) {
    const auto dy = g.grad(self);
    if (b_id && g.needs_grad(*b_id)) {
      auto db = g.grad_buffer(*b_id);
      for (std::size_t c = 0; c < c_out; ++c) {
        double s = 0.0;
        for (std::size_t t = 0; t < out_len; ++t) s += dy[c * out_len + t];
        db[c] += s;
      }
    }
    const bool need_x = g.needs_grad(in_id);
    const bool need_w = g.needs_grad(w_id);
    if (!need_x && !need_w) return;
    std::vector<double> dcol(c_out * kernel * length);
    im2col(dy.data(), c_out, out_len, kernel, stride, padding, length, dcol.data());
    ConstMatMap dc(dcol.data(), c_out * kernel, length);
    if (need_x) {
      ConstMatMap wm(g.value(w_id).data(), c_in, c_out * kernel);
      MatMap dx(g.grad_buffer(in_id).data(), c_in, length);
      dx.noalias() += wm * dc;
    }
    if (need_w) {
      ConstMatMap xm(g.value(in_id).data(), c_in, length);
      MatMap dw(g.grad_buffer(w_id).data(), c_in, c_out * kernel);
      dw.noalias() += xm * dc.transpose();
    }
  });
}

Var depthwise_separable_conv1d(Var input, Var dw_weight, std::optional<Var> dw_bias,
                               Var pw_weight, std::optional<Var> pw_bias, std::size_t stride,
                               std::size_t padding) {
  const std::size_t c_in = input.value().rank() == 2 ? input.value().dim(0) : 0;
  if (dw_weight.value().rank() != 3 || dw_weight.value().dim(0) != c_in ||
      dw_weight.value().dim(1) != 1) {
    throw ShapeError("depthwise weight " + tensor::to_string(dw_weight.shape()) +
                     " must be [C_in,1,K] for input " + tensor::to_string(input.shape()));
  }
  if (pw_weight.value().rank() != 3 || pw_weight.value().dim(2) != 1) {
    throw ShapeError("pointwise weight must be [C_out,C_in,1], got " +
                     tensor::to_string(pw_weight.shape()));
  }
  Var depth = conv1d(input, dw_weight, dw_bias, {stride, padding, c_in});
  return conv1d(depth, pw_weight, pw_bias, {1, 0, 1});
}

}  // namespace edakd::ops
