#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "edakd/errors.hpp"
#include "edakd/tensor/ops.hpp"

namespace edakd::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape " + tensor::to_string(a.shape()) + " vs " +
                     tensor::to_string(b.shape()));
  }
}

// Elementwise unary op with derivative evaluated from the saved input.
template <class F, class DF>
Var unary(Var input, F f, DF df) {
  const Tensor& x = input.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  const std::size_t in_id = input.id();
  return input.graph().record(std::move(out), {input}, [=](Graph& g, std::size_t self) {
    const auto dy = g.grad(self);
    const Tensor& xv = g.value(in_id);
    auto dx = g.grad_buffer(in_id);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * df(xv[i]);
  });
}

}  // namespace

Var leaky_relu(Var input, double slope) {
  return unary(
      input, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

Var gelu(Var input) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt_2pi = 0.39894228040143267794;
  return unary(
      input, [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
      [](double v) {
        return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) + v * inv_sqrt_2pi * std::exp(-0.5 * v * v);
      });
}

Var linear(Var input, Var weight, std::optional<Var> bias) {
  const Tensor& x = input.value();
  const Tensor& w = weight.value();
  if (w.rank() != 2) throw ShapeError("linear weight must be [out,in], got " + tensor::to_string(w.shape()));
  const std::size_t out_f = w.dim(0), in_f = w.dim(1);
  std::size_t rows = 0;
  Shape out_shape;
  if (x.rank() == 1 && x.dim(0) == in_f) {
    rows = 1;
    out_shape = {out_f};
  } else if (x.rank() == 2 && x.dim(1) == in_f) {
    rows = x.dim(0);
    out_shape = {rows, out_f};
  } else {
    throw ShapeError("linear input " + tensor::to_string(x.shape()) + " incompatible with weight " +
                     tensor::to_string(w.shape()));
  }
  if (bias && (bias->value().rank() != 1 || bias->value().size() != out_f)) {
    throw ShapeError("linear bias must have " + std::to_string(out_f) + " entries");
  }
  input.graph().count_macs(static_cast<std::uint64_t>(rows * in_f * out_f));

  Tensor out(out_shape);
  {
    ConstMatMap xm(x.data(), rows, in_f);
    ConstMatMap wm(w.data(), out_f, in_f);
    MatMap om(out.data(), rows, out_f);
    om.noalias() = xm * wm.transpose();
    if (bias) {
      const Tensor& b = bias->value();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t o = 0; o < out_f; ++o) om(r, o) += b[o];
    }
  }
  const std::size_t in_id = input.id(), w_id = weight.id();
  const std::optional<std::size_t> b_id =
      bias ? std::optional<std::size_t>(bias->id()) : std::nullopt;
  std::vector<Var> inputs{input, weight};
  if (bias) inputs.push_back(*bias);
  return input.graph().record(std::move(out), inputs, [=](Graph& g, std::size_t self) {
    ConstMatMap dy(g.grad(self).data(), rows, out_f);
    if (g.needs_grad(in_id)) {
      ConstMatMap wm(g.value(w_id).data(), out_f, in_f);
      MatMap dx(g.grad_buffer(in_id).data(), rows, in_f);
      dx.noalias() += dy * wm;
    }
    if (g.needs_grad(w_id)) {
      ConstMatMap xm(g.value(in_id).data(), rows, in_f);
      MatMap dw(g.grad_buffer(w_id).data(), out_f, in_f);
      dw.noalias() += dy.transpose() * xm;
    }
    if (b_id && g.needs_grad(*b_id)) {
      auto db = g.grad_buffer(*b_id);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t o = 0; o < out_f; ++o) db[o] += dy(r, o);
    }
  });
}

Var softmax(Var input) {
  const Tensor& x = input.value();
  const std::size_t cols = x.shape().back();
  const std::size_t rows = x.size() / cols;
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    double* yr = out.data() + r * cols;
    const double m = *std::max_element(xr, xr + cols);
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      yr[j] = std::exp(xr[j] - m);
      s += yr[j];
    }
    for (std::size_t j = 0; j < cols; ++j) yr[j] /= s;
  }
  const std::size_t in_id = input.id();
  Tensor saved = out;
  return input.graph().record(std::move(out), {input},
                              [=, y = std::move(saved)](Graph& g, std::size_t self) {
                                const auto dy = g.grad(self);
                                auto dx = g.grad_buffer(in_id);
                                for (std::size_t r = 0; r < rows; ++r) {
                                  double dot = 0.0;
                                  for (std::size_t j = 0; j < cols; ++j)
                                    dot += dy[r * cols + j] * y[r * cols + j];
                                  for (std::size_t j = 0; j < cols; ++j)
                                    dx[r * cols + j] += y[r * cols + j] * (dy[r * cols + j] - dot);
                                }
                              });
}

Var concat(std::span<const Var> inputs) {
  if (inputs.empty()) throw ShapeError("concat of zero tensors");
  const std::size_t length = inputs.front().value().rank() == 2 ? inputs.front().value().dim(1) : 0;
  std::size_t channels = 0;
  for (const auto& v : inputs) {
    const Tensor& t = v.value();
    if (t.rank() != 2 || t.dim(1) != length) {
      throw ShapeError("concat expects [C,L] inputs with equal L, got " + tensor::to_string(t.shape()));
    }
    channels += t.dim(0);
  }
  Tensor out({channels, length});
  std::vector<std::size_t> ids, offsets;
  std::size_t offset = 0;
  for (const auto& v : inputs) {
    const Tensor& t = v.value();
    std::copy(t.values().begin(), t.values().end(), out.values().begin() + offset);
    ids.push_back(v.id());
    offsets.push_back(offset);
    offset += t.size();
  }
  Graph& graph = inputs.front().graph();
  return graph.record(std::move(out), inputs, [ids, offsets](Graph& g, std::size_t self) {
    const auto dy = g.grad(self);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!g.needs_grad(ids[i])) continue;
      auto dx = g.grad_buffer(ids[i]);
      for (std::size_t j = 0; j < dx.size(); ++j) dx[j] += dy[offsets[i] + j];
    }
  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out(a.value().shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  const std::size_t a_id = a.id(), b_id = b.id();
  return a.graph().record(std::move(out), {a, b}, [=](Graph& g, std::size_t self) {
    const auto dy = g.grad(self);
    for (std::size_t id : {a_id, b_id}) {
      if (!g.needs_grad(id)) continue;
      auto dx = g.grad_buffer(id);
      for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
    }
  });
}

Var add_scalar(Var a, double c) {
  Tensor out(a.value().shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + c;
  const std::size_t a_id = a.id();
  return a.graph().record(std::move(out), {a}, [=](Graph& g, std::size_t self) {
    const auto dy = g.grad(self);
    auto dx = g.grad_buffer(a_id);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
  });
}

Var scale(Var a, double c) {
  Tensor out(a.value().shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * c;
  const std::size_t a_id = a.id();
  return a.graph().record(std::move(out), {a}, [=](Graph& g, std::size_t self) {
    const auto dy = g.grad(self);
    auto dx = g.grad_buffer(a_id);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * c;
  });
}

Var channel_affine(Var input, Var gamma, Var beta) {
  const Tensor& x = input.value();
  if (x.rank() != 2) throw ShapeError("channel_affine expects [C,L], got " + tensor::to_string(x.shape()));
  const std::size_t channels = x.dim(0), length = x.dim(1);
  if (gamma.value().size() != channels || beta.value().size() != channels) {
    throw ShapeError("channel_affine: gamma/beta must have " + std::to_string(channels) + " entries");
  }
  Tensor out(x.shape());
  const Tensor& ga = gamma.value();
  const Tensor& be = beta.value();
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t t = 0; t < length; ++t) out[c * length + t] = ga[c] * x[c * length + t] + be[c];
  const std::size_t x_id = input.id(), g_id = gamma.id(), b_id = beta.id();
  return input.graph().record(std::move(out), {input, gamma, beta}, [=](Graph& g, std::size_t self) {
    const auto dy = g.grad(self);
    if (g.needs_grad(x_id)) {
      const Tensor& gv = g.value(g_id);
      auto dx = g.grad_buffer(x_id);
      for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * gv[i / length];
    }
    if (g.needs_grad(g_id)) {
      const Tensor& xv = g.value(x_id);
      auto dg = g.grad_buffer(g_id);
      for (std::size_t i = 0; i < dy.size(); ++i) dg[i / length] += dy[i] * xv[i];
    }
    if (g.needs_grad(b_id)) {
      auto db = g.grad_buffer(b_id);
      for (std::size_t i = 0; i < dy.size(); ++i) db[i / length] += dy[i];
    }
  });
}

Var mse(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mse");
  const std::size_t n = a.value().size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.value()[i] - b.value()[i];
    s += d * d;
  }
  const std::size_t a_id = a.id(), b_id = b.id();
  return a.graph().record(Tensor::scalar(s / static_cast<double>(n)), {a, b},
                          [=](Graph& g, std::size_t self) {
                            const double dy = g.grad(self)[0];
                            const Tensor& av = g.value(a_id);
                            const Tensor& bv = g.value(b_id);
                            const double k = 2.0 * dy / static_cast<double>(n);
                            if (g.needs_grad(a_id)) {
                              auto da = g.grad_buffer(a_id);
                              for (std::size_t i = 0; i < n; ++i) da[i] += k * (av[i] - bv[i]);
                            }
                            if (g.needs_grad(b_id)) {
                              auto db = g.grad_buffer(b_id);
                              for (std::size_t i = 0; i < n; ++i) db[i] -= k * (av[i] - bv[i]);
                            }
                          });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t a_id = a.id();
  return a.graph().record(Tensor::scalar(s), {a}, [=](Graph& g, std::size_t self) {
    const double dy = g.grad(self)[0];
    auto dx = g.grad_buffer(a_id);
    for (double& v : dx) v += dy;
  });
}

}  // namespace edakd::ops
