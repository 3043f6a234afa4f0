#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "edakd/errors.hpp"
#include "edakd/tensor/ops.hpp"

namespace edakd::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

}  // namespace

Var scaled_dot_product_attention(Var q, Var k, Var v, std::size_t heads,
                                 std::vector<Tensor>* weights) {
  const Tensor& qt = q.value();
  if (qt.rank() != 2 || k.value().shape() != qt.shape() || v.value().shape() != qt.shape()) {
    throw ShapeError("attention expects equal [C,L] q/k/v");
  }
  const std::size_t channels = qt.dim(0), length = qt.dim(1);
  if (heads == 0 || channels % heads != 0) {
    throw ConfigError("attention: " + std::to_string(heads) + " heads do not divide " +
                      std::to_string(channels) + " channels");
  }
  const std::size_t head_dim = channels / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  q.graph().count_macs(static_cast<std::uint64_t>(2 * length * length * channels));

  // probs[h] is [L_query, L_key].
  std::vector<double> probs(heads * length * length);
  Tensor out({channels, length});
  for (std::size_t h = 0; h < heads; ++h) {
    ConstMatMap qh(qt.data() + h * head_dim * length, head_dim, length);
    ConstMatMap kh(k.value().data() + h * head_dim * length, head_dim, length);
    ConstMatMap vh(v.value().data() + h * head_dim * length, head_dim, length);
    MatMap p(probs.data() + h * length * length, length, length);
    p.noalias() = (qh.transpose() * kh) * inv_scale;
    for (std::size_t i = 0; i < length; ++i) {
      const double m = p.row(i).maxCoeff();
      double s = 0.0;
      for (std::size_t j = 0; j < length; ++j) {
        p(i, j) = std::exp(p(i, j) - m);
        s += p(i, j);
      }
      for (std::size_t j = 0; j < length; ++j) p(i, j) /= s;
    }
    MatMap oh(out.data() + h * head_dim * length, head_dim, length);
    oh.noalias() = vh * p.transpose();
  }
  if (weights) {
    weights->clear();
    for (std::size_t h = 0; h < heads; ++h) {
      weights->emplace_back(
          Shape{length, length},
          std::vector<double>(probs.begin() + static_cast<std::ptrdiff_t>(h * length * length),
                              probs.begin() + static_cast<std::ptrdiff_t>((h + 1) * length * length)));
    }
  }

  const std::size_t q_id = q.id(), k_id = k.id(), v_id = v.id();
  return q.graph().record(
      std::move(out), {q, k, v},
      [=, probs = std::move(probs)](Graph& g, std::size_t self) {
        const auto dy = g.grad(self);
        const Tensor& qv = g.value(q_id);
        const Tensor& kv = g.value(k_id);
        const Tensor& vv = g.value(v_id);
        RowMat dp(length, length), ds(length, length);
        for (std::size_t h = 0; h < heads; ++h) {
          const std::size_t off = h * head_dim * length;
          ConstMatMap dyh(dy.data() + off, head_dim, length);
          ConstMatMap p(probs.data() + h * length * length, length, length);
          ConstMatMap qh(qv.data() + off, head_dim, length);
          ConstMatMap kh(kv.data() + off, head_dim, length);
          ConstMatMap vh(vv.data() + off, head_dim, length);
          if (g.needs_grad(v_id)) {
            MatMap dv(g.grad_buffer(v_id).data() + off, head_dim, length);
            dv.noalias() += dyh * p;
          }
          if (!g.needs_grad(q_id) && !g.needs_grad(k_id)) continue;
          dp.noalias() = dyh.transpose() * vh;
          for (std::size_t i = 0; i < length; ++i) {
            const double dot = dp.row(i).dot(p.row(i));
            for (std::size_t j = 0; j < length; ++j) ds(i, j) = p(i, j) * (dp(i, j) - dot) * inv_scale;
          }
          if (g.needs_grad(q_id)) {
            MatMap dq(g.grad_buffer(q_id).data() + off, head_dim, length);
            dq.noalias() += kh * ds.transpose();
          }
          if (g.needs_grad(k_id)) {
            MatMap dk(g.grad_buffer(k_id).data() + off, head_dim, length);
            dk.noalias() += qh * ds;
          }
        }
      });
}

Var multi_head_attention(Var input, std::size_t heads, const AttentionParams& p,
                         std::vector<Tensor>* weights) {
  const std::size_t channels = input.value().rank() == 2 ? input.value().dim(0) : 0;
  if (heads == 0 || channels == 0 || channels % heads != 0) {
    throw ConfigError("multi_head_attention: " + std::to_string(heads) +
                      " heads do not divide " + std::to_string(channels) + " channels");
  }
  Var q = conv1d(input, p.wq, p.bq);
  Var k = conv1d(input, p.wk, p.bk);
  Var v = conv1d(input, p.wv, p.bv);
  Var context = scaled_dot_product_attention(q, k, v, heads, weights);
  return conv1d(context, p.wo, p.bo);
}

}  // namespace edakd::ops
