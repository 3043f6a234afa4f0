#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "../support/gradcheck.hpp"
#include "edakd/errors.hpp"
#include "edakd/tensor/optim.hpp"

namespace {

using namespace edakd;
using edakd::testing::grad_check;
using edakd::testing::random_tensor;
using tensor::Graph;
using tensor::ParameterSet;
using tensor::Shape;
using tensor::Tensor;

Tensor make(Shape s, std::vector<double> v) { return Tensor(std::move(s), std::move(v)); }

TEST(Conv1d, IdentityKernel) {
  Graph g(false);
  auto y = ops::conv1d(g.constant(make({1, 5}, {1, 2, 3, 4, 5})), g.constant(make({1, 1, 3}, {0, 1, 0})),
                       std::nullopt, {1, 1, 1});
  EXPECT_EQ(y.value(), make({1, 5}, {1, 2, 3, 4, 5}));
}

TEST(Conv1d, BoxSumStrideTwo) {
  Graph g(false);
  auto y = ops::conv1d(g.constant(make({1, 4}, {1, 1, 1, 1})), g.constant(make({1, 1, 2}, {1, 1})),
                       std::nullopt, {2, 0, 1});
  EXPECT_EQ(y.value(), make({1, 2}, {2, 2}));
}

TEST(Conv1d, OutputLengthFormula) {
  for (std::size_t l : {5u, 8u, 16u, 31u}) {
    for (std::size_t k : {1u, 2u, 3u, 5u}) {
      for (std::size_t s : {1u, 2u, 3u}) {
        for (std::size_t p : {0u, 1u, 2u}) {
          if (l + 2 * p < k) continue;
          Graph g(false);
          auto y = ops::conv1d(g.constant(Tensor({1, l}, 1.0)), g.constant(Tensor({2, 1, k}, 1.0)),
                               std::nullopt, {s, p, 1});
          EXPECT_EQ(y.shape()[1], (l + 2 * p - k) / s + 1);
          EXPECT_EQ(y.shape()[0], 2u);
        }
      }
    }
  }
}

TEST(Conv1d, Errors) {
  Graph g(false);
  auto x = g.constant(Tensor({3, 8}));
  EXPECT_THROW(ops::conv1d(x, g.constant(Tensor({2, 3, 3})), std::nullopt, {1, 0, 2}), ConfigError);
  EXPECT_THROW(ops::conv1d(x, g.constant(Tensor({2, 2, 3})), std::nullopt, {}), ShapeError);
  EXPECT_THROW(ops::conv1d(x, g.constant(Tensor({2, 3, 11})), std::nullopt, {}), ShapeError);
  EXPECT_THROW(ops::conv1d(x, g.constant(Tensor({2, 3, 3})), g.constant(Tensor({3})), {}), ShapeError);
}

TEST(Conv1d, GroupedEqualsPerChannelLoop) {
  std::mt19937_64 rng(3);
  const std::size_t c = 4, l = 13, k = 3;
  const Tensor x = random_tensor({c, l}, rng), w = random_tensor({c, 1, k}, rng);
  Graph g(false);
  const auto y = ops::conv1d(g.constant(x), g.constant(w), std::nullopt, {1, 1, c}).value();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t t = 0; t < l; ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const long idx = static_cast<long>(t + j) - 1;
        if (idx >= 0 && idx < static_cast<long>(l)) acc += w[ch * k + j] * x[ch * l + idx];
      }
      EXPECT_NEAR(y[ch * l + t], acc, 1e-12);
    }
  }
}

TEST(TransposedConv, Example) {
  Graph g(false);
  auto y = ops::conv_transpose1d(g.constant(make({1, 2}, {1, 1})), g.constant(make({1, 1, 2}, {1, 1})),
                                 std::nullopt, 2, 0);
  EXPECT_EQ(y.value(), make({1, 4}, {1, 1, 1, 1}));
  EXPECT_EQ(ops::conv_transpose1d_output_length(16, 4, 2, 1), 32u);
}

TEST(TransposedConv, IsAdjointOfConv) {
  // <conv(x), y> == <x, tconv(y)> with the same weight viewed [C_in, C_out, K].
  std::mt19937_64 rng(9);
  const Tensor x = random_tensor({3, 16}, rng);
  const Tensor w = random_tensor({2, 3, 4}, rng);  // conv: [C_out=2, C_in=3, K]
  Graph g(false);
  const auto cx = ops::conv1d(g.constant(x), g.constant(w), std::nullopt, {2, 1, 1}).value();
  const Tensor y = random_tensor(cx.shape(), rng);
  const auto ty = ops::conv_transpose1d(g.constant(y), g.constant(w), std::nullopt, 2, 1).value();
  ASSERT_EQ(ty.shape(), x.shape());
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < cx.size(); ++i) lhs += cx[i] * y[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * ty[i];
  EXPECT_NEAR(lhs, rhs, 1e-10);
}

TEST(DepthwiseSeparable, ParameterCount) {
  const std::size_t cin = 2, cout = 4, k = 3;
  EXPECT_EQ(tensor::numel({cin, 1, k}) + tensor::numel({cout, cin, 1}), 14u);
}

TEST(DepthwiseSeparable, DeltaEqualsPointwise) {
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor({3, 10}, rng), pw = random_tensor({5, 3, 1}, rng);
  Tensor dw({3, 1, 3});
  for (std::size_t c = 0; c < 3; ++c) dw[c * 3 + 1] = 1.0;
  Graph g(false);
  const auto a = ops::depthwise_separable_conv1d(g.constant(x), g.constant(dw), std::nullopt,
                                                 g.constant(pw), std::nullopt, 1, 1).value();
  const auto b = ops::conv1d(g.constant(x), g.constant(pw), std::nullopt, {}).value();
  EXPECT_EQ(a, b);
}

TEST(DepthwiseSeparable, ChannelMixedCopy) {
  const Tensor x = make({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor dw({2, 1, 3});
  dw[1] = dw[4] = 1.0;
  // Output rows: x0, x1, x0, x1
  const Tensor pw = make({4, 2, 1}, {1, 0, 0, 1, 1, 0, 0, 1});
  Graph g(false);
  const auto y = ops::depthwise_separable_conv1d(g.constant(x), g.constant(dw), std::nullopt,
                                                 g.constant(pw), std::nullopt, 1, 1).value();
  EXPECT_EQ(y, make({4, 3}, {1, 2, 3, 4, 5, 6, 1, 2, 3, 4, 5, 6}));
}

TEST(GroupNorm, ConstantInputIsZero) {
  Graph g(false);
  const auto y = ops::group_norm(g.constant(Tensor({4, 6}, 3.5)), 2, g.constant(Tensor({4}, 1.0)),
                                 g.constant(Tensor({4}, 0.0))).value();
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(GroupNorm, SingleGroupMatchesGlobalStats) {
  std::mt19937_64 rng(5);
  const Tensor x = random_tensor({4, 7}, rng, 3.0);
  Graph g(false);
  const auto y = ops::group_norm(g.constant(x), 1, g.constant(Tensor({4}, 1.0)),
                                 g.constant(Tensor({4}, 0.0)), 1e-5).value();
  double m = 0, v = 0;
  for (double a : x.values()) m += a;
  m /= x.size();
  for (double a : x.values()) v += (a - m) * (a - m);
  v /= x.size();
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], (x[i] - m) / std::sqrt(v + 1e-5), 1e-12);
}

TEST(GroupNorm, PerGroupMoments) {
  std::mt19937_64 rng(6);
  const Tensor x = random_tensor({8, 9}, rng, 2.0);
  Graph g(false);
  const auto y = ops::group_norm(g.constant(x), 4, g.constant(Tensor({8}, 1.0)),
                                 g.constant(Tensor({8}, 0.0)), 0.0).value();
  for (std::size_t grp = 0; grp < 4; ++grp) {
    double m = 0, v = 0;
    for (std::size_t i = grp * 18; i < grp * 18 + 18; ++i) m += y[i];
    m /= 18;
    for (std::size_t i = grp * 18; i < grp * 18 + 18; ++i) v += (y[i] - m) * (y[i] - m);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v / 18, 1.0, 1e-10);
  }
}

TEST(GroupNorm, IndivisibleGroups) {
  Graph g(false);
  EXPECT_THROW(ops::group_norm(g.constant(Tensor({6, 4})), 4, g.constant(Tensor({6})),
                               g.constant(Tensor({6}))),
               ConfigError);
}

TEST(Activations, IdentityAndZeroCases) {
  Graph g(false);
  const Tensor x = make({4}, {-2, -0.5, 0, 3});
  EXPECT_EQ(ops::leaky_relu(g.constant(x), 0.01).value(), make({4}, {-0.02, -0.005, 0, 3}));
  const auto ge = ops::gelu(g.constant(x)).value();
  EXPECT_EQ(ge[2], 0.0);
  EXPECT_NEAR(ge[3], 3 * 0.5 * (1 + std::erf(3 / std::numbers::sqrt2)), 1e-15);
  const auto sm = ops::softmax(g.constant(Tensor({2, 5}, 0.7))).value();
  for (double v : sm.values()) EXPECT_NEAR(v, 0.2, 1e-15);
  EXPECT_EQ(ops::add(g.constant(x), g.constant(Tensor({4}))).value(), x);
  EXPECT_EQ(ops::scale(g.constant(x), 1.0).value(), x);
}

TEST(Linear, IdentityWeight) {
  Graph g(false);
  const Tensor x = make({3}, {1, -2, 5});
  const Tensor w = make({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  EXPECT_EQ(ops::linear(g.constant(x), g.constant(w), std::nullopt).value(), x);
  EXPECT_THROW(ops::linear(g.constant(x), g.constant(Tensor({2, 4})), std::nullopt), ShapeError);
}

TEST(Concat, ShapeContract) {
  Graph g(false);
  std::vector<tensor::Var> parts{g.constant(Tensor({2, 5}, 1.0)), g.constant(Tensor({3, 5}, 2.0))};
  const auto y = ops::concat(parts).value();
  EXPECT_EQ(y.shape(), (Shape{5, 5}));
  EXPECT_EQ(y[9], 1.0);
  EXPECT_EQ(y[10], 2.0);
  std::vector<tensor::Var> bad{g.constant(Tensor({2, 5})), g.constant(Tensor({2, 4}))};
  EXPECT_THROW(ops::concat(bad), ShapeError);
}

TEST(Attention, LengthOneWeightsAreOne) {
  std::mt19937_64 rng(7);
  const std::size_t c = 4;
  Graph g(false);
  auto rv = [&](Shape s) { return g.constant(random_tensor(s, rng)); };
  const ops::AttentionParams p{rv({c, c, 1}), rv({c}), rv({c, c, 1}), rv({c}),
                               rv({c, c, 1}), rv({c}), rv({c, c, 1}), rv({c})};
  const auto x = rv({c, 1});
  std::vector<Tensor> weights;
  const auto y = ops::multi_head_attention(x, 2, p, &weights).value();
  ASSERT_EQ(weights.size(), 2u);
  for (const auto& w : weights) EXPECT_EQ(w[0], 1.0);
  // With a single position the output is O(V(x)).
  const auto v = ops::conv1d(x, p.wv, p.bv, {});
  const auto o = ops::conv1d(v, p.wo, p.bo, {}).value();
  for (std::size_t i = 0; i < c; ++i) EXPECT_NEAR(y[i], o[i], 1e-14);
}

TEST(Attention, RowsSumToOne) {
  std::mt19937_64 rng(8);
  Graph g(false);
  std::vector<Tensor> weights;
  auto q = g.constant(random_tensor({8, 6}, rng, 3.0));
  ops::scaled_dot_product_attention(q, q, q, 2, &weights);
  for (const auto& w : weights) {
    for (std::size_t r = 0; r < 6; ++r) {
      double s = 0;
      for (std::size_t col = 0; col < 6; ++col) s += w.at(r, col);
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
  EXPECT_THROW(ops::scaled_dot_product_attention(q, q, q, 3), ConfigError);
}

TEST(GradCheck, AllOpsAllShapes) {
  const auto cases = edakd::testing::standard_op_cases();
  std::map<std::string, int> per_op;
  std::uint64_t seed = 100;
  for (const auto& c : cases) {
    std::mt19937_64 rng(seed++);
    std::vector<Tensor> inputs;
    for (const auto& s : c.input_shapes) {
      inputs.push_back(random_tensor(s, rng));
      if (c.kinked) edakd::testing::avoid_kink(inputs.back());
    }
    const auto r = grad_check(c.fn, inputs, seed);
    EXPECT_LT(r.max_rel_error, 1e-4) << c.name << " case " << per_op[c.name];
    ++per_op[c.name];
  }
  for (const auto& [name, n] : per_op) EXPECT_GE(n, 5) << name;
}

TEST(Purity, ForwardIsBitIdentical) {
  const auto cases = edakd::testing::standard_op_cases();
  std::mt19937_64 rng(11);
  for (const auto& c : cases) {
    std::vector<Tensor> inputs;
    for (const auto& s : c.input_shapes) inputs.push_back(random_tensor(s, rng));
    Tensor first;
    for (int rep = 0; rep < 2; ++rep) {
      Graph g(false);
      std::vector<tensor::Var> vs;
      for (const auto& t : inputs) vs.push_back(g.constant(t));
      const auto out = c.fn(g, vs).value();
      if (rep == 0) first = out;
      else EXPECT_EQ(first, out) << c.name;
    }
  }
}

ParameterSet scalar_param(double value, double grad) {
  ParameterSet ps;
  ps.add("p", make({1}, {value}));
  ps[0].tensor.set_requires_grad(true);
  ps.zero_grad();
  ps[0].tensor.grad()[0] = grad;
  return ps;
}

TEST(AdamW, ZeroGradZeroDecayUnchanged) {
  tensor::OptimizerConfig cfg;
  cfg.weight_decay = 0.0;
  auto ps = scalar_param(1.5, 0.0);
  tensor::adamw_step(ps, cfg, 0.1, 1);
  EXPECT_EQ(ps[0].tensor[0], 1.5);
}

TEST(AdamW, SingleStepClosedForm) {
  tensor::OptimizerConfig cfg;
  cfg.weight_decay = 0.0;
  auto ps = scalar_param(1.0, 1.0);
  tensor::adamw_step(ps, cfg, 0.1, 1);
  const double m = (1 - cfg.beta1) * 1.0, v = (1 - cfg.beta2) * 1.0;
  const double mh = m / (1 - cfg.beta1), vh = v / (1 - cfg.beta2);
  const double expect = 1.0 - 0.1 * mh / (std::sqrt(vh) + cfg.eps);
  EXPECT_LT(ps[0].tensor[0], 1.0);
  EXPECT_NEAR(ps[0].tensor[0], expect, 1e-15);
}

TEST(AdamW, DecoupledDecay) {
  tensor::OptimizerConfig cfg;
  cfg.weight_decay = 1e-2;
  auto ps = scalar_param(2.0, 0.0);
  tensor::adamw_step(ps, cfg, 0.1, 1);
  EXPECT_NEAR(ps[0].tensor[0], 2.0 - 0.1 * 1e-2 * 2.0, 1e-15);
}

TEST(AdamW, NonFiniteGradientDiverges) {
  tensor::OptimizerConfig cfg;
  auto ps = scalar_param(2.0, std::nan(""));
  EXPECT_THROW(tensor::adamw_step(ps, cfg, 0.1, 1), TrainingDiverged);
  EXPECT_EQ(ps[0].tensor[0], 2.0);
}

TEST(CosineLr, Endpoints) {
  tensor::OptimizerConfig cfg;
  EXPECT_DOUBLE_EQ(tensor::cosine_lr(0, 200, cfg), 1e-3);
  EXPECT_DOUBLE_EQ(tensor::cosine_lr(200, 200, cfg), 1e-6);
  EXPECT_NEAR(tensor::cosine_lr(100, 200, cfg), (1e-3 + 1e-6) / 2, 1e-12);
  double prev = 1.0;
  for (std::size_t s = 0; s <= 200; ++s) {
    const double lr = tensor::cosine_lr(s, 200, cfg);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(OptimizerConfig, Validation) {
  tensor::OptimizerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.min_lr = 1e-2;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.weight_decay = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ParameterSet, DuplicateNames) {
  ParameterSet ps;
  ps.add("a.b", Tensor({2}));
  EXPECT_THROW(ps.add("a.b", Tensor({2})), ConfigError);
  EXPECT_TRUE(ps[0].first_moment.empty() ||
              std::all_of(ps[0].first_moment.begin(), ps[0].first_moment.end(),
                          [](double v) { return v == 0.0; }));
}

TEST(ClipGrad, ScalesToMaxNorm) {
  auto ps = scalar_param(0.0, 3.0);
  ParameterSet* sets[] = {&ps};
  const double pre = tensor::clip_grad_norm(sets, 1.5);
  EXPECT_DOUBLE_EQ(pre, 3.0);
  EXPECT_DOUBLE_EQ(ps[0].tensor.grad()[0], 1.5);
}

}  // namespace
