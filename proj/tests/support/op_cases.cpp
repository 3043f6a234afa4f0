#include <array>

#include "gradcheck.hpp"

namespace edakd::testing {

namespace {

using ops::Conv1dOptions;

OpCase conv_case(Shape x, Shape w, bool bias, Conv1dOptions o) {
  std::vector<Shape> shapes{x, w};
  if (bias) shapes.push_back({w[0]});
  return {"conv1d", [bias, o](Graph&, const std::vector<Var>& v) {
            return ops::conv1d(v[0], v[1], bias ? std::optional<Var>(v[2]) : std::nullopt, o);
          },
          shapes};
}

OpCase tconv_case(Shape x, Shape w, bool bias, std::size_t stride, std::size_t pad) {
  std::vector<Shape> shapes{x, w};
  if (bias) shapes.push_back({w[1]});
  return {"conv_transpose1d", [=](Graph&, const std::vector<Var>& v) {
            return ops::conv_transpose1d(v[0], v[1], bias ? std::optional<Var>(v[2]) : std::nullopt,
                                         stride, pad);
          },
          shapes};
}

OpCase ds_case(std::size_t cin, std::size_t cout, std::size_t len, std::size_t k, std::size_t stride,
               std::size_t pad) {
  return {"depthwise_separable_conv1d",
          [=](Graph&, const std::vector<Var>& v) {
            return ops::depthwise_separable_conv1d(v[0], v[1], v[2], v[3], v[4], stride, pad);
          },
          {{cin, len}, {cin, 1, k}, {cin}, {cout, cin, 1}, {cout}}};
}

OpCase gn_case(std::size_t c, std::size_t l, std::size_t groups) {
  return {"group_norm",
          [=](Graph&, const std::vector<Var>& v) { return ops::group_norm(v[0], groups, v[1], v[2]); },
          {{c, l}, {c}, {c}}};
}

OpCase ln_case(std::size_t c, std::size_t l) {
  return {"layer_norm", [](Graph&, const std::vector<Var>& v) { return ops::layer_norm(v[0], v[1], v[2]); },
          {{c, l}, {c}, {c}}};
}

OpCase linear_case(Shape x, std::size_t out, bool bias) {
  const std::size_t in = x.back();
  std::vector<Shape> shapes{x, {out, in}};
  if (bias) shapes.push_back({out});
  return {"linear", [bias](Graph&, const std::vector<Var>& v) {
            return ops::linear(v[0], v[1], bias ? std::optional<Var>(v[2]) : std::nullopt);
          },
          shapes};
}

OpCase sdpa_case(std::size_t c, std::size_t l, std::size_t heads) {
  return {"scaled_dot_product_attention",
          [=](Graph&, const std::vector<Var>& v) {
            return ops::scaled_dot_product_attention(v[0], v[1], v[2], heads);
          },
          {{c, l}, {c, l}, {c, l}}};
}

OpCase mha_case(std::size_t c, std::size_t l, std::size_t heads) {
  return {"multi_head_attention",
          [=](Graph&, const std::vector<Var>& v) {
            const ops::AttentionParams p{v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
            return ops::multi_head_attention(v[0], heads, p);
          },
          {{c, l}, {c, c, 1}, {c}, {c, c, 1}, {c}, {c, c, 1}, {c}, {c, c, 1}, {c}}};
}

}  // namespace

std::vector<OpCase> standard_op_cases() {
  std::vector<OpCase> cases;
  // conv1d
  cases.push_back(conv_case({3, 16}, {5, 3, 3}, true, {1, 1, 1}));
  cases.push_back(conv_case({2, 9}, {4, 2, 2}, true, {2, 0, 1}));
  cases.push_back(conv_case({4, 10}, {4, 1, 3}, true, {1, 1, 4}));
  cases.push_back(conv_case({4, 11}, {6, 2, 3}, true, {2, 1, 2}));
  cases.push_back(conv_case({1, 7}, {2, 1, 5}, false, {1, 2, 1}));
  cases.push_back(conv_case({3, 8}, {2, 3, 1}, true, {1, 0, 1}));
  // transposed conv
  cases.push_back(tconv_case({2, 5}, {2, 3, 4}, true, 2, 1));
  cases.push_back(tconv_case({1, 4}, {1, 1, 2}, false, 2, 0));
  cases.push_back(tconv_case({3, 6}, {3, 2, 3}, true, 1, 1));
  cases.push_back(tconv_case({2, 3}, {2, 2, 5}, true, 3, 0));
  cases.push_back(tconv_case({4, 4}, {4, 1, 4}, false, 2, 1));
  // depthwise separable
  cases.push_back(ds_case(2, 4, 8, 3, 1, 1));
  cases.push_back(ds_case(3, 2, 9, 3, 2, 1));
  cases.push_back(ds_case(1, 3, 6, 5, 1, 2));
  cases.push_back(ds_case(4, 4, 7, 3, 2, 0));
  cases.push_back(ds_case(2, 1, 5, 1, 1, 0));
  // normalization
  cases.push_back(gn_case(4, 6, 2));
  cases.push_back(gn_case(8, 5, 8));
  cases.push_back(gn_case(6, 7, 3));
  cases.push_back(gn_case(3, 4, 1));
  cases.push_back(gn_case(16, 3, 8));
  cases.push_back(ln_case(4, 6));
  cases.push_back(ln_case(8, 3));
  cases.push_back(ln_case(2, 5));
  cases.push_back(ln_case(5, 1));
  cases.push_back(ln_case(3, 7));
  // activations
  for (const Shape s : {Shape{5}, Shape{2, 3}, Shape{4, 6}, Shape{1, 9}, Shape{3, 2}}) {
    cases.push_back({"leaky_relu",
                     [](Graph&, const std::vector<Var>& v) { return ops::leaky_relu(v[0], 0.01); },
                     {s}, true});
    cases.push_back({"gelu", [](Graph&, const std::vector<Var>& v) { return ops::gelu(v[0]); }, {s}});
    cases.push_back({"softmax", [](Graph&, const std::vector<Var>& v) { return ops::softmax(v[0]); }, {s}});
    cases.push_back({"add", [](Graph&, const std::vector<Var>& v) { return ops::add(v[0], v[1]); }, {s, s}});
    cases.push_back({"add_scalar",
                     [](Graph&, const std::vector<Var>& v) { return ops::add_scalar(v[0], 0.7); }, {s}});
    cases.push_back({"scale", [](Graph&, const std::vector<Var>& v) { return ops::scale(v[0], -1.3); }, {s}});
    cases.push_back({"mse", [](Graph&, const std::vector<Var>& v) { return ops::mse(v[0], v[1]); }, {s, s}});
    cases.push_back({"sum", [](Graph&, const std::vector<Var>& v) { return ops::sum(v[0]); }, {s}});
  }
  // linear
  cases.push_back(linear_case({5}, 3, true));
  cases.push_back(linear_case({4, 6}, 2, true));
  cases.push_back(linear_case({1, 3}, 4, true));
  cases.push_back(linear_case({3}, 1, false));
  cases.push_back(linear_case({7, 2}, 5, true));
  // concat and channel affine
  const std::array<std::vector<Shape>, 5> concat_shapes{{{{2, 5}, {3, 5}},
                                                          {{1, 4}, {1, 4}, {2, 4}},
                                                          {{4, 3}, {1, 3}},
                                                          {{1, 1}, {2, 1}},
                                                          {{3, 6}, {3, 6}}}};
  for (const auto& shapes : concat_shapes) {
    cases.push_back({"concat", [](Graph&, const std::vector<Var>& v) { return ops::concat(v); }, shapes});
  }
  for (const auto& [c, l] : {std::pair{1, 4}, std::pair{3, 5}, std::pair{4, 1}, std::pair{6, 3},
                             std::pair{2, 8}}) {
    const auto cc = static_cast<std::size_t>(c), ll = static_cast<std::size_t>(l);
    cases.push_back({"channel_affine",
                     [](Graph&, const std::vector<Var>& v) { return ops::channel_affine(v[0], v[1], v[2]); },
                     {{cc, ll}, {cc}, {cc}}});
  }
  // attention
  cases.push_back(sdpa_case(4, 5, 2));
  cases.push_back(sdpa_case(6, 3, 3));
  cases.push_back(sdpa_case(2, 4, 1));
  cases.push_back(sdpa_case(8, 6, 2));
  cases.push_back(sdpa_case(4, 1, 4));
  cases.push_back(mha_case(8, 6, 2));
  cases.push_back(mha_case(4, 5, 1));
  cases.push_back(mha_case(6, 4, 3));
  cases.push_back(mha_case(4, 1, 2));
  cases.push_back(mha_case(8, 3, 4));
  return cases;
}

}  // namespace edakd::testing
