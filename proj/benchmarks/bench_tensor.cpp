#include <benchmark/benchmark.h>

#include <random>

#include "edakd/tensor/graph.hpp"
#include "edakd/tensor/ops.hpp"

namespace {

using namespace edakd::tensor;
namespace ops = edakd::ops;

Tensor random(const Shape& shape, std::uint64_t seed) {
  Tensor t(shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  for (double& v : t.values()) v = n(rng);
  return t;
}

// args: channels in/out, length
void BM_Conv1dForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto l = static_cast<std::size_t>(state.range(1));
  const Tensor x = random({c, l}, 1), w = random({c, c, 3}, 2), b = random({c}, 3);
  for (auto _ : state) {
    Graph g(false);
    auto y = ops::conv1d(g.constant(x), g.constant(w), g.constant(b), {1, 1, 1});
    benchmark::DoNotOptimize(y.value().values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c * c * 3 * l));
}
BENCHMARK(BM_Conv1dForward)->Args({16, 512})->Args({64, 128})->Args({256, 32});

void BM_Conv1dBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto l = static_cast<std::size_t>(state.range(1));
  const Tensor x = random({c, l}, 1), w = random({c, c, 3}, 2);
  for (auto _ : state) {
    Graph g(true);
    auto xv = g.variable(x);
    auto wv = g.variable(w);
    auto loss = ops::sum(ops::conv1d(xv, wv, std::nullopt, {1, 1, 1}));
    g.backward(loss);
    benchmark::DoNotOptimize(g.grad(wv).data());
  }
}
BENCHMARK(BM_Conv1dBackward)->Args({16, 512})->Args({64, 128});

void BM_GroupNorm(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const Tensor x = random({c, 4096 / c}, 4), gamma = random({c}, 5), beta = random({c}, 6);
  for (auto _ : state) {
    Graph g(false);
    auto y = ops::group_norm(g.constant(x), 8, g.constant(gamma), g.constant(beta), 1e-5);
    benchmark::DoNotOptimize(y.value().values().data());
  }
}
BENCHMARK(BM_GroupNorm)->Arg(16)->Arg(256);

void BM_Attention(benchmark::State& state) {
  const auto l = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 256;
  const Tensor x = random({d, l}, 7);
  const Tensor wq = random({d, d, 1}, 8), wk = random({d, d, 1}, 9), wv = random({d, d, 1}, 10),
               wo = random({d, d, 1}, 11);
  const Tensor bq({d}), bk({d}), bv({d}), bo({d});
  for (auto _ : state) {
    Graph g(false);
    const ops::AttentionParams p{g.constant(wq), g.constant(bq), g.constant(wk), g.constant(bk),
         g.constant(wv), g.constant(bv), g.constant(wo), g.constant(bo)};
    auto y = ops::multi_head_attention(g.constant(x), 4, p, nullptr);
    benchmark::DoNotOptimize(y.value().values().data());
  }
}
BENCHMARK(BM_Attention)->Arg(16)->Arg(64);

}  // namespace
