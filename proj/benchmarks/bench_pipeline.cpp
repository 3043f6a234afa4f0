#include <benchmark/benchmark.h>

#include "edakd/augment/noise.hpp"
#include "edakd/augment/plan.hpp"
#include "edakd/evaluate/phasic.hpp"
#include "edakd/models/inference.hpp"
#include "edakd/models/model.hpp"
#include "edakd/signal/segment.hpp"
#include "edakd/signal/synth.hpp"

namespace {

using namespace edakd;

std::vector<double> clean_segment() {
  signal::SynthConfig cfg;
  cfg.duration_s = 128;
  cfg.seed = 3;
  return signal::synthesize_eda(cfg).samples;
}

void BM_TeacherDenoise(benchmark::State& state) {
  const auto model = models::build_teacher(models::teacher_config(), 1);
  const auto x = clean_segment();
  for (auto _ : state) benchmark::DoNotOptimize(models::denoise(model, x).data());
}
BENCHMARK(BM_TeacherDenoise)->Unit(benchmark::kMillisecond);

void BM_StudentDenoise(benchmark::State& state) {
  const auto model = models::build_student(models::student_config(), 1);
  const auto x = clean_segment();
  for (auto _ : state) benchmark::DoNotOptimize(models::denoise(model, x).data());
}
BENCHMARK(BM_StudentDenoise)->Unit(benchmark::kMillisecond);

void BM_ColoredNoise(benchmark::State& state) {
  Rng rng(5);
  const double beta = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(augment::colored_noise(512, beta, rng).data());
}
BENCHMARK(BM_ColoredNoise)->Arg(0)->Arg(2);

void BM_Corrupt(benchmark::State& state) {
  const auto bank = augment::MaBank::synthesize(16, 2);
  const auto x = clean_segment();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto plan = augment::sample_plan({}, bank.size(), seed++);
    benchmark::DoNotOptimize(augment::corrupt(x, plan, bank).input.data());
  }
}
BENCHMARK(BM_Corrupt);

void BM_ScoreSegment(benchmark::State& state) {
  const auto x = clean_segment();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate::score_segment(x));
}
BENCHMARK(BM_ScoreSegment);

}  // namespace

BENCHMARK_MAIN();
