#include <benchmark/benchmark.h>

#include "wnet/detect/matching.hpp"
#include "wnet/detect/peaks.hpp"
#include "wnet/masks.hpp"
#include "wnet/nn/loss.hpp"
#include "wnet/nn/model.hpp"
#include "wnet/rng.hpp"
#include "wnet/synth.hpp"
#include "wnet/train/trainer.hpp"

namespace {

wnet::train::Sample easy_sample(int size) {
  auto spec = wnet::synth::SceneSpec::preset(wnet::synth::Difficulty::easy, 11);
  spec.height = spec.width = size;
  const auto s = wnet::synth::generate(spec);
  return wnet::train::make_sample(s.tile, s.truth, {});
}

void BM_Forward(benchmark::State& state) {
  const auto model = wnet::nn::build_model({}, 1);
  const auto sample = easy_sample(static_cast<int>(state.range(0)));
  const auto precision = state.range(1) ? wnet::nn::Precision::f64 : wnet::nn::Precision::f32;
  for (auto _ : state) benchmark::DoNotOptimize(wnet::nn::forward(model, sample.tile, precision));
}
BENCHMARK(BM_Forward)->Args({128, 0})->Args({128, 1})->Args({512, 0})->Unit(benchmark::kMillisecond);

void BM_Backward(benchmark::State& state) {
  const auto model = wnet::nn::build_model({}, 1);
  const auto sample = easy_sample(static_cast<int>(state.range(0)));
  wnet::nn::LossConfig loss;
  loss.l1_ratio = 1.0;
  const auto precision = state.range(1) ? wnet::nn::Precision::f64 : wnet::nn::Precision::f32;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wnet::nn::backward(model, sample.tile, sample.targets, loss, precision));
  }
}
BENCHMARK(BM_Backward)->Args({128, 0})->Args({128, 1})->Unit(benchmark::kMillisecond);

void BM_RenderDensity(benchmark::State& state) {
  auto spec = wnet::synth::SceneSpec::preset(wnet::synth::Difficulty::easy, 3);
  spec.height = spec.width = 512;
  spec.min_count = spec.max_count = 400;
  const auto s = wnet::synth::generate(spec);
  for (auto _ : state) benchmark::DoNotOptimize(wnet::render_density(s.truth, 512, 512, {}));
}
BENCHMARK(BM_RenderDensity)->Unit(benchmark::kMillisecond);

void BM_ExtractPeaks(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  wnet::Rng rng(5);
  std::vector<double> data(static_cast<std::size_t>(n) * n);
  for (double& v : data) v = rng.uniform();
  const wnet::DensityMask mask("bench", n, n, std::move(data));
  for (auto _ : state) benchmark::DoNotOptimize(wnet::detect::extract_peaks(mask, {}));
}
BENCHMARK(BM_ExtractPeaks)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Match(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  wnet::Rng rng(9);
  std::vector<wnet::Point> pred(count), truth(count);
  for (auto& p : pred) p = {rng.uniform(0, 512), rng.uniform(0, 512)};
  for (auto& p : truth) p = {rng.uniform(0, 512), rng.uniform(0, 512)};
  for (auto _ : state) benchmark::DoNotOptimize(wnet::detect::match(pred, truth, 5.0));
}
BENCHMARK(BM_Match)->Arg(100)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
