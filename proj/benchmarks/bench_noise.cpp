#include <benchmark/benchmark.h>

#include "pam/noise_synthesis.hpp"

namespace {

pam::GridSpec spec(int d, double half_width) {
  auto g = pam::GridSpec::defaults(d);
  g.boxes = {8};
  g.half_width = half_width;
  return g;
}

// One FFT, two slices.
void BM_SamplePair(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const pam::SimulationGrid grid(spec(d, static_cast<double>(state.range(1))));
  const pam::NoiseSynthesizer synth(grid, pam::CovarianceModel::riesz(d, 0.5));
  std::vector<double> a, b;
  std::uint64_t i = 0;
  for (auto _ : state) {
    synth.sample_pair(1, i++, grid.dt(), a, b);
    benchmark::DoNotOptimize(a.data());
    benchmark::DoNotOptimize(b.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * static_cast<std::int64_t>(grid.total_sites()));
}
BENCHMARK(BM_SamplePair)->Args({1, 128})->Args({1, 1024})->Args({2, 16})->Args({2, 67});

void BM_SynthesizerSetup(benchmark::State& state) {
  const pam::SimulationGrid grid(spec(1, 128));
  const auto model = pam::CovarianceModel::riesz(1, 0.5);
  for (auto _ : state) {
    pam::NoiseSynthesizer synth(grid, model);
    benchmark::DoNotOptimize(synth.weights().data());
  }
}
BENCHMARK(BM_SynthesizerSetup)->Unit(benchmark::kMillisecond);

}  // namespace
