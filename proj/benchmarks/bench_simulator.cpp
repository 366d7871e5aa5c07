#include <benchmark/benchmark.h>

#include "pam/noise_synthesis.hpp"
#include "pam/simulator.hpp"

namespace {

void BM_Step(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  auto spec = pam::GridSpec::defaults(d);
  spec.boxes = {8};
  spec.half_width = static_cast<double>(state.range(1));
  const pam::SimulationGrid grid(spec);
  const auto model = pam::CovarianceModel::gaussian(d);
  pam::Simulator sim(grid, model);
  const pam::NoiseSynthesizer synth(grid, model);
  std::vector<double> a, b;
  synth.sample_pair(3, 0, grid.dt(), a, b);
  pam::FieldState s;
  for (auto _ : state) {
    // Same state and noise every iteration; reapplying the step would grow U.
    state.PauseTiming();
    s.U.assign(grid.total_sites(), 1.0);
    s.t = 1.0;
    state.ResumeTiming();
    sim.step(s, a, 1.0 + grid.dt());
    benchmark::DoNotOptimize(s.U.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.total_sites()));
}
BENCHMARK(BM_Step)->Args({1, 128})->Args({1, 1024})->Args({2, 16})->Args({2, 67});

// A whole replica to t = 1, noise included.
void BM_Replica(benchmark::State& state) {
  auto spec = pam::GridSpec::defaults(1);
  spec.boxes = {8, 16, 32, 64};
  spec.half_width = 128;
  const pam::SimulationGrid grid(spec);
  pam::Simulator sim(grid, pam::CovarianceModel::riesz(1, 0.5));
  const double times[] = {1.0};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sim.run_solution(seed++, times));
}
BENCHMARK(BM_Replica)->Unit(benchmark::kMillisecond);

}  // namespace
