#include <benchmark/benchmark.h>

#include "pam/limit_covariance.hpp"

namespace {

void BM_RieszC1(benchmark::State& state) {
  const auto model = pam::CovarianceModel::riesz(1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(pam::riesz_limit(model, 0.5, 1.0));
}
BENCHMARK(BM_RieszC1);

void BM_RieszC3(benchmark::State& state) {
  const auto model = pam::CovarianceModel::riesz(3, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(pam::riesz_limit(model, 1.0, 2.0));
}
BENCHMARK(BM_RieszC3);

void BM_GaussianG(benchmark::State& state) {
  const auto model = pam::CovarianceModel::gaussian(2);
  for (auto _ : state) benchmark::DoNotOptimize(pam::g_limit(model, 0.5, 1.0));
}
BENCHMARK(BM_GaussianG)->Unit(benchmark::kMillisecond);

void BM_RQuantity(benchmark::State& state) {
  const auto model = pam::CovarianceModel::gaussian(2);
  for (auto _ : state) benchmark::DoNotOptimize(pam::r_quantity(model));
}
BENCHMARK(BM_RQuantity)->Unit(benchmark::kMillisecond);

}  // namespace
