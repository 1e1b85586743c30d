// Serial reference vs OpenMP versions of the data-parallel kernels.
// Thread count follows EPI_SEG_THREADS / OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "episeg/inference.hpp"
#include "episeg/parallel.hpp"
#include "episeg/sampler_fixed.hpp"
#include "episeg/simgen.hpp"

using namespace episeg;

namespace {

const SimulatedData& glc_data() {
  static const SimulatedData data = simulate_glc(GlcScenario{});
  return data;
}

const ChainTrace& glc_trace() {
  static const ChainTrace trace = [] {
    SamplerConfig config;
    config.total_iterations = 12000;
    config.burn_in = 2000;
    Random rng(1);
    return run_fixed_chain(glc_data().series, 3, PriorSpec{}, config, rng);
  }();
  return trace;
}

SamplerConfig short_chain() {
  SamplerConfig config;
  config.total_iterations = 2000;
  config.burn_in = 1000;
  return config;
}

void BM_ChainsSerial(benchmark::State& state) {
  const auto chains = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_chains_serial(glc_data().series, PriorSpec{}, short_chain(), chains, 3));
  }
}

void BM_ChainsParallel(benchmark::State& state) {
  const auto chains = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_chains(glc_data().series, PriorSpec{}, short_chain(), chains, 3));
  }
}

void BM_ForecastSerial(benchmark::State& state) {
  for (auto _ : state) {
    Random rng(2);
    benchmark::DoNotOptimize(forecast(glc_trace(), glc_data().series, 50, rng));
  }
}

void BM_ForecastParallel(benchmark::State& state) {
  for (auto _ : state) {
    Random rng(2);
    benchmark::DoNotOptimize(forecast_parallel(glc_trace(), glc_data().series, 50, rng));
  }
}

void BM_PpiSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(compute_ppi(glc_trace()));
}

void BM_PpiParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(compute_ppi_parallel(glc_trace()));
}

void BM_SimulateSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(simulate_sir_batch(SirScenario{}, kDefaultReplicates));
}

void BM_SimulateParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(simulate_sir_batch_parallel(SirScenario{}, kDefaultReplicates));
}

}  // namespace

BENCHMARK(BM_ChainsSerial)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainsParallel)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForecastSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForecastParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PpiSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PpiParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SimulateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateParallel)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  glc_trace();  // build the shared trace outside the timed regions
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
