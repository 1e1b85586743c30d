#include "episeg/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>

#include <omp.h>

#include "episeg/errors.hpp"
#include "episeg/random.hpp"
#include "episeg/sampler_auto.hpp"
#include "episeg/sampler_fixed.hpp"

namespace episeg {

namespace {

ChainTrace run_one_chain(const EpidemicSeries& series, const PriorSpec& prior, const SamplerConfig& config,
                         std::size_t chain, std::optional<std::size_t> fixed_m) {
  Random rng(derive_seed(config.seed, chain));
  return fixed_m ? run_fixed_chain(series, *fixed_m, prior, config, rng) : run_auto_chain(series, prior, config, rng);
}

// Runs body(i) for i in [0, n) across threads; rethrows the first exception by index.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(configured_threads())
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

int configured_threads() {
  const int available = omp_get_max_threads();
  if (const char* env = std::getenv("EPI_SEG_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != nullptr && *end == '\0' && value > 0) {
      return static_cast<int>(std::min<long>(value, available));
    }
  }
  return available;
}

std::vector<ChainTrace> run_chains(const EpidemicSeries& series, const PriorSpec& prior, const SamplerConfig& config,
                                   std::size_t chains, std::optional<std::size_t> fixed_m) {
  if (chains < 1) throw ValidationError("need at least one chain");
  std::vector<ChainTrace> out(chains);
  parallel_for(chains, [&](std::size_t c) { out[c] = run_one_chain(series, prior, config, c, fixed_m); });
  return out;
}

std::vector<ChainTrace> run_chains_serial(const EpidemicSeries& series, const PriorSpec& prior,
                                          const SamplerConfig& config, std::size_t chains,
                                          std::optional<std::size_t> fixed_m) {
  if (chains < 1) throw ValidationError("need at least one chain");
  std::vector<ChainTrace> out;
  for (std::size_t c = 0; c < chains; ++c) out.push_back(run_one_chain(series, prior, config, c, fixed_m));
  return out;
}

ForecastResult forecast_parallel(const ChainTrace& trace, const EpidemicSeries& series, std::size_t horizon,
                                 Random& rng) {
  if (trace.empty()) throw Error(ErrorKind::EmptyTrace, "the trace holds no post-burn-in samples");
  if (horizon < 1) throw ValidationError("forecast horizon must be positive");
  ForecastResult result;
  result.horizon = horizon;
  result.samples = trace.size();
  result.draws.assign(horizon * result.samples, 0);
  const std::uint64_t base = rng.next_u64();
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (result.samples + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t k) {
    forecast_samples(trace, series, base, k * kBlock, std::min(result.samples, (k + 1) * kBlock), result);
  });
  finalize_forecast(result);
  return result;
}

std::vector<double> compute_ppi_parallel(const ChainTrace& trace) {
  if (trace.empty()) throw Error(ErrorKind::EmptyTrace, "the trace holds no post-burn-in samples");
  const std::size_t length = trace.series_length;
  // integer counts per block of samples, merged afterwards, so the sum is exact
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (trace.size() + kBlock - 1) / kBlock;
  std::vector<std::vector<std::size_t>> partial(blocks, std::vector<std::size_t>(length, 0));
  parallel_for(blocks, [&](std::size_t k) {
    const std::size_t end = std::min(trace.size(), (k + 1) * kBlock);
    for (std::size_t b = k * kBlock; b < end; ++b) {
      for (std::size_t t : trace.samples[b].state.segmentation.starts()) ++partial[k][t];
    }
  });
  std::vector<double> out(length, 0.0);
  const double b = static_cast<double>(trace.size());
  for (std::size_t t = 0; t < length; ++t) {
    std::size_t count = 0;
    for (const auto& block : partial) count += block[t];
    out[t] = static_cast<double>(count) / b;
  }
  return out;
}

std::vector<SimulatedData> simulate_glc_batch_parallel(const GlcScenario& scenario, std::size_t replicates) {
  std::vector<SimulatedData> out(replicates);
  parallel_for(replicates, [&](std::size_t k) {
    GlcScenario copy = scenario;
    copy.seed = scenario.seed + k;
    out[k] = simulate_glc(copy);
  });
  return out;
}

std::vector<SimulatedData> simulate_sir_batch_parallel(const SirScenario& scenario, std::size_t replicates) {
  std::vector<SimulatedData> out(replicates);
  parallel_for(replicates, [&](std::size_t k) {
    SirScenario copy = scenario;
    copy.seed = scenario.seed + k;
    out[k] = simulate_sir(copy);
  });
  return out;
}

}  // namespace episeg
