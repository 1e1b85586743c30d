#pragma once

// OpenMP fan-out over independent units of work: chains, forecast sample
// paths, simulation replicates and PPI columns. Every unit owns a stream
// derived from its index, so results match the serial versions bit for bit
// regardless of thread count. Serial versions live next to the kernels they
// call and are kept as the test reference.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "episeg/core_model.hpp"
#include "episeg/inference.hpp"
#include "episeg/simgen.hpp"
#include "episeg/trace.hpp"

namespace episeg {

/// Worker count: EPI_SEG_THREADS when set to a positive integer (capped by the
/// OpenMP maximum), otherwise the OpenMP maximum.
int configured_threads();

/// Chain c runs with Random(derive_seed(config.seed, c)). `fixed_m` selects the
/// fixed-M sampler; std::nullopt runs reversible jump.
std::vector<ChainTrace> run_chains(const EpidemicSeries& series, const PriorSpec& prior, const SamplerConfig& config,
                                   std::size_t chains, std::optional<std::size_t> fixed_m);
std::vector<ChainTrace> run_chains_serial(const EpidemicSeries& series, const PriorSpec& prior,
                                          const SamplerConfig& config, std::size_t chains,
                                          std::optional<std::size_t> fixed_m);

ForecastResult forecast_parallel(const ChainTrace& trace, const EpidemicSeries& series, std::size_t horizon,
                                 Random& rng);

std::vector<double> compute_ppi_parallel(const ChainTrace& trace);

std::vector<SimulatedData> simulate_glc_batch_parallel(const GlcScenario& scenario, std::size_t replicates);
std::vector<SimulatedData> simulate_sir_batch_parallel(const SirScenario& scenario, std::size_t replicates);

}  // namespace episeg
