#pragma once

// Post-processing of chain traces: MAP state, inclusion probabilities,
// change-point intervals, parameter quantiles, forecasts and AMAPE.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "episeg/core_model.hpp"
#include "episeg/random.hpp"
#include "episeg/trace.hpp"

namespace episeg {

inline constexpr double kDefaultAlpha = 0.05;
inline const std::vector<double> kDefaultProbs{0.025, 0.25, 0.5, 0.75, 0.975};

struct ChangepointInterval {
  std::size_t time = 0;
  std::size_t lo = 0;
  std::size_t hi = 0;
};

/// Quantiles at `probs` for one scalar, in the order of `probs`.
using QuantileRow = std::vector<double>;

struct SegmentQuantiles {
  QuantileRow final_size;
  QuantileRow growth_rate;
  QuantileRow scaling;
};

struct ParamQuantiles {
  std::vector<double> probs;
  std::size_t segment_count = 0;    // M the segment rows refer to (modal M for automatic traces)
  std::size_t samples_used = 0;     // samples with that M
  std::vector<SegmentQuantiles> segments;
  QuantileRow dispersion;           // over every sample
};

struct PosteriorSummary {
  ModelState map_state;
  std::size_t map_iteration = 0;
  std::vector<double> ppi;
  std::vector<ChangepointInterval> changepoints;
  ParamQuantiles param_quantiles;
  std::map<std::size_t, double> m_posterior;
};

struct ForecastResult {
  std::size_t horizon = 0;
  std::size_t samples = 0;
  std::vector<std::int64_t> draws;  // horizon x samples, row-major
  std::vector<double> mean;
  std::vector<double> lo;  // 2.5%
  std::vector<double> hi;  // 97.5%

  std::int64_t draw(std::size_t t, std::size_t b) const { return draws[t * samples + b]; }
};

/// Index of the sample maximizing log-likelihood + ln pi(delta | M); the earliest wins ties.
std::size_t map_index(const ChainTrace& trace);
ModelState map_estimate(const ChainTrace& trace);

std::vector<double> compute_ppi(const ChainTrace& trace);

/// Expands each free MAP change point while delta at the neighbour is
/// significantly negatively correlated with delta at the change point
/// (one-sided Pearson t-test, B - 2 degrees of freedom).
std::vector<ChangepointInterval> changepoint_intervals(const ChainTrace& trace, const ModelState& map_state,
                                                       double alpha = kDefaultAlpha);

/// Type-7 (linear interpolation) quantile of an ascending sample.
double quantile_sorted(std::span<const double> sorted, double prob);
std::vector<double> quantiles(std::vector<double> values, std::span<const double> probs);

std::map<std::size_t, double> segment_count_posterior(const ChainTrace& trace);
/// Most frequent M; the smaller M wins ties.
std::size_t modal_segment_count(const ChainTrace& trace);

ParamQuantiles parameter_quantiles(const ChainTrace& trace, std::span<const double> probs = kDefaultProbs);

PosteriorSummary summarize(const ChainTrace& trace, double alpha = kDefaultAlpha,
                           std::span<const double> probs = kDefaultProbs);

/// GLC mean at every observed t under `state` (for fitted-curve output).
std::vector<double> fitted_mean(const EpidemicSeries& series, const ModelState& state);

/// Forecast paths for samples [begin, end) written into `result.draws`.
/// Sample b draws from its own stream derive_seed(base_seed, b).
void forecast_samples(const ChainTrace& trace, const EpidemicSeries& series, std::uint64_t base_seed,
                      std::size_t begin, std::size_t end, ForecastResult& result);
/// Mean and 95% bounds per horizon step from filled draws.
void finalize_forecast(ForecastResult& result);

/// Serial forecast: one base seed is taken from `rng`, then every sample path
/// uses its own derived stream.
ForecastResult forecast(const ChainTrace& trace, const EpidemicSeries& series, std::size_t horizon, Random& rng);

/// Mean of |1 - yhat / (y + 1{y = 0})|.
double amape(std::span<const double> forecast_mean, std::span<const std::int64_t> actual);

}  // namespace episeg
