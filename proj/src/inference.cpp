#include "episeg/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "episeg/errors.hpp"
#include "episeg/simgen.hpp"

namespace episeg {

namespace {

void require_samples(const ChainTrace& trace) {
  if (trace.empty()) throw Error(ErrorKind::EmptyTrace, "the trace holds no post-burn-in samples");
}

// Pearson correlation of two 0/1 columns; NaN when either is constant.
double binary_correlation(const ChainTrace& trace, std::size_t t, std::size_t s) {
  const double b = static_cast<double>(trace.size());
  double nx = 0.0, ny = 0.0, nxy = 0.0;
  for (const auto& sample : trace.samples) {
    const bool x = sample.state.segmentation.is_changepoint(t);
    const bool y = sample.state.segmentation.is_changepoint(s);
    nx += x;
    ny += y;
    nxy += x && y;
  }
  const double cov = nxy / b - (nx / b) * (ny / b);
  const double vx = (nx / b) * (1.0 - nx / b);
  const double vy = (ny / b) * (1.0 - ny / b);
  if (vx <= 0.0 || vy <= 0.0) return std::nan("");
  return cov / std::sqrt(vx * vy);
}

bool significantly_negative(double r, std::size_t samples, double alpha) {
  if (std::isnan(r) || r >= 0.0) return false;
  if (r <= -1.0) return true;
  const double df = static_cast<double>(samples) - 2.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return boost::math::cdf(dist, t) < alpha;
}

}  // namespace

std::size_t map_index(const ChainTrace& trace) {
  require_samples(trace);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < trace.size(); ++b) {
    const double value = trace.samples[b].log_lik + trace.samples[b].log_prior_indicator;
    if (value > best_value) {
      best_value = value;
      best = b;
    }
  }
  return best;
}

ModelState map_estimate(const ChainTrace& trace) { return trace.samples[map_index(trace)].state; }

std::vector<double> compute_ppi(const ChainTrace& trace) {
  require_samples(trace);
  std::vector<double> counts(trace.series_length, 0.0);
  for (const auto& sample : trace.samples) {
    for (std::size_t t : sample.state.segmentation.starts()) counts[t] += 1.0;
  }
  const double b = static_cast<double>(trace.size());
  for (auto& c : counts) c /= b;
  return counts;
}

std::vector<ChangepointInterval> changepoint_intervals(const ChainTrace& trace, const ModelState& map_state,
                                                       double alpha) {
  require_samples(trace);
  std::vector<ChangepointInterval> out;
  const std::size_t length = map_state.segmentation.length();
  const bool testable = trace.size() >= 10;  // too few samples: report degenerate intervals
  for (std::size_t t : map_state.segmentation.changepoints()) {
    ChangepointInterval interval{t, t, t};
    if (testable) {
      while (interval.lo > 0 &&
             significantly_negative(binary_correlation(trace, t, interval.lo - 1), trace.size(), alpha)) {
        --interval.lo;
      }
      while (interval.hi + 1 < length &&
             significantly_negative(binary_correlation(trace, t, interval.hi + 1), trace.size(), alpha)) {
        ++interval.hi;
      }
    }
    out.push_back(interval);
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile probability must lie in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> quantiles(std::vector<double> values, std::span<const double> probs) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(probs.size());
  for (double p : probs) out.push_back(quantile_sorted(values, p));
  return out;
}

std::map<std::size_t, double> segment_count_posterior(const ChainTrace& trace) {
  require_samples(trace);
  std::map<std::size_t, double> out;
  for (const auto& sample : trace.samples) out[sample.state.segmentation.segment_count()] += 1.0;
  for (auto& [m, f] : out) f /= static_cast<double>(trace.size());
  return out;
}

std::size_t modal_segment_count(const ChainTrace& trace) {
  const auto posterior = segment_count_posterior(trace);
  return std::max_element(posterior.begin(), posterior.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

ParamQuantiles parameter_quantiles(const ChainTrace& trace, std::span<const double> probs) {
  require_samples(trace);
  ParamQuantiles out;
  out.probs.assign(probs.begin(), probs.end());
  out.segment_count = modal_segment_count(trace);
  std::vector<std::vector<double>> k(out.segment_count), l(out.segment_count), p(out.segment_count);
  std::vector<double> phi;
  phi.reserve(trace.size());
  for (const auto& sample : trace.samples) {
    phi.push_back(sample.state.dispersion);
    if (sample.state.params.size() != out.segment_count) continue;
    ++out.samples_used;
    for (std::size_t m = 0; m < out.segment_count; ++m) {
      k[m].push_back(sample.state.params[m].final_size);
      l[m].push_back(sample.state.params[m].growth_rate);
      p[m].push_back(sample.state.params[m].scaling);
    }
  }
  for (std::size_t m = 0; m < out.segment_count; ++m) {
    out.segments.push_back(
        {quantiles(std::move(k[m]), probs), quantiles(std::move(l[m]), probs), quantiles(std::move(p[m]), probs)});
  }
  out.dispersion = quantiles(std::move(phi), probs);
  return out;
}

PosteriorSummary summarize(const ChainTrace& trace, double alpha, std::span<const double> probs) {
  PosteriorSummary out;
  const std::size_t best = map_index(trace);
  out.map_state = trace.samples[best].state;
  out.map_iteration = trace.samples[best].iteration;
  out.ppi = compute_ppi(trace);
  out.changepoints = changepoint_intervals(trace, out.map_state, alpha);
  out.param_quantiles = parameter_quantiles(trace, probs);
  out.m_posterior = segment_count_posterior(trace);
  return out;
}

std::vector<double> fitted_mean(const EpidemicSeries& series, const ModelState& state) {
  std::vector<double> out(series.length());
  for (std::size_t t = 0; t < series.length(); ++t) {
    out[t] = glc_mean(series.previous_cumulative(t), state.params[state.segmentation.segment_of(t)]);
  }
  return out;
}

void forecast_samples(const ChainTrace& trace, const EpidemicSeries& series, std::uint64_t base_seed,
                      std::size_t begin, std::size_t end, ForecastResult& result) {
  const std::int64_t last = series.cumulative().back();
  for (std::size_t b = begin; b < end; ++b) {
    const ModelState& state = trace.samples[b].state;
    const SegmentParams& params = state.params.back();
    Random rng(derive_seed(base_seed, b));
    std::int64_t current = last;
    for (std::size_t t = 0; t < result.horizon; ++t) {
      const std::int64_t y = nb_draw(glc_mean(current, params), state.dispersion, rng);
      result.draws[t * result.samples + b] = y;
      current += y;
    }
  }
}

void finalize_forecast(ForecastResult& result) {
  result.mean.assign(result.horizon, 0.0);
  result.lo.assign(result.horizon, 0.0);
  result.hi.assign(result.horizon, 0.0);
  std::vector<double> row(result.samples);
  for (std::size_t t = 0; t < result.horizon; ++t) {
    for (std::size_t b = 0; b < result.samples; ++b) row[b] = static_cast<double>(result.draw(t, b));
    result.mean[t] = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(result.samples);
    std::sort(row.begin(), row.end());
    result.lo[t] = quantile_sorted(row, 0.025);
    result.hi[t] = quantile_sorted(row, 0.975);
  }
}

ForecastResult forecast(const ChainTrace& trace, const EpidemicSeries& series, std::size_t horizon, Random& rng) {
  require_samples(trace);
  if (horizon < 1) throw ValidationError("forecast horizon must be positive");
  ForecastResult result;
  result.horizon = horizon;
  result.samples = trace.size();
  result.draws.assign(horizon * result.samples, 0);
  forecast_samples(trace, series, rng.next_u64(), 0, result.samples, result);
  finalize_forecast(result);
  return result;
}

double amape(std::span<const double> forecast_mean, std::span<const std::int64_t> actual) {
  if (forecast_mean.size() != actual.size()) {
    throw ValidationError("forecast has " + std::to_string(forecast_mean.size()) + " points but " +
                          std::to_string(actual.size()) + " actual values were given");
  }
  if (actual.empty()) throw ValidationError("AMAPE needs at least one point");
  double total = 0.0;
  for (std::size_t t = 0; t < actual.size(); ++t) {
    const double denom = actual[t] == 0 ? 1.0 : static_cast<double>(actual[t]);
    total += std::abs(1.0 - forecast_mean[t] / denom);
  }
  return total / static_cast<double>(actual.size());
}

}  // namespace episeg
