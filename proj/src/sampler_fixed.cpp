#include "episeg/sampler_fixed.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace episeg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Recomputes only the segments whose time range differs from the current state.
std::vector<double> proposed_segment_liks(const EpidemicSeries& series, const ModelState& current,
                                          std::span<const double> cache, const ModelState& proposed,
                                          bool use_likelihood) {
  const auto& cur = current.segmentation;
  const auto& prop = proposed.segmentation;
  std::vector<double> out(prop.segment_count(), 0.0);
  if (!use_likelihood) return out;
  const bool same_shape = cur.segment_count() == prop.segment_count() && cache.size() == cur.segment_count() &&
                          current.dispersion == proposed.dispersion;
  for (std::size_t m = 0; m < prop.segment_count(); ++m) {
    if (same_shape && cur.segment_begin(m) == prop.segment_begin(m) && cur.segment_end(m) == prop.segment_end(m) &&
        current.params[m] == proposed.params[m]) {
      out[m] = cache[m];
    } else {
      out[m] = segment_log_lik(series, prop, m, proposed.params[m], proposed.dispersion);
    }
  }
  return out;
}

std::vector<double> current_liks(const EpidemicSeries& series, const ModelState& state, std::span<const double> cache,
                                 bool use_likelihood) {
  if (cache.size() == state.params.size()) return {cache.begin(), cache.end()};
  return segment_log_liks(series, state, use_likelihood);
}

double sum(std::span<const double> values) { return std::accumulate(values.begin(), values.end(), 0.0); }

// ln of q(current | proposed) / q(proposed | current) for a log-scale TN random walk,
// including the Jacobian of the log transform.
double log_scale_tn_ratio(double x, double x_new, double sd, double lo, double hi) {
  const double mass_from_current = log_standard_normal_mass((lo - x) / sd, (hi - x) / sd);
  const double mass_from_proposed = log_standard_normal_mass((lo - x_new) / sd, (hi - x_new) / sd);
  return mass_from_current - mass_from_proposed + (x_new - x);
}

MoveOutcome no_op(const ModelState& state, MoveKind kind, std::vector<double> liks) {
  MoveOutcome out;
  out.proposed_state = state;
  out.log_hastings = 0.0;
  out.accepted = true;
  out.move_kind = kind;
  out.segment_log_lik = std::move(liks);
  return out;
}

}  // namespace

Segmentation propose_local_swap(const Segmentation& segmentation, Random& rng) {
  const auto cps = segmentation.changepoints();
  if (cps.empty()) {
    throw NoFreeChangepoint("local swap needs a free change point");
  }
  const std::size_t pick = rng.index(cps.size());
  const bool right = rng.uniform() < 0.5;
  const std::size_t t = cps[pick];
  const std::size_t length = segmentation.length();
  if ((!right && t <= 1) || (right && t + 1 >= length)) {
    return segmentation;
  }
  const std::size_t target = right ? t + 1 : t - 1;
  if (segmentation.is_changepoint(target)) {
    return segmentation;  // swapping two ones
  }
  std::vector<std::size_t> moved(cps.begin(), cps.end());
  moved[pick] = target;
  return Segmentation(length, std::move(moved));
}

Segmentation propose_global_swap(const Segmentation& segmentation, std::size_t q_gap, Random& rng) {
  const auto cps = segmentation.changepoints();
  const std::size_t length = segmentation.length();
  if (cps.empty()) {
    throw NoFreeChangepoint("global swap needs a free change point");
  }
  std::vector<std::size_t> empty_slots;
  if (length >= 2 * q_gap) {
    for (std::size_t t = q_gap; t <= length - q_gap; ++t) {
      if (!segmentation.is_changepoint(t)) empty_slots.push_back(t);
    }
  }
  if (empty_slots.empty()) {
    throw NoFreeChangepoint("global swap needs a free position without a change point");
  }
  const std::size_t pick = rng.index(cps.size());
  const std::size_t target = empty_slots[rng.index(empty_slots.size())];
  std::vector<std::size_t> moved(cps.begin(), cps.end());
  moved[pick] = target;
  return Segmentation(length, std::move(moved));
}

Segmentation propose_shift(const Segmentation& segmentation, Random& rng) {
  const auto cps = segmentation.changepoints();
  const bool right = rng.uniform() < 0.5;
  if (cps.empty()) {
    return segmentation;
  }
  const std::size_t length = segmentation.length();
  if ((!right && cps.front() <= 1) || (right && cps.back() + 1 >= length)) {
    return segmentation;
  }
  std::vector<std::size_t> moved(cps.begin(), cps.end());
  for (auto& t : moved) t = right ? t + 1 : t - 1;
  return Segmentation(length, std::move(moved));
}

bool metropolis_accept(double log_hastings, Random& rng) {
  if (std::isnan(log_hastings) || log_hastings == kNegInf) return false;
  if (log_hastings >= 0.0) return true;
  return std::log(rng.uniform_open()) < log_hastings;
}

std::vector<double> segment_log_liks(const EpidemicSeries& series, const ModelState& state, bool use_likelihood) {
  std::vector<double> out(state.params.size(), 0.0);
  if (!use_likelihood) return out;
  for (std::size_t m = 0; m < out.size(); ++m) {
    out[m] = segment_log_lik(series, state.segmentation, m, state.params[m], state.dispersion);
  }
  return out;
}

MoveOutcome mh_indicator_move(const EpidemicSeries& series, const ModelState& state, MoveKind kind,
                              const PriorSpec& prior, const SamplerConfig& config, Random& rng,
                              std::span<const double> cache) {
  const auto& seg = state.segmentation;
  if (seg.segment_count() < 2) {
    return no_op(state, kind, current_liks(series, state, cache, config.use_likelihood));
  }
  Segmentation proposal;
  switch (kind) {
    case MoveKind::LocalSwap: proposal = propose_local_swap(seg, rng); break;
    case MoveKind::GlobalSwap:
      try {
        proposal = propose_global_swap(seg, prior.q_gap, rng);
      } catch (const NoFreeChangepoint&) {
        return no_op(state, kind, current_liks(series, state, cache, config.use_likelihood));
      }
      break;
    case MoveKind::Shift: proposal = propose_shift(seg, rng); break;
    default: throw ValidationError("not an indicator move");
  }
  const double lp_new = log_prior_indicator(proposal, prior);
  MoveOutcome out;
  out.move_kind = kind;
  out.proposed_state = state;
  out.proposed_state.segmentation = std::move(proposal);
  if (lp_new == kNegInf) {
    out.log_hastings = kNegInf;
    out.accepted = false;
    return out;
  }
  // K must stay above the maximum count of its (possibly re-ranged) segment
  const double lpp_new = log_prior_all_params(series, out.proposed_state, prior);
  if (lpp_new == kNegInf) {
    out.log_hastings = kNegInf;
    out.accepted = false;
    return out;
  }
  const auto cur_ll = current_liks(series, state, cache, config.use_likelihood);
  out.segment_log_lik = proposed_segment_liks(series, state, cur_ll, out.proposed_state, config.use_likelihood);
  out.log_hastings = (sum(out.segment_log_lik) - sum(cur_ll)) + (lp_new - log_prior_indicator(seg, prior)) +
                     (lpp_new - log_prior_all_params(series, state, prior));
  out.accepted = metropolis_accept(out.log_hastings, rng);
  return out;
}

MoveOutcome mh_update_indicator(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior,
                                const SamplerConfig& config, Random& rng, std::span<const double> cache) {
  const double u = rng.uniform();
  const MoveKind kind = u < 0.4 ? MoveKind::LocalSwap : (u < 0.8 ? MoveKind::Shift : MoveKind::GlobalSwap);
  return mh_indicator_move(series, state, kind, prior, config, rng, cache);
}

MoveOutcome mh_update_indicator(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior,
                                Random& rng) {
  return mh_update_indicator(series, state, prior, SamplerConfig{}, rng);
}

MoveOutcome mh_update_segment_param(const EpidemicSeries& series, const ModelState& state, std::size_t segment,
                                    ParamKind kind, const PriorSpec& prior, const SamplerConfig& config,
                                    Random& rng, std::span<const double> cache) {
  if (segment >= state.params.size()) {
    throw DomainError("segment index out of range");
  }
  const MoveKind move = kind == ParamKind::Lambda ? MoveKind::ParamLambda
                        : kind == ParamKind::K    ? MoveKind::ParamK
                                                  : MoveKind::ParamP;
  const SegmentParams& current = state.params[segment];
  SegmentParams next = current;
  double log_q_ratio = 0.0;
  double sd = 0.0;
  switch (kind) {
    case ParamKind::Lambda: {
      sd = config.step_lambda;
      const double x = std::log(current.growth_rate);
      const double x_new = x + sd * rng.normal();
      next.growth_rate = std::exp(x_new);
      log_q_ratio = x_new - x;
      break;
    }
    case ParamKind::K: {
      sd = config.step_K;
      const double lo = std::log(static_cast<double>(segment_max_cumulative(series, state.segmentation, segment)));
      const double hi = std::log(prior.final_size_cap(series.population()));
      const double x = std::log(current.final_size);
      if (sd > 0.0) {
        const double x_new = sample_truncated_normal(x, sd, lo, hi, rng);
        next.final_size = std::exp(x_new);
        log_q_ratio = log_scale_tn_ratio(x, x_new, sd, lo, hi);
      }
      break;
    }
    case ParamKind::P: {
      sd = config.step_p;
      const double x = std::log(current.scaling);
      if (sd > 0.0) {
        const double x_new = sample_truncated_normal(x, sd, -std::numeric_limits<double>::infinity(), 0.0, rng);
        next.scaling = std::exp(x_new);
        log_q_ratio = log_scale_tn_ratio(x, x_new, sd, -std::numeric_limits<double>::infinity(), 0.0);
      }
      break;
    }
  }
  const auto cur_ll = current_liks(series, state, cache, config.use_likelihood);
  if (sd == 0.0 || next == current) {
    return no_op(state, move, cur_ll);
  }
  const std::int64_t max_c = segment_max_cumulative(series, state.segmentation, segment);
  const double lp_new = log_prior_segment_params(next, max_c, prior, series.population());
  MoveOutcome out;
  out.move_kind = move;
  out.proposed_state = state;
  out.proposed_state.params[segment] = next;
  if (lp_new == kNegInf) {
    out.log_hastings = kNegInf;
    out.accepted = false;
    return out;
  }
  out.segment_log_lik = cur_ll;
  if (config.use_likelihood) {
    out.segment_log_lik[segment] = segment_log_lik(series, state.segmentation, segment, next, state.dispersion);
  }
  const double lp_cur = log_prior_segment_params(current, max_c, prior, series.population());
  out.log_hastings = (out.segment_log_lik[segment] - cur_ll[segment]) + (lp_new - lp_cur) + log_q_ratio;
  out.accepted = metropolis_accept(out.log_hastings, rng);
  return out;
}

MoveOutcome mh_update_dispersion(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior,
                                 const SamplerConfig& config, Random& rng, std::span<const double> cache) {
  const auto cur_ll = current_liks(series, state, cache, config.use_likelihood);
  const double sd = config.step_phi;
  if (sd == 0.0) {
    return no_op(state, MoveKind::Dispersion, cur_ll);
  }
  const double lo = 0.0;
  const double hi = std::log(kMaxDispersion);
  const double x = std::log(state.dispersion);
  const double x_new = sample_truncated_normal(x, sd, lo, hi, rng);
  MoveOutcome out;
  out.move_kind = MoveKind::Dispersion;
  out.proposed_state = state;
  out.proposed_state.dispersion = std::exp(x_new);
  const double lp_new = log_prior_dispersion(out.proposed_state.dispersion, prior);
  if (lp_new == kNegInf) {
    out.log_hastings = kNegInf;
    return out;
  }
  out.segment_log_lik = segment_log_liks(series, out.proposed_state, config.use_likelihood);
  out.log_hastings = (sum(out.segment_log_lik) - sum(cur_ll)) +
                     (lp_new - log_prior_dispersion(state.dispersion, prior)) +
                     log_scale_tn_ratio(x, x_new, sd, lo, hi);
  out.accepted = metropolis_accept(out.log_hastings, rng);
  return out;
}

ModelState initial_state(const EpidemicSeries& series, std::size_t m, const PriorSpec& prior) {
  const std::size_t length = series.length();
  if (m < 1 || m * prior.q_gap > length) {
    throw InfeasibleError("cannot place " + std::to_string(m) + " segments of at least Q = " +
                          std::to_string(prior.q_gap) + " points in a series of length " + std::to_string(length));
  }
  std::vector<std::size_t> cps;
  for (std::size_t k = 1; k < m; ++k) cps.push_back(k * length / m);
  ModelState state;
  state.segmentation = Segmentation(length, std::move(cps));
  const double cap = prior.final_size_cap(series.population());
  for (std::size_t j = 0; j < m; ++j) {
    const double max_c = static_cast<double>(segment_max_cumulative(series, state.segmentation, j));
    if (max_c >= cap) {
      throw InfeasibleError("ceil(rho N) = " + std::to_string(cap) + " does not exceed the observed count " +
                            std::to_string(max_c));
    }
    state.params.push_back(SegmentParams{0.5 * (max_c + cap), 0.1, 0.9});
  }
  state.dispersion = 1.0;
  return state;
}

double log_posterior_fixed(const EpidemicSeries& series, const ModelState& state, double log_lik,
                           const PriorSpec& prior, std::span<const double> normalizers) {
  return log_lik + log_prior_indicator_given_count(state.segmentation, prior, normalizers) +
         log_prior_all_params(series, state, prior) + log_prior_dispersion(state.dispersion, prior);
}

ChainTrace run_fixed_chain(const EpidemicSeries& series, std::size_t m, const PriorSpec& prior,
                           const SamplerConfig& config, Random& rng) {
  prior.validate();
  config.validate();
  ModelState state = initial_state(series, m, prior);
  const auto normalizers = log_indicator_normalizers(series.length(), prior);
  std::vector<double> cache = segment_log_liks(series, state, config.use_likelihood);

  ChainTrace trace;
  trace.series_length = series.length();
  trace.automatic = false;
  trace.samples.reserve(config.retained());

  auto adopt = [&](MoveOutcome&& outcome) {
    trace.acceptance.record(outcome.move_kind, outcome.accepted);
    if (outcome.accepted) {
      state = std::move(outcome.proposed_state);
      cache = std::move(outcome.segment_log_lik);
    }
  };

  for (std::size_t it = 0; it < config.total_iterations; ++it) {
    if (m >= 2) {
      adopt(mh_update_indicator(series, state, prior, config, rng, cache));
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (ParamKind kind : {ParamKind::Lambda, ParamKind::K, ParamKind::P}) {
        adopt(mh_update_segment_param(series, state, j, kind, prior, config, rng, cache));
      }
    }
    adopt(mh_update_dispersion(series, state, prior, config, rng, cache));

    if (it >= config.burn_in) {
      TraceSample sample;
      sample.iteration = it;
      sample.log_lik = sum(cache);
      sample.log_prior_indicator = log_prior_indicator_given_count(state.segmentation, prior, normalizers);
      sample.log_posterior = log_posterior_fixed(series, state, sample.log_lik, prior, normalizers);
      sample.state = state;
      trace.samples.push_back(std::move(sample));
    }
  }
  return trace;
}

}  // namespace episeg
