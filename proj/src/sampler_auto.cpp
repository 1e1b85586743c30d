#include "episeg/sampler_auto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace episeg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double sum(std::span<const double> values) { return std::accumulate(values.begin(), values.end(), 0.0); }

double normal_log_density(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - kLogSqrt2Pi - std::log(sd);
}

double log_prior_count(const RjContext& context, std::size_t m) {
  return m < context.log_prior_m.size() ? context.log_prior_m[m] : kNegInf;
}

// Everything in the target except the likelihood and phi (which birth/death leave alone).
double structural_log_prior(const EpidemicSeries& series, const ModelState& state, const RjContext& context) {
  const std::size_t m = state.segmentation.segment_count();
  const double lm = log_prior_count(context, m);
  if (lm == kNegInf) return kNegInf;
  const double ld = log_prior_indicator_given_count(state.segmentation, context.prior, context.normalizers);
  if (ld == kNegInf) return kNegInf;
  return lm + ld + log_prior_all_params(series, state, context.prior);
}

std::vector<double> liks_or_compute(const EpidemicSeries& series, const ModelState& state,
                                    std::span<const double> cache, bool use_likelihood) {
  if (cache.size() == state.params.size()) return {cache.begin(), cache.end()};
  return segment_log_liks(series, state, use_likelihood);
}

double segment_lik(const EpidemicSeries& series, const ModelState& state, std::size_t m, bool use_likelihood) {
  return use_likelihood ? segment_log_lik(series, state.segmentation, m, state.params[m], state.dispersion) : 0.0;
}

}  // namespace

const char* to_string(RjMoveKind kind) {
  switch (kind) {
    case RjMoveKind::Birth: return "birth";
    case RjMoveKind::Death: return "death";
    case RjMoveKind::LocalSwap: return "local_swap";
    case RjMoveKind::GlobalSwap: return "global_swap";
    case RjMoveKind::Stay: return "stay";
  }
  return "unknown";
}

std::array<double, kRjMoveKindCount> move_probabilities(std::size_t m, std::size_t m_max) {
  constexpr double kSixth = 1.0 / 6.0;
  if (m_max <= 1) {
    return {0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  }
  if (m <= 1) {
    return {0.5, 0.0, kSixth, kSixth, kSixth};
  }
  if (m >= m_max) {
    return {0.0, 0.5, kSixth, kSixth, kSixth};
  }
  return {0.25, 0.25, kSixth, kSixth, kSixth};
}

RjMoveKind select_move(std::size_t m, std::size_t m_max, Random& rng) {
  const auto probs = move_probabilities(m, m_max);
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < kRjMoveKindCount; ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<RjMoveKind>(k);
  }
  return RjMoveKind::Stay;
}

RjContext make_rj_context(const EpidemicSeries& series, const PriorSpec& prior) {
  RjContext context;
  context.prior = prior;
  context.prior.m_max = std::min(prior.m_max, max_segment_count(series.length(), prior.q_gap));
  context.normalizers = log_indicator_normalizers(series.length(), context.prior);
  context.log_prior_m.assign(context.prior.m_max + 1, kNegInf);
  for (std::size_t m = 1; m <= context.prior.m_max; ++m) {
    context.log_prior_m[m] = log_prior_segment_count(m, context.prior);
  }
  return context;
}

std::vector<std::size_t> feasible_birth_positions(const Segmentation& segmentation, std::size_t q_gap) {
  std::vector<std::size_t> out;
  const std::size_t length = segmentation.length();
  if (length < 2 * q_gap) return out;
  const auto starts = segmentation.starts();
  std::size_t next = 1;  // index of the first start after t
  for (std::size_t t = q_gap; t <= length - q_gap; ++t) {
    while (next < starts.size() && starts[next] <= t) ++next;
    if (starts[next - 1] + q_gap > t) continue;
    if (next < starts.size() && t + q_gap > starts[next]) continue;
    out.push_back(t);
  }
  return out;
}

double birth_params_log_density(const SegmentParams& drawn, const SegmentParams& centre,
                                std::int64_t segment_max_cumulative, const PriorSpec& prior,
                                std::int64_t population, const SamplerConfig& config) {
  const double k_lo = std::log(static_cast<double>(segment_max_cumulative));
  const double k_hi = std::log(prior.final_size_cap(population));
  if (!(drawn.final_size > 0.0 && drawn.growth_rate > 0.0 && drawn.scaling > 0.0)) return kNegInf;
  const double ln_k = std::log(drawn.final_size);
  const double ln_l = std::log(drawn.growth_rate);
  const double ln_p = std::log(drawn.scaling);
  // log-scale densities minus ln x give the density of the original-scale draw
  return truncated_normal_log_density(ln_k, std::log(centre.final_size), config.step_K, k_lo, k_hi) - ln_k +
         normal_log_density(ln_l, std::log(centre.growth_rate), config.step_lambda) - ln_l +
         truncated_normal_log_density(ln_p, std::log(centre.scaling), config.step_p, kNegInf, 0.0) - ln_p;
}

SegmentParams draw_birth_params(const SegmentParams& centre, std::int64_t segment_max_cumulative,
                                const PriorSpec& prior, std::int64_t population, const SamplerConfig& config,
                                Random& rng) {
  const double k_lo = std::log(static_cast<double>(segment_max_cumulative));
  const double k_hi = std::log(prior.final_size_cap(population));
  SegmentParams out;
  out.final_size = std::exp(sample_truncated_normal(std::log(centre.final_size), config.step_K, k_lo, k_hi, rng));
  out.growth_rate = std::exp(std::log(centre.growth_rate) + config.step_lambda * rng.normal());
  out.scaling = std::exp(sample_truncated_normal(std::log(centre.scaling), config.step_p, kNegInf, 0.0, rng));
  return out;
}

MoveOutcome evaluate_birth(const EpidemicSeries& series, const ModelState& state, std::size_t position,
                           const SegmentParams& drawn, const RjContext& context, const SamplerConfig& config,
                           std::span<const double> cache) {
  const auto& seg = state.segmentation;
  const std::size_t m = seg.segment_count();
  const std::size_t split = seg.segment_of(position);

  MoveOutcome out;
  out.move_kind = MoveKind::Birth;
  std::vector<std::size_t> cps(seg.changepoints().begin(), seg.changepoints().end());
  cps.push_back(position);
  out.proposed_state.segmentation = Segmentation(seg.length(), std::move(cps));
  out.proposed_state.params = state.params;
  out.proposed_state.params.insert(out.proposed_state.params.begin() + static_cast<std::ptrdiff_t>(split) + 1, drawn);
  out.proposed_state.dispersion = state.dispersion;

  const double prior_new = structural_log_prior(series, out.proposed_state, context);
  if (prior_new == kNegInf) {
    out.log_hastings = kNegInf;
    return out;
  }
  const auto cur_ll = liks_or_compute(series, state, cache, config.use_likelihood);
  out.segment_log_lik = cur_ll;
  out.segment_log_lik[split] = segment_lik(series, out.proposed_state, split, config.use_likelihood);
  out.segment_log_lik.insert(out.segment_log_lik.begin() + static_cast<std::ptrdiff_t>(split) + 1,
                             segment_lik(series, out.proposed_state, split + 1, config.use_likelihood));

  const auto probs_here = move_probabilities(m, context.prior.m_max);
  const auto probs_there = move_probabilities(m + 1, context.prior.m_max);
  double log_move_ratio;
  double log_choose_reverse;
  double log_choose_forward;
  if (config.approx_move_ratios) {
    log_move_ratio = 0.0;
    log_choose_reverse = -std::log(static_cast<double>(m));                    // 1 / (M* - 1)
    log_choose_forward = -std::log(static_cast<double>(seg.length() - m));     // 1 / (T - M)
  } else {
    log_move_ratio = std::log(probs_there[static_cast<std::size_t>(RjMoveKind::Death)]) -
                     std::log(probs_here[static_cast<std::size_t>(RjMoveKind::Birth)]);
    log_choose_reverse = -std::log(static_cast<double>(m));
    log_choose_forward =
        -std::log(static_cast<double>(feasible_birth_positions(seg, context.prior.q_gap).size()));
  }
  const double log_q_params =
      birth_params_log_density(drawn, state.params[split],
                               segment_max_cumulative(series, out.proposed_state.segmentation, split + 1),
                               context.prior, series.population(), config);

  out.log_hastings = (sum(out.segment_log_lik) - sum(cur_ll)) +
                     (prior_new - structural_log_prior(series, state, context)) + log_move_ratio +
                     log_choose_reverse - log_choose_forward - log_q_params;
  return out;
}

MoveOutcome evaluate_death(const EpidemicSeries& series, const ModelState& state, std::size_t segment,
                           const RjContext& context, const SamplerConfig& config, std::span<const double> cache) {
  const auto& seg = state.segmentation;
  const std::size_t m = seg.segment_count();
  if (segment < 1 || segment >= m) {
    throw DomainError("death needs a segment index in [1, M-1]");
  }
  MoveOutcome out;
  out.move_kind = MoveKind::Death;
  std::vector<std::size_t> cps;
  for (std::size_t j = 1; j < m; ++j) {
    if (j != segment) cps.push_back(seg.segment_begin(j));
  }
  out.proposed_state.segmentation = Segmentation(seg.length(), std::move(cps));
  out.proposed_state.params = state.params;
  out.proposed_state.params.erase(out.proposed_state.params.begin() + static_cast<std::ptrdiff_t>(segment));
  out.proposed_state.dispersion = state.dispersion;

  const double prior_new = structural_log_prior(series, out.proposed_state, context);
  if (prior_new == kNegInf) {
    out.log_hastings = kNegInf;
    return out;
  }
  const auto cur_ll = liks_or_compute(series, state, cache, config.use_likelihood);
  out.segment_log_lik = cur_ll;
  out.segment_log_lik.erase(out.segment_log_lik.begin() + static_cast<std::ptrdiff_t>(segment));
  out.segment_log_lik[segment - 1] = segment_lik(series, out.proposed_state, segment - 1, config.use_likelihood);

  const std::size_t m_new = m - 1;
  const auto probs_here = move_probabilities(m, context.prior.m_max);
  const auto probs_there = move_probabilities(m_new, context.prior.m_max);
  double log_move_ratio;
  double log_choose_reverse;
  double log_choose_forward;
  if (config.approx_move_ratios) {
    log_move_ratio = 0.0;
    log_choose_reverse = -std::log(static_cast<double>(seg.length() - m_new));
    log_choose_forward = -std::log(static_cast<double>(m - 1));
  } else {
    log_move_ratio = std::log(probs_there[static_cast<std::size_t>(RjMoveKind::Birth)]) -
                     std::log(probs_here[static_cast<std::size_t>(RjMoveKind::Death)]);
    log_choose_reverse = -std::log(static_cast<double>(
        feasible_birth_positions(out.proposed_state.segmentation, context.prior.q_gap).size()));
    log_choose_forward = -std::log(static_cast<double>(m - 1));
  }
  const double log_q_params =
      birth_params_log_density(state.params[segment], state.params[segment - 1],
                               segment_max_cumulative(series, seg, segment), context.prior, series.population(),
                               config);

  out.log_hastings = (sum(out.segment_log_lik) - sum(cur_ll)) +
                     (prior_new - structural_log_prior(series, state, context)) + log_move_ratio +
                     log_choose_reverse - log_choose_forward + log_q_params;
  return out;
}

MoveOutcome birth_move(const EpidemicSeries& series, const ModelState& state, const RjContext& context,
                       const SamplerConfig& config, Random& rng, std::span<const double> cache) {
  const auto feasible = feasible_birth_positions(state.segmentation, context.prior.q_gap);
  if (feasible.empty() || state.segmentation.segment_count() >= context.prior.m_max) {
    throw NoFreeChangepoint("no feasible birth position");
  }
  const std::size_t position = feasible[rng.index(feasible.size())];
  const std::size_t split = state.segmentation.segment_of(position);
  const std::int64_t right_max = series.cumulative()[state.segmentation.segment_end(split) - 1];
  const SegmentParams drawn =
      draw_birth_params(state.params[split], right_max, context.prior, series.population(), config, rng);
  MoveOutcome out = evaluate_birth(series, state, position, drawn, context, config, cache);
  out.accepted = metropolis_accept(out.log_hastings, rng);
  return out;
}

MoveOutcome birth_move(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior,
                       const SamplerConfig& config, Random& rng) {
  return birth_move(series, state, make_rj_context(series, prior), config, rng);
}

MoveOutcome death_move(const EpidemicSeries& series, const ModelState& state, const RjContext& context,
                       const SamplerConfig& config, Random& rng, std::span<const double> cache) {
  const std::size_t m = state.segmentation.segment_count();
  if (m < 2) {
    throw NoFreeChangepoint("death needs a free change point");
  }
  const std::size_t segment = 1 + rng.index(m - 1);
  MoveOutcome out = evaluate_death(series, state, segment, context, config, cache);
  out.accepted = metropolis_accept(out.log_hastings, rng);
  return out;
}

MoveOutcome death_move(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior,
                       const SamplerConfig& config, Random& rng) {
  return death_move(series, state, make_rj_context(series, prior), config, rng);
}

double log_posterior_auto(const EpidemicSeries& series, const ModelState& state, double log_lik,
                          const RjContext& context) {
  return log_lik + structural_log_prior(series, state, context) +
         log_prior_dispersion(state.dispersion, context.prior);
}

ChainTrace run_auto_chain(const EpidemicSeries& series, const PriorSpec& prior, const SamplerConfig& config,
                          Random& rng) {
  prior.validate();
  config.validate();
  series.require_two_segments(prior.q_gap);
  for (double v : {config.step_K, config.step_lambda, config.step_p}) {
    if (!(v > 0.0)) throw ValidationError("automatic M needs positive K, lambda and p step sizes");
  }
  const RjContext context = make_rj_context(series, prior);
  ModelState state = initial_state(series, 1, context.prior);
  std::vector<double> cache = segment_log_liks(series, state, config.use_likelihood);

  ChainTrace trace;
  trace.series_length = series.length();
  trace.automatic = true;
  trace.samples.reserve(config.retained());

  auto adopt = [&](MoveOutcome&& outcome) {
    trace.acceptance.record(outcome.move_kind, outcome.accepted);
    if (outcome.accepted) {
      state = std::move(outcome.proposed_state);
      cache = std::move(outcome.segment_log_lik);
    }
  };
  auto sweep_params = [&] {
    for (std::size_t j = 0; j < state.params.size(); ++j) {
      for (ParamKind kind : {ParamKind::Lambda, ParamKind::K, ParamKind::P}) {
        adopt(mh_update_segment_param(series, state, j, kind, context.prior, config, rng, cache));
      }
    }
  };

  for (std::size_t it = 0; it < config.total_iterations; ++it) {
    const std::size_t m = state.segmentation.segment_count();
    RjMoveKind kind = select_move(m, context.prior.m_max, rng);
    if (kind == RjMoveKind::Birth && feasible_birth_positions(state.segmentation, context.prior.q_gap).empty()) {
      kind = RjMoveKind::Stay;
    }
    switch (kind) {
      case RjMoveKind::Birth: adopt(birth_move(series, state, context, config, rng, cache)); break;
      case RjMoveKind::Death: adopt(death_move(series, state, context, config, rng, cache)); break;
      case RjMoveKind::LocalSwap:
      case RjMoveKind::GlobalSwap: {
        const MoveKind mk = kind == RjMoveKind::LocalSwap ? MoveKind::LocalSwap : MoveKind::GlobalSwap;
        if (m >= 2) adopt(mh_indicator_move(series, state, mk, context.prior, config, rng, cache));
        sweep_params();
        break;
      }
      case RjMoveKind::Stay:
        trace.acceptance.record(MoveKind::Stay, true);
        sweep_params();
        break;
    }
    adopt(mh_update_dispersion(series, state, context.prior, config, rng, cache));

    if (state.params.size() != state.segmentation.segment_count()) {
      throw Error(ErrorKind::Validation, "dimension mismatch after iteration " + std::to_string(it));
    }
    if (it >= config.burn_in) {
      TraceSample sample;
      sample.iteration = it;
      sample.log_lik = sum(cache);
      sample.log_prior_indicator =
          log_prior_indicator_given_count(state.segmentation, context.prior, context.normalizers);
      sample.log_posterior = log_posterior_auto(series, state, sample.log_lik, context);
      sample.state = state;
      trace.samples.push_back(std::move(sample));
    }
  }
  return trace;
}

}  // namespace episeg
