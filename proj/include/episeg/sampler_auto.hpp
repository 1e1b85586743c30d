#pragma once

// Reversible-jump sampler with an unknown number of segments M.
//
// Each iteration picks one of birth / death / local swap / global swap / stay
// (1/4, 1/4, 1/6, 1/6, 1/6, redistributed at M = 1 and M = M_max), then
// updates phi. Swaps and stay also sweep every segment parameter.
//
// Birth inserts a change point at a uniformly chosen feasible slot; the left
// half of the split segment keeps its parameters and the new right segment
// draws (K*, lambda*, p*) from log-scale (truncated) normals centred on them.
// Death removes a uniformly chosen free change point and the merged segment
// keeps the left parameters, so death is the exact inverse of birth.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "episeg/core_model.hpp"
#include "episeg/random.hpp"
#include "episeg/sampler_fixed.hpp"
#include "episeg/trace.hpp"

namespace episeg {

enum class RjMoveKind { Birth, Death, LocalSwap, GlobalSwap, Stay };
inline constexpr std::size_t kRjMoveKindCount = 5;

const char* to_string(RjMoveKind kind);

/// Selection probabilities indexed by RjMoveKind.
std::array<double, kRjMoveKindCount> move_probabilities(std::size_t m, std::size_t m_max);
RjMoveKind select_move(std::size_t m, std::size_t m_max, Random& rng);

/// Quantities shared by every trans-dimensional step of one chain.
struct RjContext {
  PriorSpec prior;                  // m_max clamped to floor(T / Q)
  std::vector<double> normalizers;  // ln Z_M from log_indicator_normalizers
  std::vector<double> log_prior_m;  // ln pi(M), index 0 unused
};

RjContext make_rj_context(const EpidemicSeries& series, const PriorSpec& prior);

/// Free slots t with delta_t = 0 that keep every segment at least Q long.
std::vector<std::size_t> feasible_birth_positions(const Segmentation& segmentation, std::size_t q_gap);

/// Log density (original scale) of the new-segment proposal centred on `centre`.
double birth_params_log_density(const SegmentParams& drawn, const SegmentParams& centre,
                                std::int64_t segment_max_cumulative, const PriorSpec& prior,
                                std::int64_t population, const SamplerConfig& config);

SegmentParams draw_birth_params(const SegmentParams& centre, std::int64_t segment_max_cumulative,
                                const PriorSpec& prior, std::int64_t population, const SamplerConfig& config,
                                Random& rng);

/// Hastings ratio of inserting a change point at `position` with new-segment
/// parameters `drawn`. Does not draw the accept decision.
MoveOutcome evaluate_birth(const EpidemicSeries& series, const ModelState& state, std::size_t position,
                           const SegmentParams& drawn, const RjContext& context, const SamplerConfig& config,
                           std::span<const double> cache = {});

/// Hastings ratio of deleting the change point that opens segment `segment` (>= 1).
MoveOutcome evaluate_death(const EpidemicSeries& series, const ModelState& state, std::size_t segment,
                           const RjContext& context, const SamplerConfig& config,
                           std::span<const double> cache = {});

/// Full birth step. Throws NoFreeChangepoint when no feasible slot exists.
MoveOutcome birth_move(const EpidemicSeries& series, const ModelState& state, const RjContext& context,
                       const SamplerConfig& config, Random& rng, std::span<const double> cache = {});
MoveOutcome birth_move(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior,
                       const SamplerConfig& config, Random& rng);

/// Full death step. Throws NoFreeChangepoint when M = 1.
MoveOutcome death_move(const EpidemicSeries& series, const ModelState& state, const RjContext& context,
                       const SamplerConfig& config, Random& rng, std::span<const double> cache = {});
MoveOutcome death_move(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior,
                       const SamplerConfig& config, Random& rng);

/// log-likelihood plus ln pi(M), ln pi(delta | M), the segment and phi priors.
double log_posterior_auto(const EpidemicSeries& series, const ModelState& state, double log_lik,
                          const RjContext& context);

ChainTrace run_auto_chain(const EpidemicSeries& series, const PriorSpec& prior, const SamplerConfig& config,
                          Random& rng);

}  // namespace episeg
