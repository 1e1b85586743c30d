#pragma once

// Random-walk Metropolis-Hastings for a fixed number of segments M.
// delta is moved by local swap / shift / global swap (0.4 / 0.4 / 0.2);
// lambda, K, p and phi use log-scale (truncated) normal proposals whose
// Hastings ratio includes the log Jacobian and the truncation constants.

#include <cstddef>
#include <span>
#include <vector>

#include "episeg/core_model.hpp"
#include "episeg/errors.hpp"
#include "episeg/random.hpp"
#include "episeg/trace.hpp"

namespace episeg {

enum class ParamKind { Lambda, K, P };

struct MoveOutcome {
  ModelState proposed_state;
  double log_hastings = 0.0;
  bool accepted = false;
  MoveKind move_kind = MoveKind::Stay;
  // per-segment log-likelihood of proposed_state (empty when not evaluated)
  std::vector<double> segment_log_lik;
};

/// No free change point (M = 1) or no free empty slot to move one into.
class NoFreeChangepoint : public Error {
 public:
  explicit NoFreeChangepoint(const std::string& message) : Error(ErrorKind::Infeasible, message) {}
};

Segmentation propose_local_swap(const Segmentation& segmentation, Random& rng);
Segmentation propose_global_swap(const Segmentation& segmentation, std::size_t q_gap, Random& rng);
Segmentation propose_shift(const Segmentation& segmentation, Random& rng);

/// Metropolis accept step on ln h; draws a uniform only when ln h < 0.
bool metropolis_accept(double log_hastings, Random& rng);

/// Per-segment log-likelihoods of a state; zeros when the likelihood is disabled.
std::vector<double> segment_log_liks(const EpidemicSeries& series, const ModelState& state, bool use_likelihood = true);

/// Indicator MH step with a given delta proposal kind (LocalSwap, GlobalSwap or Shift).
/// `cache` holds the current per-segment log-likelihoods, or is empty.
MoveOutcome mh_indicator_move(const EpidemicSeries& series, const ModelState& state, MoveKind kind,
                              const PriorSpec& prior, const SamplerConfig& config, Random& rng,
                              std::span<const double> cache = {});

/// Picks local swap (0.4), shift (0.4) or global swap (0.2) and runs the MH step.
MoveOutcome mh_update_indicator(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior,
                                const SamplerConfig& config, Random& rng, std::span<const double> cache = {});
MoveOutcome mh_update_indicator(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior,
                                Random& rng);

MoveOutcome mh_update_segment_param(const EpidemicSeries& series, const ModelState& state, std::size_t segment,
                                    ParamKind kind, const PriorSpec& prior, const SamplerConfig& config,
                                    Random& rng, std::span<const double> cache = {});

/// ln phi* ~ TN(ln phi, sigma_phi^2, 0, ln 100), scored with the full likelihood.
MoveOutcome mh_update_dispersion(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior,
                                 const SamplerConfig& config, Random& rng, std::span<const double> cache = {});

/// Equally spaced change points, lambda = 0.1, p = 0.9, K at the middle of
/// its support, phi = 1. Throws InfeasibleError when m * Q > T.
ModelState initial_state(const EpidemicSeries& series, std::size_t m, const PriorSpec& prior);

/// Sweep = one indicator move, (lambda, K, p) for each segment in order, then phi.
ChainTrace run_fixed_chain(const EpidemicSeries& series, std::size_t m, const PriorSpec& prior,
                           const SamplerConfig& config, Random& rng);

// Used by both samplers to score and record states.
double log_posterior_fixed(const EpidemicSeries& series, const ModelState& state, double log_lik,
                           const PriorSpec& prior, std::span<const double> normalizers);

}  // namespace episeg
