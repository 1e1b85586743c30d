#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "episeg/core_model.hpp"

namespace episeg {

enum class MoveKind { LocalSwap, GlobalSwap, Shift, ParamLambda, ParamK, ParamP, Dispersion, Birth, Death, Stay };
inline constexpr std::size_t kMoveKindCount = 10;

const char* to_string(MoveKind kind);

struct TraceSample {
  std::size_t iteration = 0;
  ModelState state;
  double log_lik = 0.0;
  /// log pi(delta | M) as used by the MAP criterion
  double log_prior_indicator = 0.0;
  /// log-likelihood plus every prior term the chain targets
  double log_posterior = 0.0;
};

struct AcceptanceCounts {
  std::array<std::size_t, kMoveKindCount> proposed{};
  std::array<std::size_t, kMoveKindCount> accepted{};

  void record(MoveKind kind, bool was_accepted) {
    ++proposed[static_cast<std::size_t>(kind)];
    if (was_accepted) ++accepted[static_cast<std::size_t>(kind)];
  }
  double rate(MoveKind kind) const {
    const auto i = static_cast<std::size_t>(kind);
    return proposed[i] == 0 ? 0.0 : static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]);
  }
};

/// Post-burn-in samples of one chain.
struct ChainTrace {
  std::size_t series_length = 0;
  bool automatic = false;
  std::vector<TraceSample> samples;
  AcceptanceCounts acceptance;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
};

/// Concatenates post-burn-in samples of several chains (multi-chain pooling).
ChainTrace pool_traces(const std::vector<ChainTrace>& traces);

/// Index of the chain whose best recorded log-posterior is highest; the
/// earliest chain wins ties. Used to drop chains stuck in a minor mode.
std::size_t best_chain(const std::vector<ChainTrace>& traces);

}  // namespace episeg
