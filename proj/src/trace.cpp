#include "episeg/trace.hpp"

#include <limits>

#include "episeg/errors.hpp"

namespace episeg {

const char* to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::LocalSwap: return "local_swap";
    case MoveKind::GlobalSwap: return "global_swap";
    case MoveKind::Shift: return "shift";
    case MoveKind::ParamLambda: return "lambda";
    case MoveKind::ParamK: return "final_size";
    case MoveKind::ParamP: return "scaling";
    case MoveKind::Dispersion: return "dispersion";
    case MoveKind::Birth: return "birth";
    case MoveKind::Death: return "death";
    case MoveKind::Stay: return "stay";
  }
  return "unknown";
}

ChainTrace pool_traces(const std::vector<ChainTrace>& traces) {
  ChainTrace pooled;
  if (traces.empty()) return pooled;
  pooled.series_length = traces.front().series_length;
  pooled.automatic = traces.front().automatic;
  for (const auto& trace : traces) {
    if (trace.series_length != pooled.series_length) {
      throw ValidationError("cannot pool traces of different series lengths");
    }
    pooled.samples.insert(pooled.samples.end(), trace.samples.begin(), trace.samples.end());
    for (std::size_t k = 0; k < kMoveKindCount; ++k) {
      pooled.acceptance.proposed[k] += trace.acceptance.proposed[k];
      pooled.acceptance.accepted[k] += trace.acceptance.accepted[k];
    }
  }
  return pooled;
}

std::size_t best_chain(const std::vector<ChainTrace>& traces) {
  if (traces.empty()) throw ValidationError("no chains to choose from");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < traces.size(); ++c) {
    for (const auto& sample : traces[c].samples) {
      if (sample.log_posterior > best_value) {
        best_value = sample.log_posterior;
        best = c;
      }
    }
  }
  return best;
}

}  // namespace episeg
