#pragma once

// Synthetic epidemics with known segmentations: piecewise GLC counts with
// negative-binomial noise, and a stochastic SIR model whose transmission
// rate changes at given times.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "episeg/core_model.hpp"
#include "episeg/random.hpp"

namespace episeg {

/// NB(mean, dispersion) as a Gamma(dispersion, mean / dispersion) mixture of Poissons.
std::int64_t nb_draw(double mean, double dispersion, Random& rng);

struct GlcScenario {
  std::size_t horizon = 150;
  std::int64_t population = 200000;
  std::int64_t initial_count = 100;
  std::vector<std::size_t> changepoints{52, 103};
  std::vector<double> lambda{0.1, 0.06, 0.08};
  std::vector<double> final_size{10000.0, 9000.0, 15000.0};
  std::vector<double> scaling{0.9, 0.85, 0.9};
  double dispersion = 100.0;
  std::uint64_t seed = 1;

  std::vector<SegmentParams> segment_params() const;
  void validate() const;
};

struct SirScenario {
  std::size_t horizon = 120;
  std::int64_t population = 1000000;
  std::int64_t initial_infected = 100;
  std::int64_t initial_removed = 0;
  std::vector<std::size_t> changepoints{31, 61, 91};
  std::vector<double> r0{3.0, 2.0, 1.1, 0.5};
  double removal_rate = 0.03;
  double dispersion_s = 100.0;
  double dispersion_r = 100.0;
  std::uint64_t seed = 1;

  /// beta_m = R0_m * gamma
  double transmission_rate(std::size_t segment) const { return r0[segment] * removal_rate; }
  void validate() const;
};

struct SimulatedData {
  EpidemicSeries series;
  Segmentation truth;
};

/// Compartment paths of one SIR run, index 0 holding the initial state.
struct SirPath {
  std::vector<std::int64_t> susceptible;
  std::vector<std::int64_t> infected;
  std::vector<std::int64_t> removed;
};

SimulatedData simulate_glc(const GlcScenario& scenario);
/// Same draws as simulate_glc, consuming an external stream.
SimulatedData simulate_glc(const GlcScenario& scenario, Random& rng);

SimulatedData simulate_sir(const SirScenario& scenario, SirPath* path = nullptr);

inline constexpr std::size_t kDefaultReplicates = 50;

/// Replicate k runs with seed + k. Serial reference for the parallel batch.
std::vector<SimulatedData> simulate_glc_batch(const GlcScenario& scenario, std::size_t replicates);
std::vector<SimulatedData> simulate_sir_batch(const SirScenario& scenario, std::size_t replicates);

}  // namespace episeg
