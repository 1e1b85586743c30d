#include "episeg/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "episeg/errors.hpp"

namespace episeg {

namespace {

void check_changepoints(const std::vector<std::size_t>& cps, std::size_t horizon, std::size_t segments) {
  if (horizon < 1) throw ValidationError("horizon must be positive");
  if (segments != cps.size() + 1) {
    throw ValidationError("need one parameter set per segment: " + std::to_string(cps.size() + 1) + " expected, " +
                          std::to_string(segments) + " given");
  }
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] < 1 || cps[i] >= horizon) throw ValidationError("change points must lie in [1, T-1]");
    if (i > 0 && cps[i] <= cps[i - 1]) throw ValidationError("change points must be strictly increasing");
  }
}

}  // namespace

std::int64_t nb_draw(double mean, double dispersion, Random& rng) {
  if (!(mean > 0.0) || !(dispersion > 0.0) || !std::isfinite(mean) || !std::isfinite(dispersion)) {
    throw DomainError("NB draw needs positive finite mean and dispersion");
  }
  return rng.poisson(rng.gamma(dispersion, mean / dispersion));
}

std::vector<SegmentParams> GlcScenario::segment_params() const {
  std::vector<SegmentParams> out;
  for (std::size_t m = 0; m < lambda.size(); ++m) {
    out.push_back(SegmentParams{final_size[m], lambda[m], scaling[m]});
  }
  return out;
}

void GlcScenario::validate() const {
  if (lambda.size() != final_size.size() || lambda.size() != scaling.size()) {
    throw ValidationError("lambda, K and p must have one entry per segment");
  }
  check_changepoints(changepoints, horizon, lambda.size());
  if (population < 1 || initial_count < 1 || initial_count > population) {
    throw ValidationError("need 1 <= C0 <= N");
  }
  for (std::size_t m = 0; m < lambda.size(); ++m) {
    if (!(lambda[m] > 0.0) || !(final_size[m] > 0.0) || !(scaling[m] >= 0.0 && scaling[m] <= 1.0)) {
      throw ValidationError("segment " + std::to_string(m + 1) + " has invalid parameters");
    }
  }
  if (!(dispersion > 0.0)) throw ValidationError("dispersion must be positive");
}

void SirScenario::validate() const {
  check_changepoints(changepoints, horizon, r0.size());
  if (population < 1) throw ValidationError("population must be positive");
  if (initial_infected < 1 || initial_removed < 0 || initial_infected + initial_removed > population) {
    throw ValidationError("need I0 >= 1, R0 >= 0 and I0 + R0 <= N");
  }
  for (double r : r0) {
    if (!(r > 0.0)) throw ValidationError("reproduction numbers must be positive");
  }
  if (!(removal_rate > 0.0)) throw ValidationError("removal rate must be positive");
  if (!(dispersion_s > 0.0) || !(dispersion_r > 0.0)) throw ValidationError("dispersions must be positive");
}

SimulatedData simulate_glc(const GlcScenario& scenario) {
  Random rng(scenario.seed);
  return simulate_glc(scenario, rng);
}

SimulatedData simulate_glc(const GlcScenario& scenario, Random& rng) {
  scenario.validate();
  const auto params = scenario.segment_params();
  Segmentation truth(scenario.horizon, scenario.changepoints);
  std::vector<std::int64_t> cumulative(scenario.horizon);
  std::int64_t current = scenario.initial_count;
  for (std::size_t t = 0; t < scenario.horizon; ++t) {
    const double mean = glc_mean(current, params[truth.segment_of(t)]);
    current = std::min(scenario.population, current + nb_draw(mean, scenario.dispersion, rng));
    cumulative[t] = current;
  }
  return {EpidemicSeries(scenario.initial_count, std::move(cumulative), scenario.population), std::move(truth)};
}

SimulatedData simulate_sir(const SirScenario& scenario, SirPath* path) {
  scenario.validate();
  Random rng(scenario.seed);
  Segmentation truth(scenario.horizon, scenario.changepoints);
  const std::int64_t n = scenario.population;
  const double nd = static_cast<double>(n);
  std::int64_t s = n - scenario.initial_infected - scenario.initial_removed;
  std::int64_t r = scenario.initial_removed;
  std::int64_t i = scenario.initial_infected;
  if (path != nullptr) {
    *path = SirPath{{s}, {i}, {r}};
  }
  auto draw = [&](double mean, double dispersion) -> std::int64_t {
    return mean > 0.0 ? nb_draw(mean, dispersion, rng) : 0;  // extinction absorbs
  };
  std::vector<std::int64_t> cumulative(scenario.horizon);
  for (std::size_t t = 0; t < scenario.horizon; ++t) {
    const double beta = scenario.transmission_rate(truth.segment_of(t));
    const double sd = static_cast<double>(s);
    const double id = static_cast<double>(i);
    const std::int64_t infections = std::min(s, draw(beta * sd * id / nd, scenario.dispersion_s));
    const std::int64_t removals = draw(scenario.removal_rate * id, scenario.dispersion_r);
    s -= infections;
    // removals cannot exceed the infected pool after this step's infections
    r += std::min(removals, i + infections);
    i = n - s - r;
    cumulative[t] = n - s;
    if (path != nullptr) {
      path->susceptible.push_back(s);
      path->infected.push_back(i);
      path->removed.push_back(r);
    }
  }
  const std::int64_t c0 = scenario.initial_infected + scenario.initial_removed;  // N - S_0
  return {EpidemicSeries(c0, std::move(cumulative), n), std::move(truth)};
}

std::vector<SimulatedData> simulate_glc_batch(const GlcScenario& scenario, std::size_t replicates) {
  std::vector<SimulatedData> out;
  out.reserve(replicates);
  for (std::size_t k = 0; k < replicates; ++k) {
    GlcScenario copy = scenario;
    copy.seed = scenario.seed + k;
    out.push_back(simulate_glc(copy));
  }
  return out;
}

std::vector<SimulatedData> simulate_sir_batch(const SirScenario& scenario, std::size_t replicates) {
  std::vector<SimulatedData> out;
  out.reserve(replicates);
  for (std::size_t k = 0; k < replicates; ++k) {
    SirScenario copy = scenario;
    copy.seed = scenario.seed + k;
    out.push_back(simulate_sir(copy));
  }
  return out;
}

}  // namespace episeg
