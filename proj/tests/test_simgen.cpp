#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "episeg/errors.hpp"
#include "episeg/simgen.hpp"

using namespace episeg;

TEST_CASE("negative binomial draws have the expected moments") {
  for (auto [mu, phi] : {std::pair{5.0, 10.0}, std::pair{40.0, 2.0}, std::pair{0.7, 0.5}}) {
    Random rng(1);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto y = nb_draw(mu, phi, rng);
      REQUIRE(y >= 0);
      sum += static_cast<double>(y);
      sum_sq += static_cast<double>(y) * static_cast<double>(y);
    }
    const double mean = sum / n;
    const double var = (sum_sq - n * mean * mean) / (n - 1);
    CAPTURE(mu);
    CHECK(std::abs(mean - mu) < 0.02 * mu + 1e-3);
    CHECK(std::abs(var - (mu + mu * mu / phi)) < 0.05 * (mu + mu * mu / phi));
  }
  Random rng(2);
  CHECK_THROWS_AS(nb_draw(0.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(nb_draw(1.0, 0.0, rng), DomainError);
}

TEST_CASE("large dispersion approaches the Poisson law") {
  const double mu = 5.0;
  const int n = 100000;
  const std::size_t bins = 14;  // 0..12 and a tail bin
  std::vector<double> observed(bins, 0.0);
  Random rng(3);
  for (int i = 0; i < n; ++i) observed[std::min<std::size_t>(nb_draw(mu, 1e6, rng), bins - 1)] += 1.0;
  const boost::math::poisson_distribution<double> poisson(mu);
  double stat = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double p = k + 1 < bins ? boost::math::pdf(poisson, static_cast<double>(k))
                                  : boost::math::cdf(boost::math::complement(poisson, static_cast<double>(k - 1)));
    const double expected = p * n;
    stat += (observed[k] - expected) * (observed[k] - expected) / expected;
  }
  CHECK(stat < boost::math::quantile(boost::math::chi_squared(bins - 1.0), 0.99));
}

TEST_CASE("default GLC scenario") {
  const GlcScenario sc;
  CHECK(sc.horizon == 150);
  CHECK(sc.population == 200000);
  CHECK(sc.initial_count == 100);
  CHECK(sc.changepoints == std::vector<std::size_t>{52, 103});
  CHECK(sc.lambda == std::vector<double>{0.1, 0.06, 0.08});
  CHECK(sc.final_size == std::vector<double>{10000.0, 9000.0, 15000.0});
  CHECK(sc.scaling == std::vector<double>{0.9, 0.85, 0.9});

  const auto data = simulate_glc(sc);
  CHECK(data.series.length() == 150);
  CHECK(data.truth == Segmentation(150, {52, 103}));
  std::int64_t prev = sc.initial_count;
  for (auto c : data.series.cumulative()) {
    CHECK(c >= prev);
    CHECK(c <= sc.population);
    prev = c;
  }
}

TEST_CASE("GLC output is capped at the population") {
  GlcScenario sc;
  sc.population = 3000;
  sc.changepoints = {};
  sc.lambda = {2.0};
  sc.final_size = {1e9};
  sc.scaling = {1.0};
  const auto data = simulate_glc(sc);
  CHECK(data.series.cumulative().back() == 3000);
  for (auto c : data.series.cumulative()) CHECK(c <= 3000);
}

TEST_CASE("GLC draws are plain nb_draw calls on the same stream") {
  GlcScenario sc;
  sc.dispersion = 10.0;
  sc.seed = 77;
  const auto data = simulate_glc(sc);
  Random rng(77);
  const auto params = sc.segment_params();
  const Segmentation truth(sc.horizon, sc.changepoints);
  std::int64_t current = sc.initial_count;
  for (std::size_t t = 0; t < sc.horizon; ++t) {
    current = std::min(sc.population, current + nb_draw(glc_mean(current, params[truth.segment_of(t)]), 10.0, rng));
    CHECK(data.series.cumulative()[t] == current);
  }
}

TEST_CASE("near-Poisson GLC runs track the recursion step by step") {
  // Whole paths drift away from the noise-free curve (early counts are small
  // and the growth phase amplifies them), so each step is checked against the
  // recursion started from the simulated previous value.
  GlcScenario sc;
  sc.dispersion = 1e6;
  const auto params = sc.segment_params();
  const Segmentation truth(sc.horizon, sc.changepoints);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    sc.seed = seed;
    const auto data = simulate_glc(sc);
    double prev = static_cast<double>(sc.initial_count);
    for (std::size_t t = 0; t < sc.horizon; ++t) {
      const auto& p = params[truth.segment_of(t)];
      const double mu = p.growth_rate * std::pow(prev, p.scaling) * (1.0 - prev / p.final_size);
      const double c = static_cast<double>(data.series.cumulative()[t]);
      CAPTURE(seed);
      CAPTURE(t);
      CHECK(std::abs(c - prev - mu) <= 5.0 * std::sqrt(mu * (1.0 + mu / sc.dispersion)) + 1.0);
      CHECK(std::abs(c - (prev + mu)) / (prev + mu) < 0.05);
      prev = c;
    }
  }
}

TEST_CASE("default SIR scenario and conservation") {
  const SirScenario sc;
  CHECK(sc.horizon == 120);
  CHECK(sc.population == 1000000);
  CHECK(sc.changepoints == std::vector<std::size_t>{31, 61, 91});
  CHECK(sc.r0 == std::vector<double>{3.0, 2.0, 1.1, 0.5});
  CHECK(sc.removal_rate == 0.03);
  CHECK(sc.initial_infected == 100);
  CHECK(sc.initial_removed == 0);
  CHECK(sc.transmission_rate(0) == doctest::Approx(0.09));

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SirScenario run = sc;
    run.seed = seed;
    run.dispersion_s = run.dispersion_r = seed % 2 == 0 ? 10.0 : 100.0;
    SirPath path;
    const auto data = simulate_sir(run, &path);
    REQUIRE(path.susceptible.size() == run.horizon + 1);
    CHECK(data.truth == Segmentation(120, {31, 61, 91}));
    for (std::size_t t = 0; t <= run.horizon; ++t) {
      CHECK(path.susceptible[t] + path.infected[t] + path.removed[t] == run.population);
      CHECK(path.infected[t] >= 0);
      CHECK(path.susceptible[t] >= 0);
      if (t > 0) {
        CHECK(path.susceptible[t] <= path.susceptible[t - 1]);
        CHECK(path.removed[t] >= path.removed[t - 1]);
        CHECK(data.series.cumulative()[t - 1] == run.population - path.susceptible[t]);
      }
    }
    CHECK(data.series.initial_count() == run.initial_infected + run.initial_removed);
  }
}

TEST_CASE("sub-critical segment decays") {
  SirScenario sc;
  double start = 0.0, end = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    sc.seed = seed;
    SirPath path;
    simulate_sir(sc, &path);
    // last segment (R0 = 0.5) covers t = 91..119; path index t + 1 holds the state after step t
    start += static_cast<double>(path.infected[91]);
    end += static_cast<double>(path.infected[120]);
  }
  CHECK(end < start);
}

TEST_CASE("batches use seed + k and are reproducible") {
  GlcScenario glc;
  glc.seed = 40;
  const auto batch = simulate_glc_batch(glc, 5);
  REQUIRE(batch.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    GlcScenario one = glc;
    one.seed = 40 + k;
    CHECK(simulate_glc(one).series == batch[k].series);
  }
  CHECK(batch[0].series != batch[1].series);

  SirScenario sir;
  sir.seed = 9;
  const auto sb = simulate_sir_batch(sir, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    SirScenario one = sir;
    one.seed = 9 + k;
    CHECK(simulate_sir(one).series == sb[k].series);
  }
  CHECK(simulate_glc_batch(glc, kDefaultReplicates).size() == 50);
}

TEST_CASE("invalid scenarios are rejected") {
  GlcScenario glc;
  glc.lambda = {0.1};
  CHECK_THROWS(simulate_glc(glc));
  SirScenario sir;
  sir.initial_infected = 0;
  CHECK_THROWS(simulate_sir(sir));
}
