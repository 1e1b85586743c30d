#pragma once

// Shared fixtures and independent reference implementations for the tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/distributions/negative_binomial.hpp>

#include "episeg/core_model.hpp"
#include "episeg/random.hpp"

namespace episeg::testing {

/// NB log-pmf through Boost's (r, p) parameterization.
inline double reference_nb_log_pmf(std::int64_t y, double mean, double dispersion) {
  const boost::math::negative_binomial_distribution<double> dist(dispersion, dispersion / (mean + dispersion));
  return std::log(boost::math::pdf(dist, static_cast<double>(y)));
}

/// Deterministic GLC path C_t = C_{t-1} + g(C_{t-1}) with a real-valued state.
inline std::vector<double> glc_recursion(double c0, const SegmentParams& p, std::size_t steps) {
  std::vector<double> out;
  double c = c0;
  for (std::size_t t = 0; t < steps; ++t) {
    const double mean = std::max(p.growth_rate * std::pow(c, p.scaling) * (1.0 - c / p.final_size), kMeanFloor);
    c += mean;
    out.push_back(c);
  }
  return out;
}

/// A random nondecreasing series with moderate daily increments.
inline EpidemicSeries random_series(std::size_t length, std::uint64_t seed, std::int64_t population = 100000) {
  Random rng(seed);
  std::vector<std::int64_t> c(length);
  std::int64_t current = 10;
  for (auto& v : c) {
    current += static_cast<std::int64_t>(rng.index(40));
    v = current;
  }
  return EpidemicSeries(10, std::move(c), population);
}

}  // namespace episeg::testing
