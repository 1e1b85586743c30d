#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace episeg {

/// splitmix64 finalizer; used to derive independent stream seeds from (base, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Owns one Mersenne Twister stream. Every chain, replicate and forecast path
/// gets its own instance so results do not depend on scheduling.
class Random {
 public:
  using Engine = std::mt19937_64;

  explicit Random(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  // strictly inside (0, 1); safe to take logs or invert a CDF
  double uniform_open();

  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }

  double gamma(double shape, double scale) { return std::gamma_distribution<double>(shape, scale)(engine_); }
  std::int64_t poisson(double mean);

  std::uint64_t next_u64() { return engine_(); }
  Engine& engine() { return engine_; }

 private:
  Engine engine_;
};

// Standard normal helpers, accurate in both tails.
double normal_cdf(double z);
double normal_quantile(double p);

/// ln(Phi(hi) - Phi(lo)) for standardized bounds; either bound may be infinite.
double log_standard_normal_mass(double lo, double hi);

/// Draw from N(mean, sd^2) restricted to [lo, hi] by inversion.
double sample_truncated_normal(double mean, double sd, double lo, double hi, Random& rng);

double truncated_normal_log_density(double x, double mean, double sd, double lo, double hi);

}  // namespace episeg
