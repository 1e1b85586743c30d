#include "episeg/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace episeg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::numbers::sqrt2;

// lower-tail probability computed without cancellation for z <= 0
double lower_tail(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double sample_standard_truncated(double a, double b, Random& rng) {
  if (a > 0.0) {
    return -sample_standard_truncated(-b, -a, rng);
  }
  const double pa = lower_tail(a);
  const double pb = b <= 0.0 ? lower_tail(b) : 1.0 - 0.5 * std::erfc(b / kSqrt2);
  if (!(pb > pa)) {
    return std::isfinite(b) ? 0.5 * (a + b) : a;
  }
  const double u = pa + rng.uniform_open() * (pb - pa);
  return std::clamp(normal_quantile(u), a, b);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Random::uniform_open() {
  double u = uniform();
  while (u <= 0.0) {
    u = uniform();
  }
  return u;
}

std::int64_t Random::poisson(double mean) {
  if (!(mean > 0.0)) {
    return 0;
  }
  return std::poisson_distribution<std::int64_t>(mean)(engine_);
}

double normal_cdf(double z) { return z <= 0.0 ? lower_tail(z) : 1.0 - 0.5 * std::erfc(z / kSqrt2); }

double normal_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  if (p < 0.5) {
    return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
  }
  return kSqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
}

double log_standard_normal_mass(double lo, double hi) {
  if (!(hi > lo)) {
    return -kInf;
  }
  double mass;
  if (lo > 0.0) {
    mass = 0.5 * (std::erfc(lo / kSqrt2) - std::erfc(hi / kSqrt2));
  } else if (hi < 0.0) {
    mass = 0.5 * (std::erfc(-hi / kSqrt2) - std::erfc(-lo / kSqrt2));
  } else {
    mass = 1.0 - lower_tail(lo) - 0.5 * std::erfc(hi / kSqrt2);
  }
  return mass > 0.0 ? std::log(mass) : -kInf;
}

double sample_truncated_normal(double mean, double sd, double lo, double hi, Random& rng) {
  if (sd <= 0.0) {
    return std::clamp(mean, lo, hi);
  }
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  return std::clamp(mean + sd * sample_standard_truncated(a, b, rng), lo, hi);
}

double truncated_normal_log_density(double x, double mean, double sd, double lo, double hi) {
  if (x < lo || x > hi) {
    return -kInf;
  }
  const double z = (x - mean) / sd;
  constexpr double kLogSqrt2Pi = 0.91893853320467274178;
  return -0.5 * z * z - kLogSqrt2Pi - std::log(sd) - log_standard_normal_mass((lo - mean) / sd, (hi - mean) / sd);
}

}  // namespace episeg
