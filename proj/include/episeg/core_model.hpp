#pragma once

// Piecewise generalized-logistic growth model with negative-binomial counts:
// domain types, the data likelihood and every prior density. Samplers and
// post-processing only go through these functions for probabilities.
//
// Conventions
//  - time is 0-based; t = 0 always opens segment 0 (the "zeroth change point").
//  - NB(mean, dispersion) has variance mean + mean^2 / dispersion.
//  - Gamma(a, b) uses the rate b (mean a / b).
//  - logs are natural.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace episeg {

inline constexpr double kMeanFloor = 1e-10;
inline constexpr double kMaxDispersion = 100.0;

/// Observed cumulative counts C_1..C_T, the count C_0 before the first
/// observation and the population size. New cases are derived on construction.
class EpidemicSeries {
 public:
  EpidemicSeries() = default;
  EpidemicSeries(std::int64_t initial_count, std::vector<std::int64_t> cumulative, std::int64_t population,
                 std::vector<std::string> labels = {});

  std::size_t length() const { return cumulative_.size(); }
  std::int64_t initial_count() const { return initial_count_; }
  std::int64_t population() const { return population_; }
  std::span<const std::int64_t> cumulative() const { return cumulative_; }
  std::span<const std::int64_t> new_cases() const { return new_cases_; }
  const std::vector<std::string>& labels() const { return labels_; }

  // C_{t-1}, with C_0 for t = 0
  std::int64_t previous_cumulative(std::size_t t) const { return t == 0 ? initial_count_ : cumulative_[t - 1]; }
  double log_previous_cumulative(std::size_t t) const { return log_previous_[t]; }
  double log_factorial_new_cases(std::size_t t) const { return log_factorial_[t]; }

  /// Throws ValidationError unless T >= 2Q.
  void require_two_segments(std::size_t q_gap) const;

  /// First n observations (used for held-out forecasting).
  EpidemicSeries head(std::size_t n) const;

  bool operator==(const EpidemicSeries& other) const;

 private:
  std::int64_t initial_count_ = 1;
  std::vector<std::int64_t> cumulative_;
  std::vector<std::int64_t> new_cases_;
  std::int64_t population_ = 1;
  std::vector<std::string> labels_;
  std::vector<double> log_previous_;
  std::vector<double> log_factorial_;
};

/// Change-point configuration stored as the sorted list of segment starts
/// (starts()[0] == 0). The structural invariants (sorted, distinct, in range)
/// always hold; the gap and boundary rules may be violated by proposals and are
/// checked by satisfies().
class Segmentation {
 public:
  Segmentation() = default;
  /// `changepoints` are the free change points (t >= 1), in any order.
  Segmentation(std::size_t length, std::vector<std::size_t> changepoints);

  static Segmentation from_indicator(std::span<const std::uint8_t> indicator);
  static Segmentation from_labels(std::span<const int> labels);

  std::size_t length() const { return length_; }
  std::size_t segment_count() const { return starts_.size(); }
  std::span<const std::size_t> starts() const { return starts_; }
  std::span<const std::size_t> changepoints() const { return std::span<const std::size_t>(starts_).subspan(1); }

  std::size_t segment_begin(std::size_t m) const { return starts_[m]; }
  std::size_t segment_end(std::size_t m) const { return m + 1 < starts_.size() ? starts_[m + 1] : length_; }
  std::size_t segment_of(std::size_t t) const;
  bool is_changepoint(std::size_t t) const;

  std::vector<std::uint8_t> indicator() const;
  /// z_t = sum_{s <= t} delta_s; 1-based labels.
  std::vector<int> labels() const;

  /// Forced zeros at [1, Q-1] and [T-Q+1, T-1]; pairwise gaps >= Q.
  bool satisfies(std::size_t q_gap) const;

  bool operator==(const Segmentation&) const = default;

 private:
  std::size_t length_ = 0;
  std::vector<std::size_t> starts_{0};
};

struct SegmentParams {
  double final_size = 1.0;   // K
  double growth_rate = 0.1;  // lambda
  double scaling = 0.9;      // p

  bool operator==(const SegmentParams&) const = default;
};

struct ModelState {
  Segmentation segmentation;
  std::vector<SegmentParams> params;
  double dispersion = 1.0;

  bool operator==(const ModelState&) const = default;
};

struct PriorSpec {
  double omega_default = 0.001;
  std::map<std::size_t, double> omega_overrides;
  std::size_t q_gap = 7;
  double rho = 0.3;
  double a_lambda = 0.001;
  double b_lambda = 0.001;
  double a_phi = 0.001;
  double b_phi = 0.001;
  double a_p = 1.0;
  double b_p = 1.0;
  double eta = 1e-4;
  std::size_t m_max = 50;

  double omega(std::size_t t) const;
  /// ceil(rho * N), the largest admissible final size.
  double final_size_cap(std::int64_t population) const;
  void validate() const;
};

struct SamplerConfig {
  std::size_t total_iterations = 100000;
  std::size_t burn_in = 50000;
  double step_phi = 1.0;
  double step_K = 1.0;
  double step_lambda = 0.1;
  double step_p = 0.1;
  std::uint64_t seed = 1;
  // birth/death use the approximate 1/(T-M), 1/(M*-1) proposal ratios
  bool approx_move_ratios = false;
  // test hook: drop the likelihood so the chain targets the prior
  bool use_likelihood = true;

  std::size_t retained() const { return total_iterations - burn_in; }
  void validate() const;
};

// ---------------------------------------------------------------------------
// likelihood

/// lambda * C^p * (1 - C/K), floored at kMeanFloor. 0^0 is taken as 1.
double glc_mean(std::int64_t prev_cumulative, const SegmentParams& params);
/// Same as glc_mean given ln C (C >= 1).
double glc_mean_from_log(double prev_cumulative, double log_prev_cumulative, const SegmentParams& params);

double nb_log_pmf(std::int64_t count, double mean, double dispersion);

/// Sum of NB log-pmfs over the time points of segment `segment` (0-based).
double segment_log_lik(const EpidemicSeries& series, const Segmentation& segmentation, std::size_t segment,
                       const SegmentParams& params, double dispersion);

/// Same sum over an explicit half-open time range.
double range_log_lik(const EpidemicSeries& series, std::size_t begin, std::size_t end, const SegmentParams& params,
                     double dispersion);

double full_log_lik(const EpidemicSeries& series, const ModelState& state);

// ---------------------------------------------------------------------------
// priors

/// Bernoulli log-prior over the free positions [Q, T-Q]; -inf when the
/// forced positions or the gap rule are violated.
double log_prior_indicator(const Segmentation& segmentation, const PriorSpec& prior);
double log_prior_indicator(std::span<const std::uint8_t> indicator, const PriorSpec& prior);

/// ln Z_M for M = 0..floor(T/Q): total Bernoulli mass of the admissible
/// configurations with exactly M segments (-inf where none exist; index 0 unused).
std::vector<double> log_indicator_normalizers(std::size_t length, const PriorSpec& prior);

/// ln pi(delta | M) = log_prior_indicator - ln Z_M.
double log_prior_indicator_given_count(const Segmentation& segmentation, const PriorSpec& prior,
                                       std::span<const double> normalizers);

/// Uniform K on (max C, ceil(rho N)], Gamma lambda, Beta p.
double log_prior_segment_params(const SegmentParams& params, std::int64_t segment_max_cumulative,
                                const PriorSpec& prior, std::int64_t population);

double log_prior_dispersion(double dispersion, const PriorSpec& prior);

/// Truncated Poisson(eta) on [1, m_max].
double log_prior_segment_count(std::size_t m, const PriorSpec& prior);

/// Largest M with an admissible configuration: floor(T / Q).
std::size_t max_segment_count(std::size_t length, std::size_t q_gap);

std::int64_t segment_max_cumulative(const EpidemicSeries& series, const Segmentation& segmentation,
                                    std::size_t segment);

/// Sum of log_prior_segment_params over all segments of the state.
double log_prior_all_params(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior);

/// Gamma(shape a, rate b) log-density; -inf for x <= 0.
double gamma_log_density(double x, double shape, double rate);
double beta_log_density(double x, double a, double b);

}  // namespace episeg
