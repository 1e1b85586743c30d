#include "episeg/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "episeg/errors.hpp"
#include "math_util.hpp"

namespace episeg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_bernoulli(bool success, double omega) {
  if (success) {
    return omega > 0.0 ? std::log(omega) : kNegInf;
  }
  return omega < 1.0 ? std::log1p(-omega) : kNegInf;
}

// NB log-pmf with ln(y!) and ln Gamma(phi) supplied by the caller
double nb_log_pmf_cached(std::int64_t y, double log_y_factorial, double mean, double dispersion,
                         double log_gamma_dispersion) {
  const double yd = static_cast<double>(y);
  double value = log_gamma(yd + dispersion) - log_y_factorial - log_gamma_dispersion -
                 dispersion * std::log1p(mean / dispersion);
  if (y > 0) {
    value += yd * (std::log(mean) - std::log(mean + dispersion));
  }
  return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// EpidemicSeries

EpidemicSeries::EpidemicSeries(std::int64_t initial_count, std::vector<std::int64_t> cumulative,
                               std::int64_t population, std::vector<std::string> labels)
    : initial_count_(initial_count),
      cumulative_(std::move(cumulative)),
      population_(population),
      labels_(std::move(labels)) {
  if (population_ < 1) {
    throw ValidationError("population must be positive, got " + std::to_string(population_));
  }
  if (initial_count_ < 1) {
    throw ValidationError("initial_count must be at least 1, got " + std::to_string(initial_count_));
  }
  if (initial_count_ > population_) {
    throw ValidationError("initial_count " + std::to_string(initial_count_) + " exceeds population " +
                          std::to_string(population_));
  }
  if (cumulative_.empty()) {
    throw ValidationError("series has no observations");
  }
  if (!labels_.empty() && labels_.size() != cumulative_.size()) {
    throw ValidationError("label count does not match observation count");
  }
  new_cases_.resize(cumulative_.size());
  log_previous_.resize(cumulative_.size());
  log_factorial_.resize(cumulative_.size());
  std::int64_t previous = initial_count_;
  for (std::size_t t = 0; t < cumulative_.size(); ++t) {
    const std::int64_t c = cumulative_[t];
    const std::string row = "row " + std::to_string(t + 1);
    if (c < previous) {
      throw ValidationError(row + ": cumulative count " + std::to_string(c) + " is below the previous value " +
                            std::to_string(previous));
    }
    if (c > population_) {
      throw ValidationError(row + ": cumulative count " + std::to_string(c) + " exceeds population " +
                            std::to_string(population_));
    }
    new_cases_[t] = c - previous;
    log_previous_[t] = std::log(static_cast<double>(previous));
    log_factorial_[t] = log_gamma(static_cast<double>(new_cases_[t]) + 1.0);
    previous = c;
  }
}

void EpidemicSeries::require_two_segments(std::size_t q_gap) const {
  if (length() < 2 * q_gap) {
    throw ValidationError("series length " + std::to_string(length()) + " is shorter than 2Q = " +
                          std::to_string(2 * q_gap));
  }
}

EpidemicSeries EpidemicSeries::head(std::size_t n) const {
  n = std::min(n, length());
  std::vector<std::int64_t> c(cumulative_.begin(), cumulative_.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::string> l;
  if (!labels_.empty()) {
    l.assign(labels_.begin(), labels_.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return EpidemicSeries(initial_count_, std::move(c), population_, std::move(l));
}

bool EpidemicSeries::operator==(const EpidemicSeries& other) const {
  return initial_count_ == other.initial_count_ && population_ == other.population_ &&
         cumulative_ == other.cumulative_ && labels_ == other.labels_;
}

// ---------------------------------------------------------------------------
// Segmentation

Segmentation::Segmentation(std::size_t length, std::vector<std::size_t> changepoints) : length_(length) {
  if (length == 0) {
    throw ValidationError("segmentation length must be positive");
  }
  std::sort(changepoints.begin(), changepoints.end());
  changepoints.erase(std::unique(changepoints.begin(), changepoints.end()), changepoints.end());
  starts_.assign(1, 0);
  for (std::size_t c : changepoints) {
    if (c == 0) continue;
    if (c >= length) {
      throw ValidationError("change point " + std::to_string(c) + " outside series of length " +
                            std::to_string(length));
    }
    starts_.push_back(c);
  }
}

Segmentation Segmentation::from_indicator(std::span<const std::uint8_t> indicator) {
  if (indicator.empty() || indicator[0] != 1) {
    throw ValidationError("indicator must start with 1");
  }
  std::vector<std::size_t> cps;
  for (std::size_t t = 1; t < indicator.size(); ++t) {
    if (indicator[t] > 1) throw ValidationError("indicator entries must be 0 or 1");
    if (indicator[t] == 1) cps.push_back(t);
  }
  return Segmentation(indicator.size(), std::move(cps));
}

Segmentation Segmentation::from_labels(std::span<const int> labels) {
  if (labels.empty()) {
    throw ValidationError("label vector is empty");
  }
  std::vector<std::size_t> cps;
  for (std::size_t t = 1; t < labels.size(); ++t) {
    if (labels[t] != labels[t - 1]) cps.push_back(t);
  }
  return Segmentation(labels.size(), std::move(cps));
}

std::size_t Segmentation::segment_of(std::size_t t) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  return static_cast<std::size_t>(it - starts_.begin()) - 1;
}

bool Segmentation::is_changepoint(std::size_t t) const {
  return std::binary_search(starts_.begin(), starts_.end(), t);
}

std::vector<std::uint8_t> Segmentation::indicator() const {
  std::vector<std::uint8_t> out(length_, 0);
  for (std::size_t s : starts_) out[s] = 1;
  return out;
}

std::vector<int> Segmentation::labels() const {
  std::vector<int> out(length_);
  for (std::size_t m = 0; m < starts_.size(); ++m) {
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(segment_begin(m)),
              out.begin() + static_cast<std::ptrdiff_t>(segment_end(m)), static_cast<int>(m + 1));
  }
  return out;
}

bool Segmentation::satisfies(std::size_t q_gap) const {
  if (starts_.size() == 1) {
    return true;
  }
  if (length_ < 2 * q_gap) {
    return false;
  }
  const std::size_t last_free = length_ - q_gap;
  for (std::size_t i = 1; i < starts_.size(); ++i) {
    if (starts_[i] < q_gap || starts_[i] > last_free) return false;
    if (starts_[i] - starts_[i - 1] < q_gap) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// PriorSpec / SamplerConfig

double PriorSpec::omega(std::size_t t) const {
  if (!omega_overrides.empty()) {
    auto it = omega_overrides.find(t);
    if (it != omega_overrides.end()) return it->second;
  }
  return omega_default;
}

double PriorSpec::final_size_cap(std::int64_t population) const {
  return std::ceil(rho * static_cast<double>(population));
}

void PriorSpec::validate() const {
  auto probability = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!probability(omega_default)) throw ValidationError("omega must lie in [0, 1]");
  for (const auto& [t, w] : omega_overrides) {
    if (!probability(w)) throw ValidationError("omega override at " + std::to_string(t) + " must lie in [0, 1]");
  }
  if (q_gap < 1) throw ValidationError("Q must be a positive integer");
  if (!(rho > 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in (0, 1]");
  for (double v : {a_lambda, b_lambda, a_phi, b_phi, a_p, b_p, eta}) {
    if (!(v > 0.0)) throw ValidationError("hyper-parameters must be positive");
  }
  if (m_max < 1) throw ValidationError("M_max must be at least 1");
}

void SamplerConfig::validate() const {
  if (total_iterations < 1) throw ValidationError("iterations must be positive");
  if (burn_in >= total_iterations) throw ValidationError("burn-in must be smaller than the iteration count");
  for (double v : {step_phi, step_K, step_lambda, step_p}) {
    if (!(v >= 0.0)) throw ValidationError("step sizes must be non-negative");
  }
}

// ---------------------------------------------------------------------------
// likelihood

double glc_mean(std::int64_t prev_cumulative, const SegmentParams& params) {
  double power;
  if (prev_cumulative == 0) {
    if (params.scaling != 0.0) {
      throw DomainError("glc_mean: C = 0 requires scaling p = 0");
    }
    power = 1.0;
  } else {
    power = std::pow(static_cast<double>(prev_cumulative), params.scaling);
  }
  const double c = static_cast<double>(prev_cumulative);
  const double mean = params.growth_rate * power * (1.0 - c / params.final_size);
  return mean > kMeanFloor ? mean : kMeanFloor;
}

double glc_mean_from_log(double prev_cumulative, double log_prev_cumulative, const SegmentParams& params) {
  const double mean =
      params.growth_rate * std::exp(params.scaling * log_prev_cumulative) * (1.0 - prev_cumulative / params.final_size);
  return mean > kMeanFloor ? mean : kMeanFloor;
}

double nb_log_pmf(std::int64_t count, double mean, double dispersion) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw DomainError("nb_log_pmf: mean must be positive and finite");
  }
  if (!(dispersion > 0.0) || !std::isfinite(dispersion)) {
    throw DomainError("nb_log_pmf: dispersion must be positive and finite");
  }
  if (count < 0) {
    throw DomainError("nb_log_pmf: count must be non-negative");
  }
  return nb_log_pmf_cached(count, log_gamma(static_cast<double>(count) + 1.0), mean, dispersion,
                           log_gamma(dispersion));
}

double range_log_lik(const EpidemicSeries& series, std::size_t begin, std::size_t end, const SegmentParams& params,
                     double dispersion) {
  if (!(dispersion > 0.0)) {
    throw DomainError("dispersion must be positive");
  }
  const auto cases = series.new_cases();
  const double lg_phi = log_gamma(dispersion);
  double total = 0.0;
  for (std::size_t t = begin; t < end; ++t) {
    const double mean = glc_mean_from_log(static_cast<double>(series.previous_cumulative(t)),
                                          series.log_previous_cumulative(t), params);
    total += nb_log_pmf_cached(cases[t], series.log_factorial_new_cases(t), mean, dispersion, lg_phi);
  }
  return total;
}

double segment_log_lik(const EpidemicSeries& series, const Segmentation& segmentation, std::size_t segment,
                       const SegmentParams& params, double dispersion) {
  if (segment >= segmentation.segment_count()) {
    throw DomainError("segment index out of range");
  }
  return range_log_lik(series, segmentation.segment_begin(segment), segmentation.segment_end(segment), params,
                       dispersion);
}

double full_log_lik(const EpidemicSeries& series, const ModelState& state) {
  const auto& seg = state.segmentation;
  if (seg.length() != series.length() || state.params.size() != seg.segment_count()) {
    throw DomainError("model state does not match the series");
  }
  double total = 0.0;
  for (std::size_t m = 0; m < seg.segment_count(); ++m) {
    total += segment_log_lik(series, seg, m, state.params[m], state.dispersion);
  }
  return total;
}

// ---------------------------------------------------------------------------
// priors

double log_prior_indicator(const Segmentation& segmentation, const PriorSpec& prior) {
  const std::size_t q = prior.q_gap;
  if (!segmentation.satisfies(q)) {
    return kNegInf;
  }
  const std::size_t length = segmentation.length();
  if (length < 2 * q) {
    return 0.0;  // no free positions
  }
  const std::size_t first = q;
  const std::size_t last = length - q;
  const double w0 = prior.omega_default;
  if (prior.omega_overrides.empty() && w0 > 0.0 && w0 < 1.0) {
    const double n_free = static_cast<double>(last - first + 1);
    const double k = static_cast<double>(segmentation.segment_count() - 1);
    return k * std::log(w0) + (n_free - k) * std::log1p(-w0);
  }
  double total = 0.0;
  for (std::size_t t = first; t <= last; ++t) {
    total += log_bernoulli(segmentation.is_changepoint(t), prior.omega(t));
  }
  return total;
}

double log_prior_indicator(std::span<const std::uint8_t> indicator, const PriorSpec& prior) {
  const std::size_t length = indicator.size();
  const std::size_t q = prior.q_gap;
  if (length == 0 || indicator[0] != 1) {
    return kNegInf;
  }
  std::size_t previous = 0;
  double total = 0.0;
  for (std::size_t t = 1; t < length; ++t) {
    const bool cp = indicator[t] == 1;
    if (indicator[t] > 1) return kNegInf;
    const bool free = length >= 2 * q && t >= q && t <= length - q;
    if (!free) {
      if (cp) return kNegInf;
      continue;
    }
    if (cp) {
      if (t - previous < q) return kNegInf;
      previous = t;
    }
    total += log_bernoulli(cp, prior.omega(t));
  }
  return total;
}

std::vector<double> log_indicator_normalizers(std::size_t length, const PriorSpec& prior) {
  const std::size_t q = prior.q_gap;
  const std::size_t m_cap = max_segment_count(length, q);
  std::vector<double> out(m_cap + 1, kNegInf);
  if (length < 2 * q) {
    out[1] = 0.0;
    return out;
  }
  const std::size_t first = q;
  const std::size_t last = length - q;
  const std::size_t kmax = m_cap - 1;  // free change points
  // table[i][k]: configurations over [first, first + i - 1] with k change points; i = 0 is the empty prefix
  const std::size_t width = last - first + 2;
  std::vector<std::vector<double>> table(width, std::vector<double>(kmax + 1, kNegInf));
  table[0][0] = 0.0;
  std::vector<double> log_zero(width, 0.0), log_one(width, 0.0);
  for (std::size_t i = 1; i < width; ++i) {
    const double w = prior.omega(first + i - 1);
    log_zero[i] = log_bernoulli(false, w);
    log_one[i] = log_bernoulli(true, w);
  }
  for (std::size_t i = 1; i < width; ++i) {
    for (std::size_t k = 0; k <= kmax; ++k) {
      double acc = table[i - 1][k] + log_zero[i];
      if (k > 0) {
        // change point at prefix position i: the previous Q-1 free slots must be empty
        const std::size_t j = i >= q ? i - q : 0;
        double run = 0.0;
        for (std::size_t s = j + 1; s < i; ++s) run += log_zero[s];
        acc = log_add_exp(acc, table[j][k - 1] + run + log_one[i]);
      }
      table[i][k] = acc;
    }
  }
  for (std::size_t m = 1; m <= m_cap; ++m) {
    out[m] = table[width - 1][m - 1];
  }
  return out;
}

double log_prior_indicator_given_count(const Segmentation& segmentation, const PriorSpec& prior,
                                       std::span<const double> normalizers) {
  const double lp = log_prior_indicator(segmentation, prior);
  const std::size_t m = segmentation.segment_count();
  if (lp == kNegInf || m >= normalizers.size() || normalizers[m] == kNegInf) {
    return kNegInf;
  }
  return lp - normalizers[m];
}

double gamma_log_density(double x, double shape, double rate) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    return kNegInf;
  }
  return shape * std::log(rate) - log_gamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double beta_log_density(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) {
    return kNegInf;
  }
  auto term = [](double exponent, double base) {
    if (exponent == 0.0) return 0.0;
    if (base == 0.0) return exponent > 0.0 ? kNegInf : std::numeric_limits<double>::infinity();
    return exponent * std::log(base);
  };
  const double log_beta = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
  return term(a - 1.0, x) + term(b - 1.0, 1.0 - x) - log_beta;
}

double log_prior_segment_params(const SegmentParams& params, std::int64_t segment_max_cumulative,
                                const PriorSpec& prior, std::int64_t population) {
  const double cap = prior.final_size_cap(population);
  const double lower = static_cast<double>(segment_max_cumulative);
  if (!(params.final_size > lower && params.final_size <= cap)) {
    return kNegInf;
  }
  if (!(params.scaling >= 0.0 && params.scaling <= 1.0)) {
    return kNegInf;
  }
  return -std::log(cap - lower) + gamma_log_density(params.growth_rate, prior.a_lambda, prior.b_lambda) +
         beta_log_density(params.scaling, prior.a_p, prior.b_p);
}

double log_prior_dispersion(double dispersion, const PriorSpec& prior) {
  if (!(dispersion > 0.0) || dispersion > kMaxDispersion) {
    return kNegInf;
  }
  return gamma_log_density(dispersion, prior.a_phi, prior.b_phi);
}

double log_prior_segment_count(std::size_t m, const PriorSpec& prior) {
  if (m < 1 || m > prior.m_max) {
    return kNegInf;
  }
  const double log_eta = std::log(prior.eta);
  auto log_mass = [&](std::size_t k) {
    const double kd = static_cast<double>(k);
    return kd * log_eta - log_gamma(kd + 1.0);
  };
  double log_z = kNegInf;
  for (std::size_t k = 1; k <= prior.m_max; ++k) {
    log_z = log_add_exp(log_z, log_mass(k));
  }
  return log_mass(m) - log_z;
}

std::size_t max_segment_count(std::size_t length, std::size_t q_gap) {
  return std::max<std::size_t>(1, length / std::max<std::size_t>(1, q_gap));
}

std::int64_t segment_max_cumulative(const EpidemicSeries& series, const Segmentation& segmentation,
                                    std::size_t segment) {
  return series.cumulative()[segmentation.segment_end(segment) - 1];
}

double log_prior_all_params(const EpidemicSeries& series, const ModelState& state, const PriorSpec& prior) {
  double total = 0.0;
  for (std::size_t m = 0; m < state.params.size(); ++m) {
    total += log_prior_segment_params(state.params[m], segment_max_cumulative(series, state.segmentation, m), prior,
                                      series.population());
    if (total == kNegInf) break;
  }
  return total;
}

}  // namespace episeg
