#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "episeg/inference.hpp"
#include "episeg/sampler_fixed.hpp"
#include "episeg/simgen.hpp"
#include "support.hpp"

using namespace episeg;

namespace {

TraceSample sample_with(std::size_t length, std::vector<std::size_t> cps, double log_lik = 0.0) {
  TraceSample s;
  s.state.segmentation = Segmentation(length, std::move(cps));
  s.state.params.assign(s.state.segmentation.segment_count(), SegmentParams{15000.0, 0.1, 0.9});
  s.state.dispersion = 10.0;
  s.log_lik = log_lik;
  return s;
}

ChainTrace trace_of(std::vector<TraceSample> samples, std::size_t length) {
  ChainTrace trace;
  trace.series_length = length;
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].iteration = i;
  trace.samples = std::move(samples);
  return trace;
}

// Independent one-sided Pearson test for two binary columns.
bool oracle_negative(const std::vector<double>& x, const std::vector<double>& y, double alpha) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return false;
  const double r = sxy / std::sqrt(sxx * syy);
  if (r <= -1.0) return true;
  const double t = r * std::sqrt((n - 2.0) / (1.0 - r * r));
  return boost::math::cdf(boost::math::students_t(n - 2.0), t) < alpha;
}

}  // namespace

TEST_CASE("inclusion probabilities count indicator frequencies") {
  std::vector<TraceSample> s{sample_with(40, {10}), sample_with(40, {20}), sample_with(40, {10}),
                             sample_with(40, {20})};
  const auto ppi = compute_ppi(trace_of(s, 40));
  REQUIRE(ppi.size() == 40);
  CHECK(ppi[0] == 1.0);
  CHECK(ppi[10] == 0.5);
  CHECK(ppi[20] == 0.5);
  CHECK(ppi[15] == 0.0);

  std::vector<TraceSample> all(7, sample_with(40, {12, 25}));
  const auto full = compute_ppi(trace_of(all, 40));
  CHECK(full[12] == 1.0);
  CHECK(full[25] == 1.0);
  CHECK(std::accumulate(full.begin(), full.end(), 0.0) == 3.0);
}

TEST_CASE("inclusion probabilities lie in the unit interval") {
  Random rng(1);
  std::vector<TraceSample> s;
  for (int b = 0; b < 200; ++b) {
    std::vector<std::size_t> cps;
    for (int k = 0; k < 3; ++k) cps.push_back(1 + rng.index(99));
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    s.push_back(sample_with(100, cps));
  }
  const auto ppi = compute_ppi(trace_of(s, 100));
  CHECK(ppi[0] == 1.0);
  for (double v : ppi) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("MAP selection") {
  const auto single = trace_of({sample_with(50, {20}, -3.0)}, 50);
  CHECK(map_estimate(single) == single.samples[0].state);

  std::vector<TraceSample> s{sample_with(50, {10}, -5.0), sample_with(50, {20}, -1.0),
                             sample_with(50, {30}, -1.0), sample_with(50, {40}, -7.0)};
  auto trace = trace_of(s, 50);
  CHECK(map_index(trace) == 1);  // earliest of the tied pair

  // adding a constant to every score leaves the argmax unchanged
  auto shifted = trace;
  for (auto& x : shifted.samples) x.log_lik += 1234.5;
  CHECK(map_index(shifted) == 1);

  // the prior on delta given M enters the criterion
  trace.samples[2].log_prior_indicator = 0.5;
  CHECK(map_index(trace) == 2);

  // order invariance for distinct scores
  Random rng(2);
  std::vector<TraceSample> distinct;
  for (std::size_t i = 0; i < 30; ++i) distinct.push_back(sample_with(80, {10 + 2 * i}, rng.normal()));
  const auto reference = map_estimate(trace_of(distinct, 80));
  for (int rep = 0; rep < 20; ++rep) {
    for (std::size_t i = distinct.size() - 1; i > 0; --i) std::swap(distinct[i], distinct[rng.index(i + 1)]);
    CHECK(map_estimate(trace_of(distinct, 80)) == reference);
  }
  CHECK_THROWS(map_estimate(ChainTrace{}));
}

TEST_CASE("change point intervals") {
  SUBCASE("constant indicators give a degenerate interval") {
    std::vector<TraceSample> s(20, sample_with(60, {30}));
    const auto iv = changepoint_intervals(trace_of(s, 60), s[0].state);
    REQUIRE(iv.size() == 1);
    CHECK(iv[0].lo == 30);
    CHECK(iv[0].hi == 30);
  }
  SUBCASE("mass alternating between neighbours widens the interval") {
    std::vector<TraceSample> s;
    for (int b = 0; b < 20; ++b) s.push_back(sample_with(60, {b % 2 == 0 ? 30u : 31u}));
    const auto trace = trace_of(s, 60);
    std::vector<double> at(20), next(20);
    for (int b = 0; b < 20; ++b) {
      at[b] = b % 2 == 0;
      next[b] = b % 2 == 1;
    }
    REQUIRE(oracle_negative(at, next, 0.05));
    const auto iv = changepoint_intervals(trace, s[0].state);
    CHECK(iv[0].lo == 30);
    CHECK(iv[0].hi == 31);
  }
  SUBCASE("agrees with an independent test on a spread-out trace") {
    Random rng(3);
    std::vector<TraceSample> s;
    for (int b = 0; b < 60; ++b) {
      const double u = rng.uniform();
      const std::size_t t = u < 0.5 ? 30 : u < 0.7 ? 29 : u < 0.85 ? 31 : u < 0.95 ? 32 : 28;
      s.push_back(sample_with(60, {t}));
    }
    const auto trace = trace_of(s, 60);
    std::vector<double> col30(60);
    for (int b = 0; b < 60; ++b) col30[b] = s[b].state.segmentation.is_changepoint(30);
    auto column = [&](std::size_t t) {
      std::vector<double> c(60);
      for (int b = 0; b < 60; ++b) c[b] = s[b].state.segmentation.is_changepoint(t);
      return c;
    };
    std::size_t lo = 30, hi = 30;
    while (lo > 0 && oracle_negative(col30, column(lo - 1), 0.05)) --lo;
    while (hi + 1 < 60 && oracle_negative(col30, column(hi + 1), 0.05)) ++hi;
    const auto iv = changepoint_intervals(trace, sample_with(60, {30}).state);
    CHECK(iv[0].lo == lo);
    CHECK(iv[0].hi == hi);
    CHECK(iv[0].lo < 30);
  }
  SUBCASE("too few samples give degenerate intervals") {
    std::vector<TraceSample> s;
    for (int b = 0; b < 6; ++b) s.push_back(sample_with(60, {b % 2 == 0 ? 30u : 31u}));
    const auto iv = changepoint_intervals(trace_of(s, 60), s[0].state);
    CHECK(iv[0].lo == 30);
    CHECK(iv[0].hi == 30);
  }
}

TEST_CASE("type-7 quantiles") {
  std::vector<double> values(100);
  std::iota(values.begin(), values.end(), 1.0);
  std::vector<double> shuffled = values;
  Random rng(4);
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.index(i + 1)]);
  const std::vector<double> probs{0.0, 0.25, 0.5, 0.75, 1.0, 0.025, 0.975};
  const auto q = quantiles(shuffled, probs);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double h = 99.0 * probs[i];
    const auto j = static_cast<std::size_t>(h);
    const double expected = j + 1 < 100 ? values[j] + (h - j) * (values[j + 1] - values[j]) : values[j];
    CHECK(q[i] == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK(q[1] == doctest::Approx(25.75));
  CHECK(q[2] == doctest::Approx(50.5));
  CHECK(q[3] == doctest::Approx(75.25));
  CHECK_THROWS_AS(quantiles({}, probs), DomainError);
}

TEST_CASE("parameter quantiles") {
  SUBCASE("constant trace") {
    std::vector<TraceSample> s(25, sample_with(60, {30}));
    const auto q = parameter_quantiles(trace_of(s, 60));
    REQUIRE(q.segments.size() == 2);
    for (const auto& seg : q.segments) {
      for (double v : seg.final_size) CHECK(v == 15000.0);
      for (double v : seg.growth_rate) CHECK(v == 0.1);
      for (double v : seg.scaling) CHECK(v == 0.9);
    }
    for (double v : q.dispersion) CHECK(v == 10.0);
  }
  SUBCASE("segment rows condition on the modal segment count") {
    std::vector<TraceSample> s;
    for (int b = 0; b < 10; ++b) {
      auto x = sample_with(60, {20, 40});
      x.state.params[2].final_size = 20000.0 + b;
      s.push_back(x);
    }
    for (int b = 0; b < 4; ++b) s.push_back(sample_with(60, {30}));
    const auto q = parameter_quantiles(trace_of(s, 60));
    CHECK(q.segment_count == 3);
    CHECK(q.samples_used == 10);
    CHECK(q.segments[2].final_size.front() == doctest::Approx(20000.0 + 9 * 0.025));
    CHECK(q.dispersion.size() == 5);
  }
  SUBCASE("rows are nondecreasing on a real chain") {
    GlcScenario sc;
    const auto data = simulate_glc(sc);
    SamplerConfig config;
    config.total_iterations = 3000;
    config.burn_in = 1000;
    Random rng(5);
    const auto trace = run_fixed_chain(data.series, 3, PriorSpec{}, config, rng);
    const auto summary = summarize(trace);
    auto sorted = [](const QuantileRow& r) { return std::is_sorted(r.begin(), r.end()); };
    for (const auto& seg : summary.param_quantiles.segments) {
      CHECK(sorted(seg.final_size));
      CHECK(sorted(seg.growth_rate));
      CHECK(sorted(seg.scaling));
    }
    CHECK(sorted(summary.param_quantiles.dispersion));
    for (const auto& iv : summary.changepoints) {
      CHECK(iv.lo <= iv.time);
      CHECK(iv.time <= iv.hi);
    }
    CHECK(summary.ppi[0] == 1.0);
    CHECK(summary.m_posterior.at(3) == 1.0);
  }
}

TEST_CASE("forecast of a saturated epidemic is all zeros") {
  const EpidemicSeries series(100, {500, 1000, 2000}, 100000);
  TraceSample s;
  s.state = ModelState{Segmentation(3, {}), {{2000.0, 0.3, 0.9}}, 5.0};
  Random rng(6);
  const auto f = forecast(trace_of({s, s, s}, 3), series, 10, rng);
  for (auto y : f.draws) CHECK(y == 0);
  for (double m : f.mean) CHECK(m == 0.0);
}

TEST_CASE("forecast draws and summaries") {
  const auto series = episeg::testing::random_series(40, 7);
  Random rng(7);
  std::vector<TraceSample> s;
  for (int b = 0; b < 50; ++b) {
    TraceSample x;
    x.state = ModelState{Segmentation(40, {20}),
                         {{30000.0, 0.2, 0.8}, {20000.0 + 100.0 * b, 0.05 + 0.002 * b, 0.9}},
                         2.0 + b};
    s.push_back(x);
  }
  const auto trace = trace_of(s, 40);
  const auto f = forecast(trace, series, 15, rng);
  REQUIRE(f.draws.size() == 15 * 50);
  for (std::size_t t = 0; t < 15; ++t) {
    double row = 0.0;
    for (std::size_t b = 0; b < 50; ++b) {
      CHECK(f.draw(t, b) >= 0);
      row += static_cast<double>(f.draw(t, b));
    }
    CHECK(f.mean[t] == doctest::Approx(row / 50.0).epsilon(1e-14));
    CHECK(f.lo[t] <= f.mean[t]);
    CHECK(f.mean[t] <= f.hi[t]);
  }
  Random again(7);
  CHECK(forecast(trace, series, 15, again).draws == f.draws);
}

TEST_CASE("near-Poisson forecast follows the deterministic recursion") {
  const EpidemicSeries series(100, {1000, 3000, 5000}, 1000000);
  TraceSample x;
  const SegmentParams params{20000.0, 0.3, 0.9};
  x.state = ModelState{Segmentation(3, {}), {params}, 1e6};
  const auto trace = trace_of({x}, 3);
  const std::size_t horizon = 20;
  std::vector<double> mean(horizon, 0.0);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Random rng(seed);
    const auto f = forecast(trace, series, horizon, rng);
    for (std::size_t t = 0; t < horizon; ++t) mean[t] += f.mean[t] / 100.0;
  }
  double c = 5000.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const double mu = params.growth_rate * std::pow(c, params.scaling) * (1.0 - c / params.final_size);
    CAPTURE(t);
    CHECK(std::abs(mean[t] - mu) / mu < 0.02);
    c += mu;
  }
}

TEST_CASE("AMAPE") {
  const std::vector<std::int64_t> actual{10, 20, 3, 5};
  const std::vector<double> perfect{10, 20, 3, 5};
  CHECK(amape(perfect, actual) == 0.0);
  // a zero count is scored against 1, so a zero forecast there costs 1
  CHECK(amape(std::vector<double>{0.0}, std::vector<std::int64_t>{0}) == 1.0);
  CHECK(amape(std::vector<double>{5.0}, std::vector<std::int64_t>{10}) == doctest::Approx(0.5));
  CHECK(amape(std::vector<double>{2.0}, std::vector<std::int64_t>{0}) == doctest::Approx(1.0));
  CHECK_THROWS(amape(std::vector<double>{1.0, 2.0}, std::vector<std::int64_t>{1}));

  Random rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng.index(30);
    std::vector<double> f(n);
    std::vector<std::int64_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<std::int64_t>(rng.index(50));
      f[i] = 50.0 * rng.uniform();
    }
    const double base = amape(f, y);
    auto f2 = f;
    auto y2 = y;
    y2.push_back(17);
    f2.push_back(17.0);
    CHECK(amape(f2, y2) == doctest::Approx(base * n / (n + 1.0)).epsilon(1e-12));
  }
}
