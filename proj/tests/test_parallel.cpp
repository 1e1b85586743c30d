#include <doctest.h>

#include <cstdlib>

#include <omp.h>

#include "episeg/parallel.hpp"
#include "episeg/sampler_fixed.hpp"
#include "support.hpp"

using namespace episeg;

namespace {

// Several workers even on a single-core machine.
struct Workers {
  Workers() {
    omp_set_num_threads(4);
    setenv("EPI_SEG_THREADS", "4", 1);
  }
  ~Workers() { unsetenv("EPI_SEG_THREADS"); }
};

bool same_trace(const ChainTrace& a, const ChainTrace& b) {
  if (a.size() != b.size() || a.acceptance.accepted != b.acceptance.accepted) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a.samples[i].state == b.samples[i].state) || a.samples[i].log_posterior != b.samples[i].log_posterior)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("EPI_SEG_THREADS caps the worker count") {
  omp_set_num_threads(3);
  unsetenv("EPI_SEG_THREADS");
  CHECK(configured_threads() == 3);
  setenv("EPI_SEG_THREADS", "2", 1);
  CHECK(configured_threads() == 2);
  setenv("EPI_SEG_THREADS", "64", 1);
  CHECK(configured_threads() == 3);
  for (const char* bad : {"0", "-1", "two", "2x"}) {
    setenv("EPI_SEG_THREADS", bad, 1);
    CHECK(configured_threads() == 3);
  }
  unsetenv("EPI_SEG_THREADS");
}

TEST_CASE("parallel chains equal the serial reference") {
  Workers workers;
  GlcScenario sc;
  const auto data = simulate_glc(sc);
  PriorSpec prior;
  SamplerConfig config;
  config.total_iterations = 1500;
  config.burn_in = 500;
  config.seed = 17;
  for (auto fixed : {std::optional<std::size_t>{3}, std::optional<std::size_t>{}}) {
    const auto par = run_chains(data.series, prior, config, 4, fixed);
    const auto ser = run_chains_serial(data.series, prior, config, 4, fixed);
    REQUIRE(par.size() == 4);
    for (std::size_t c = 0; c < 4; ++c) CHECK(same_trace(par[c], ser[c]));
    CHECK_FALSE(same_trace(par[0], par[1]));
  }
  CHECK_THROWS(run_chains(data.series, prior, config, 0, 3));
  // errors inside a worker reach the caller
  CHECK_THROWS_AS(run_chains(data.series, prior, config, 2, 40), InfeasibleError);
}

TEST_CASE("parallel forecast and inclusion probabilities equal the serial versions") {
  Workers workers;
  GlcScenario sc;
  const auto data = simulate_glc(sc);
  SamplerConfig config;
  config.total_iterations = 1600;
  config.burn_in = 600;  // 1000 samples: several forecast blocks
  Random chain_rng(3);
  const auto trace = run_fixed_chain(data.series, 3, PriorSpec{}, config, chain_rng);
  Random a(9), b(9);
  const auto par = forecast_parallel(trace, data.series, 30, a);
  const auto ser = forecast(trace, data.series, 30, b);
  CHECK(par.draws == ser.draws);
  CHECK(par.mean == ser.mean);
  CHECK(par.lo == ser.lo);
  CHECK(par.hi == ser.hi);
  CHECK(compute_ppi_parallel(trace) == compute_ppi(trace));
}

TEST_CASE("parallel simulation batches equal the serial versions") {
  Workers workers;
  GlcScenario glc;
  glc.seed = 5;
  const auto gp = simulate_glc_batch_parallel(glc, 12);
  const auto gs = simulate_glc_batch(glc, 12);
  REQUIRE(gp.size() == 12);
  for (std::size_t k = 0; k < 12; ++k) {
    CHECK(gp[k].series == gs[k].series);
    CHECK(gp[k].truth == gs[k].truth);
  }
  SirScenario sir;
  const auto sp = simulate_sir_batch_parallel(sir, 6);
  const auto ss = simulate_sir_batch(sir, 6);
  for (std::size_t k = 0; k < 6; ++k) CHECK(sp[k].series == ss[k].series);
}
