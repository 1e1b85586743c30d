#include "episeg/cli.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "episeg/errors.hpp"
#include "episeg/inference.hpp"
#include "episeg/metrics.hpp"
#include "episeg/parallel.hpp"

namespace episeg {

namespace {

namespace fs = std::filesystem;

// stream id of the forecast generator, kept apart from the chain streams
constexpr std::uint64_t kForecastStream = 0x666f7265636173ULL;

const std::vector<std::string> kPlotHeader{"time",          "observed",    "fitted_mean", "ppi",
                                           "forecast_mean", "forecast_lo", "forecast_hi"};
const std::vector<std::string> kTraceHeader{"iteration", "m", "log_lik", "log_posterior", "dispersion", "changepoints"};

std::string replicate_name(std::size_t k) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "replicate_%03zu", k + 1);
  return buffer;
}

std::vector<int> labels_of(const Json& j, const char* what) {
  const Json* source = &j;
  if (j.contains("map")) source = &j.at("map");
  if (!source->contains("labels") || !source->at("labels").is_array()) {
    throw ConfigError(std::string(what) + " has no 'labels' array");
  }
  return source->at("labels").get<std::vector<int>>();
}

Json series_json(const EpidemicSeries& series) {
  return Json{{"length", series.length()},
              {"population", series.population()},
              {"initial_count", series.initial_count()},
              {"total", series.cumulative().back()}};
}

// New cases of a continuation file, measured from the last training count.
std::vector<std::int64_t> load_actual(const fs::path& path, const EpidemicSeries& train) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open actual-values file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const Json meta{{"population", train.population()}, {"initial_count", train.cumulative().back()}};
  const EpidemicSeries tail = parse_series(buffer.str(), meta);
  return {tail.new_cases().begin(), tail.new_cases().end()};
}

void run_fit(const RunConfig& config, std::ostream& out) {
  EpidemicSeries series = load_series(config.input_path);
  series.require_two_segments(config.prior.q_gap);

  std::vector<std::int64_t> actual;
  if (config.mode == Mode::Forecast && config.holdout > 0) {
    if (config.holdout >= series.length()) throw ValidationError("holdout must be shorter than the series");
    const std::size_t keep = series.length() - config.holdout;
    for (std::size_t t = keep; t < series.length(); ++t) actual.push_back(series.new_cases()[t]);
    series = series.head(keep);
    series.require_two_segments(config.prior.q_gap);
  }
  if (config.mode == Mode::Forecast && config.actual_path) {
    actual = load_actual(*config.actual_path, series);
  }

  const std::optional<std::size_t> fixed_m =
      config.mode == Mode::FitManual || (config.mode == Mode::Forecast && config.m_fixed) ? config.m_fixed
                                                                                          : std::nullopt;
  const auto traces = run_chains(series, config.prior, config.sampler, config.chains, fixed_m);
  const ChainTrace pooled = config.chains > 1 ? pool_traces(traces) : traces.front();
  const PosteriorSummary summary = summarize(pooled);

  Json doc = to_json(summary);
  doc["tool"] = "episeg";
  doc["mode"] = to_string(config.mode);
  doc["seed"] = config.sampler.seed;
  doc["config"] = to_json(config);
  doc["series"] = series_json(series);
  doc["chains"] = config.chains;
  doc["samples"] = pooled.size();
  doc["acceptance"] = to_json(pooled.acceptance);

  std::optional<ForecastResult> prediction;
  if (config.mode == Mode::Forecast) {
    const std::size_t horizon = config.horizon.value_or(actual.size());
    Random rng(derive_seed(config.sampler.seed, kForecastStream));
    prediction = forecast_parallel(pooled, series, horizon, rng);
    doc["forecast"] = to_json(*prediction);
    if (!actual.empty()) {
      if (actual.size() < horizon) {
        throw ValidationError("only " + std::to_string(actual.size()) + " actual values for a horizon of " +
                              std::to_string(horizon));
      }
      const std::vector<std::int64_t> scored(actual.begin(), actual.begin() + static_cast<std::ptrdiff_t>(horizon));
      doc["amape"] = amape(prediction->mean, scored);
      doc["actual"] = scored;
    }
  }
  validate_summary(doc);

  const auto rows = plot_rows(series, fitted_mean(series, summary.map_state), summary.ppi,
                              prediction ? &*prediction : nullptr, actual.empty() ? nullptr : &actual);
  const std::string plot = format_plotdata(rows);
  validate_csv(plot, kPlotHeader);

  std::vector<std::pair<fs::path, std::string>> traces_out;
  if (config.emit_trace) {
    for (std::size_t c = 0; c < traces.size(); ++c) {
      const fs::path name = traces.size() == 1 ? "trace.csv" : "trace_chain_" + std::to_string(c + 1) + ".csv";
      traces_out.emplace_back(config.output_dir / name, format_trace(traces[c]));
      validate_csv(traces_out.back().second, kTraceHeader);
    }
  }

  write_json(config.output_dir / "summary.json", doc);
  write_text(config.output_dir / "plotdata.csv", plot);
  for (const auto& [path, text] : traces_out) write_text(path, text);

  out << "segments (MAP): " << summary.map_state.segmentation.segment_count() << ", change points:";
  for (std::size_t t : summary.map_state.segmentation.changepoints()) out << ' ' << t;
  out << '\n';
  if (doc.contains("amape")) out << "AMAPE: " << doc["amape"].get<double>() << '\n';
  out << "wrote " << (config.output_dir / "summary.json").string() << '\n';
}

void run_simulate(const RunConfig& config, std::ostream& out) {
  const bool glc = config.mode == Mode::SimulateGlc;
  const auto data = glc ? simulate_glc_batch_parallel(config.glc, config.replicates)
                        : simulate_sir_batch_parallel(config.sir, config.replicates);
  Json all = Json::array();
  std::vector<std::pair<fs::path, Json>> truths;
  for (std::size_t k = 0; k < data.size(); ++k) {
    Json truth;
    if (glc) {
      truth = truth_json(data[k].truth, config.glc.segment_params(), config.glc.dispersion);
    } else {
      truth = truth_json(data[k].truth, {}, 0.0);
      truth.erase("dispersion");
      truth["segments"] = Json::array();
      for (std::size_t m = 0; m < config.sir.r0.size(); ++m) {
        truth["segments"].push_back({{"begin", data[k].truth.segment_begin(m)},
                                     {"end", data[k].truth.segment_end(m)},
                                     {"r0", config.sir.r0[m]},
                                     {"transmission_rate", config.sir.transmission_rate(m)}});
      }
    }
    truth["seed"] = (glc ? config.glc.seed : config.sir.seed) + k;
    truth["file"] = replicate_name(k) + ".csv";
    validate_ground_truth(truth);
    truths.emplace_back(config.output_dir / (replicate_name(k) + ".truth.json"), truth);
    all.push_back(truth);
  }
  Json ground{{"tool", "episeg"},
              {"mode", to_string(config.mode)},
              {"scenario", glc ? to_json(config.glc) : to_json(config.sir)},
              {"replicates", all}};
  for (std::size_t k = 0; k < data.size(); ++k) {
    write_series(config.output_dir / (replicate_name(k) + ".csv"), data[k].series);
    write_json(truths[k].first, truths[k].second);
  }
  write_json(config.output_dir / "ground_truth.json", ground);
  out << "wrote " << data.size() << " replicates to " << config.output_dir.string() << '\n';
}

void run_evaluate(const RunConfig& config, std::ostream& out) {
  const auto truth = labels_of(read_json(*config.truth_path), "truth file");
  const auto estimate = labels_of(read_json(*config.estimate_path), "estimate file");
  Json doc{{"length", truth.size()},
           {"ari", ari(truth, estimate)},
           {"mutual_information", mutual_information(truth, estimate)},
           {"nvi", nvi(truth, estimate)},
           {"f_measure", f_measure(truth, estimate)}};
  write_json(config.output_dir / "evaluation.json", doc);
  out << doc.dump(2) << '\n';
}

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::FitManual: return "fit-manual";
    case Mode::FitAuto: return "fit-auto";
    case Mode::Forecast: return "forecast";
    case Mode::SimulateGlc: return "simulate-glc";
    case Mode::SimulateSir: return "simulate-sir";
    case Mode::Evaluate: return "evaluate";
  }
  return "unknown";
}

void RunConfig::validate() const {
  prior.validate();
  sampler.validate();
  if (chains < 1) throw ConfigError("--chains must be at least 1");
  if (mode == Mode::FitManual && !m_fixed) throw ConfigError("fit with a fixed M needs --m (or use --auto)");
  if (m_fixed && *m_fixed < 1) throw ConfigError("--m must be at least 1");
  if (mode == Mode::Forecast && !horizon && holdout == 0) {
    throw ConfigError("forecast needs --horizon (or --holdout)");
  }
  if (horizon && *horizon < 1) throw ConfigError("--horizon must be at least 1");
  const bool fitting = mode == Mode::FitManual || mode == Mode::FitAuto || mode == Mode::Forecast;
  if (fitting && input_path.empty()) throw ConfigError("an input series is required");
  if (mode == Mode::Evaluate && (!truth_path || !estimate_path)) {
    throw ConfigError("evaluate needs --truth and --estimate");
  }
  if ((mode == Mode::SimulateGlc || mode == Mode::SimulateSir) && replicates < 1) {
    throw ConfigError("--replicates must be at least 1");
  }
  if (mode == Mode::SimulateGlc) glc.validate();
  if (mode == Mode::SimulateSir) sir.validate();
}

Json to_json(const RunConfig& config) {
  Json j{{"mode", to_string(config.mode)}, {"prior", to_json(config.prior)}, {"sampler", to_json(config.sampler)},
         {"chains", config.chains}};
  // the input is echoed by file name only so that summaries do not depend on the working directory
  if (!config.input_path.empty()) j["input"] = config.input_path.filename().string();
  if (config.m_fixed) j["m"] = *config.m_fixed;
  if (config.horizon) j["horizon"] = *config.horizon;
  if (config.holdout > 0) j["holdout"] = config.holdout;
  return j;
}

std::optional<RunConfig> parse_arguments(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Bayesian change-point segmentation of cumulative epidemic counts", "episeg"};
  app.require_subcommand(1);

  std::string config_file;
  std::uint64_t seed = 0;
  std::size_t m = 0, iterations = 0, burn_in = 0, horizon = 0, chains = 0, holdout = 0, replicates = 0;
  double phi = 0.0;
  bool automatic = false, emit_trace = false;
  std::string input, output = ".", actual, truth, estimate, scenario;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON configuration file (flags take precedence)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", output, "output directory");
  };
  auto sampling = [&](CLI::App* sub) {
    sub->add_option("input", input, "series CSV")->required();
    sub->add_option("--m", m, "fixed number of segments");
    sub->add_flag("--auto", automatic, "infer the number of segments");
    sub->add_option("--iterations", iterations, "total MCMC iterations");
    sub->add_option("--burn-in", burn_in, "discarded iterations");
    sub->add_option("--chains", chains, "independent chains, pooled");
    sub->add_flag("--emit-trace", emit_trace, "write trace.csv");
  };

  CLI::App* fit = app.add_subcommand("fit", "fit change points to a series");
  common(fit);
  sampling(fit);
  CLI::App* fc = app.add_subcommand("forecast", "fit, then forecast new cases");
  common(fc);
  sampling(fc);
  fc->add_option("--horizon", horizon, "forecast steps");
  fc->add_option("--holdout", holdout, "fit without the last n points and score the forecast on them");
  fc->add_option("--actual", actual, "series CSV continuing the input, used to score the forecast");
  CLI::App* sim = app.add_subcommand("simulate", "generate synthetic series with known change points");
  common(sim);
  sim->add_option("scenario", scenario, "glc or sir")->required()->check(CLI::IsMember({"glc", "sir"}));
  sim->add_option("--replicates", replicates, "number of datasets");
  sim->add_option("--phi", phi, "dispersion of the generated counts");
  CLI::App* ev = app.add_subcommand("evaluate", "score an estimated segmentation against the truth");
  common(ev);
  ev->add_option("--truth", truth, "ground-truth JSON")->required();
  ev->add_option("--estimate", estimate, "summary.json or ground-truth style JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  const CLI::App* sub = app.get_subcommands().front();
  RunConfig config;
  auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };

  if (!config_file.empty()) {
    const Json j = read_json(config_file);
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "prior") update_from_json(value, config.prior);
      else if (key == "sampler") update_from_json(value, config.sampler);
      else if (key == "glc") update_from_json(value, config.glc);
      else if (key == "sir") update_from_json(value, config.sir);
      else if (key == "chains") config.chains = value.get<std::size_t>();
      else if (key == "m") config.m_fixed = value.get<std::size_t>();
      else if (key == "horizon") config.horizon = value.get<std::size_t>();
      else if (key == "replicates") config.replicates = value.get<std::size_t>();
      else if (key == "emit_trace") config.emit_trace = value.get<bool>();
      else throw ConfigError("unknown configuration key '" + key + "'");
    }
    // scenarios follow the sampler seed unless they name their own
    if (!(j.contains("glc") && j["glc"].contains("seed"))) config.glc.seed = config.sampler.seed;
    if (!(j.contains("sir") && j["sir"].contains("seed"))) config.sir.seed = config.sampler.seed;
  }
  if (given("--seed")) {
    config.sampler.seed = seed;
    config.glc.seed = seed;
    config.sir.seed = seed;
  }
  config.output_dir = output;

  const std::string name = sub->get_name();
  if (name == "fit" || name == "forecast") {
    config.input_path = input;
    if (given("--m")) config.m_fixed = m;
    if (given("--iterations")) config.sampler.total_iterations = iterations;
    if (given("--burn-in")) config.sampler.burn_in = burn_in;
    if (given("--iterations") && !given("--burn-in") && config.sampler.burn_in >= config.sampler.total_iterations) {
      config.sampler.burn_in = config.sampler.total_iterations / 2;
    }
    if (given("--chains")) config.chains = chains;
    if (emit_trace) config.emit_trace = true;
    if (automatic && given("--m")) throw ConfigError("--m and --auto are mutually exclusive");
    if (automatic) config.m_fixed.reset();
    if (name == "fit") {
      config.mode = config.m_fixed ? Mode::FitManual : Mode::FitAuto;
      if (!automatic && !config.m_fixed) throw ConfigError("fit needs --m M or --auto");
    } else {
      config.mode = Mode::Forecast;
      if (given("--horizon")) config.horizon = horizon;
      if (given("--holdout")) config.holdout = holdout;
      if (!actual.empty()) config.actual_path = actual;
    }
  } else if (name == "simulate") {
    config.mode = scenario == "glc" ? Mode::SimulateGlc : Mode::SimulateSir;
    if (given("--replicates")) config.replicates = replicates;
    if (given("--phi")) {
      config.glc.dispersion = phi;
      config.sir.dispersion_s = phi;
      config.sir.dispersion_r = phi;
    }
  } else {
    config.mode = Mode::Evaluate;
    config.truth_path = truth;
    config.estimate_path = estimate;
  }
  config.validate();
  return config;
}

void run(const RunConfig& config, std::ostream& out) {
  config.validate();
  switch (config.mode) {
    case Mode::FitManual:
    case Mode::FitAuto:
    case Mode::Forecast: run_fit(config, out); break;
    case Mode::SimulateGlc:
    case Mode::SimulateSir: run_simulate(config, out); break;
    case Mode::Evaluate: run_evaluate(config, out); break;
  }
}

int run_command_line(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  auto report = [&](std::string_view kind, const std::string& message) {
    err << Json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
    return 1;
  };
  try {
    const auto config = parse_arguments(argc, argv, out);
    if (!config) return 0;
    run(*config, out);
    return 0;
  } catch (const Error& e) {
    return report(to_string(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return report("config", e.what());
  } catch (const std::exception& e) {
    return report("internal", e.what());
  }
}

}  // namespace episeg
