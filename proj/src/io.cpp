#include "episeg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "episeg/errors.hpp"

namespace episeg {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  std::int64_t value = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::int64_t metadata_int(const std::string& key, const std::string& value) {
  auto parsed = parse_int(value);
  if (!parsed) throw ValidationError("metadata '" + key + "' is not an integer: '" + value + "'");
  return *parsed;
}

std::string format_double(double v) {
  // shortest text that reads back to the same double
  return Json(v).dump();
}

template <class T>
void read_field(const Json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

void require(const Json& j, const char* key, bool (Json::*check)() const noexcept, const char* what) {
  if (!j.contains(key) || !(j.at(key).*check)()) {
    throw IoError(std::string(what) + ": field '" + key + "' is missing or has the wrong type");
  }
}

}  // namespace

EpidemicSeries parse_series(const std::string& text, const std::optional<Json>& sidecar) {
  std::optional<std::int64_t> population, initial_count;
  if (sidecar) {
    if (sidecar->contains("population")) population = sidecar->at("population").get<std::int64_t>();
    if (sidecar->contains("initial_count")) initial_count = sidecar->at("initial_count").get<std::int64_t>();
  }
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  std::size_t row = 0;
  std::vector<std::int64_t> cumulative;
  std::vector<std::string> dates;
  bool any_date = false;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped.front() == '#') {
      const auto eq = stripped.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(std::string_view(stripped).substr(1, eq - 1));
      const std::string value = trim(std::string_view(stripped).substr(eq + 1));
      if (key == "population") population = metadata_int(key, value);
      if (key == "initial_count") initial_count = metadata_int(key, value);
      continue;
    }
    if (!header_seen) {
      const auto fields = split(stripped, ',');
      if (fields.size() != 2 || fields[0] != "date" || fields[1] != "cumulative") {
        throw ParseError(0, 1, "expected the header 'date,cumulative', got '" + stripped + "'");
      }
      header_seen = true;
      continue;
    }
    ++row;
    const auto fields = split(stripped, ',');
    if (fields.size() != 2) {
      throw ParseError(row, std::min<std::size_t>(fields.size(), 3), "expected 2 fields, found " +
                                                                         std::to_string(fields.size()));
    }
    const auto value = parse_int(fields[1]);
    if (!value) throw ParseError(row, 2, "'" + fields[1] + "' is not an integer count");
    if (*value < 0) throw ParseError(row, 2, "negative count " + fields[1]);
    cumulative.push_back(*value);
    dates.push_back(fields[0]);
    any_date = any_date || !fields[0].empty();
  }
  if (!header_seen) throw ParseError(0, 1, "missing header 'date,cumulative'");
  if (!population) throw ValidationError("population is not given (comment line or sidecar)");
  if (!initial_count) throw ValidationError("initial_count is not given (comment line or sidecar)");
  if (!any_date) dates.clear();
  return EpidemicSeries(*initial_count, std::move(cumulative), *population, std::move(dates));
}

EpidemicSeries load_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open series file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::optional<Json> sidecar;
  const std::filesystem::path meta = path.string() + ".meta.json";
  if (std::filesystem::exists(meta)) sidecar = read_json(meta);
  return parse_series(buffer.str(), sidecar);
}

std::string format_series(const EpidemicSeries& series) {
  std::ostringstream out;
  out << "# population=" << series.population() << "\n";
  out << "# initial_count=" << series.initial_count() << "\n";
  out << "date,cumulative\n";
  const auto& labels = series.labels();
  for (std::size_t t = 0; t < series.length(); ++t) {
    out << (labels.empty() ? std::string() : labels[t]) << "," << series.cumulative()[t] << "\n";
  }
  return out.str();
}

void write_series(const std::filesystem::path& path, const EpidemicSeries& series) {
  write_text(path, format_series(series));
}

Json to_json(const PriorSpec& prior) {
  Json overrides = Json::object();
  for (const auto& [t, w] : prior.omega_overrides) overrides[std::to_string(t)] = w;
  return Json{{"omega", prior.omega_default}, {"omega_overrides", overrides}, {"q_gap", prior.q_gap},
              {"rho", prior.rho},             {"a_lambda", prior.a_lambda},   {"b_lambda", prior.b_lambda},
              {"a_phi", prior.a_phi},         {"b_phi", prior.b_phi},         {"a_p", prior.a_p},
              {"b_p", prior.b_p},             {"eta", prior.eta},             {"m_max", prior.m_max}};
}

Json to_json(const SamplerConfig& config) {
  return Json{{"iterations", config.total_iterations},
              {"burn_in", config.burn_in},
              {"step_phi", config.step_phi},
              {"step_K", config.step_K},
              {"step_lambda", config.step_lambda},
              {"step_p", config.step_p},
              {"seed", config.seed},
              {"approx_move_ratios", config.approx_move_ratios}};
}

void update_from_json(const Json& j, PriorSpec& prior) {
  reject_unknown(j,
                 {"omega", "omega_overrides", "q_gap", "rho", "a_lambda", "b_lambda", "a_phi", "b_phi", "a_p", "b_p",
                  "eta", "m_max"},
                 "prior");
  read_field(j, "omega", prior.omega_default);
  if (j.contains("omega_overrides")) {
    prior.omega_overrides.clear();
    for (const auto& [key, value] : j.at("omega_overrides").items()) {
      const auto t = parse_int(key);
      if (!t || *t < 0) throw ConfigError("omega override key '" + key + "' is not a time index");
      prior.omega_overrides[static_cast<std::size_t>(*t)] = value.get<double>();
    }
  }
  read_field(j, "q_gap", prior.q_gap);
  read_field(j, "rho", prior.rho);
  read_field(j, "a_lambda", prior.a_lambda);
  read_field(j, "b_lambda", prior.b_lambda);
  read_field(j, "a_phi", prior.a_phi);
  read_field(j, "b_phi", prior.b_phi);
  read_field(j, "a_p", prior.a_p);
  read_field(j, "b_p", prior.b_p);
  read_field(j, "eta", prior.eta);
  read_field(j, "m_max", prior.m_max);
}

void update_from_json(const Json& j, SamplerConfig& config) {
  reject_unknown(j, {"iterations", "burn_in", "step_phi", "step_K", "step_lambda", "step_p", "seed",
                     "approx_move_ratios"},
                 "sampler");
  read_field(j, "iterations", config.total_iterations);
  read_field(j, "burn_in", config.burn_in);
  read_field(j, "step_phi", config.step_phi);
  read_field(j, "step_K", config.step_K);
  read_field(j, "step_lambda", config.step_lambda);
  read_field(j, "step_p", config.step_p);
  read_field(j, "seed", config.seed);
  read_field(j, "approx_move_ratios", config.approx_move_ratios);
}

Json to_json(const GlcScenario& s) {
  return Json{{"horizon", s.horizon},       {"population", s.population}, {"initial_count", s.initial_count},
              {"changepoints", s.changepoints}, {"lambda", s.lambda},     {"final_size", s.final_size},
              {"scaling", s.scaling},       {"dispersion", s.dispersion}, {"seed", s.seed}};
}

Json to_json(const SirScenario& s) {
  return Json{{"horizon", s.horizon},
              {"population", s.population},
              {"initial_infected", s.initial_infected},
              {"initial_removed", s.initial_removed},
              {"changepoints", s.changepoints},
              {"r0", s.r0},
              {"removal_rate", s.removal_rate},
              {"dispersion_s", s.dispersion_s},
              {"dispersion_r", s.dispersion_r},
              {"seed", s.seed}};
}

void update_from_json(const Json& j, GlcScenario& s) {
  reject_unknown(j, {"horizon", "population", "initial_count", "changepoints", "lambda", "final_size", "scaling",
                     "dispersion", "seed"},
                 "glc scenario");
  read_field(j, "horizon", s.horizon);
  read_field(j, "population", s.population);
  read_field(j, "initial_count", s.initial_count);
  read_field(j, "changepoints", s.changepoints);
  read_field(j, "lambda", s.lambda);
  read_field(j, "final_size", s.final_size);
  read_field(j, "scaling", s.scaling);
  read_field(j, "dispersion", s.dispersion);
  read_field(j, "seed", s.seed);
}

void update_from_json(const Json& j, SirScenario& s) {
  reject_unknown(j, {"horizon", "population", "initial_infected", "initial_removed", "changepoints", "r0",
                     "removal_rate", "dispersion_s", "dispersion_r", "seed"},
                 "sir scenario");
  read_field(j, "horizon", s.horizon);
  read_field(j, "population", s.population);
  read_field(j, "initial_infected", s.initial_infected);
  read_field(j, "initial_removed", s.initial_removed);
  read_field(j, "changepoints", s.changepoints);
  read_field(j, "r0", s.r0);
  read_field(j, "removal_rate", s.removal_rate);
  read_field(j, "dispersion_s", s.dispersion_s);
  read_field(j, "dispersion_r", s.dispersion_r);
  read_field(j, "seed", s.seed);
}

Json to_json(const ModelState& state) {
  const auto& seg = state.segmentation;
  Json segments = Json::array();
  for (std::size_t m = 0; m < state.params.size(); ++m) {
    segments.push_back({{"begin", seg.segment_begin(m)},
                        {"end", seg.segment_end(m)},
                        {"final_size", state.params[m].final_size},
                        {"growth_rate", state.params[m].growth_rate},
                        {"scaling", state.params[m].scaling}});
  }
  std::vector<std::size_t> cps(seg.changepoints().begin(), seg.changepoints().end());
  return Json{{"segment_count", seg.segment_count()},
              {"changepoints", cps},
              {"labels", seg.labels()},
              {"segments", segments},
              {"dispersion", state.dispersion}};
}

Json to_json(const PosteriorSummary& summary) {
  Json intervals = Json::array();
  for (const auto& iv : summary.changepoints) intervals.push_back({{"time", iv.time}, {"lo", iv.lo}, {"hi", iv.hi}});
  const auto& pq = summary.param_quantiles;
  Json segments = Json::array();
  for (const auto& s : pq.segments) {
    segments.push_back({{"final_size", s.final_size}, {"growth_rate", s.growth_rate}, {"scaling", s.scaling}});
  }
  Json m_posterior = Json::object();
  for (const auto& [m, f] : summary.m_posterior) m_posterior[std::to_string(m)] = f;
  Json map = to_json(summary.map_state);
  map["iteration"] = summary.map_iteration;
  return Json{{"map", map},
              {"ppi", summary.ppi},
              {"intervals", intervals},
              {"quantiles",
               {{"probs", pq.probs},
                {"segment_count", pq.segment_count},
                {"samples_used", pq.samples_used},
                {"segments", segments},
                {"dispersion", pq.dispersion}}},
              {"m_posterior", m_posterior}};
}

Json to_json(const ForecastResult& forecast) {
  return Json{{"horizon", forecast.horizon}, {"samples", forecast.samples}, {"mean", forecast.mean},
              {"lo", forecast.lo},           {"hi", forecast.hi}};
}

Json to_json(const AcceptanceCounts& counts) {
  Json out = Json::object();
  for (std::size_t k = 0; k < kMoveKindCount; ++k) {
    if (counts.proposed[k] == 0) continue;
    const auto kind = static_cast<MoveKind>(k);
    out[to_string(kind)] = {{"proposed", counts.proposed[k]}, {"accepted", counts.accepted[k]}};
  }
  return out;
}

Json truth_json(const Segmentation& truth, const std::vector<SegmentParams>& params, double dispersion) {
  ModelState state{truth, params, dispersion};
  Json j = to_json(state);
  j["length"] = truth.length();
  return j;
}

void validate_summary(const Json& s) {
  const char* what = "summary.json";
  if (!s.is_object()) throw IoError("summary.json must be an object");
  require(s, "seed", &Json::is_number_unsigned, what);
  require(s, "config", &Json::is_object, what);
  require(s, "series", &Json::is_object, what);
  require(s, "map", &Json::is_object, what);
  require(s, "ppi", &Json::is_array, what);
  require(s, "intervals", &Json::is_array, what);
  require(s, "quantiles", &Json::is_object, what);
  require(s, "m_posterior", &Json::is_object, what);
  require(s, "acceptance", &Json::is_object, what);
  const Json& map = s.at("map");
  require(map, "changepoints", &Json::is_array, "summary.json map");
  require(map, "labels", &Json::is_array, "summary.json map");
  require(map, "segments", &Json::is_array, "summary.json map");
  require(map, "dispersion", &Json::is_number, "summary.json map");
  const auto length = s.at("series").at("length").get<std::size_t>();
  if (s.at("ppi").size() != length || map.at("labels").size() != length) {
    throw IoError("summary.json: ppi and labels must have one entry per time point");
  }
  for (const auto& p : s.at("ppi")) {
    if (!p.is_number() || p.get<double>() < 0.0 || p.get<double>() > 1.0) {
      throw IoError("summary.json: ppi entries must lie in [0, 1]");
    }
  }
  for (const auto& iv : s.at("intervals")) {
    const auto t = iv.at("time").get<std::size_t>();
    if (iv.at("lo").get<std::size_t>() > t || iv.at("hi").get<std::size_t>() < t) {
      throw IoError("summary.json: an interval does not contain its change point");
    }
  }
  if (s.contains("forecast")) {
    const Json& f = s.at("forecast");
    require(f, "mean", &Json::is_array, "summary.json forecast");
    require(f, "lo", &Json::is_array, "summary.json forecast");
    require(f, "hi", &Json::is_array, "summary.json forecast");
  }
  if (s.contains("amape") && !s.at("amape").is_number()) throw IoError("summary.json: amape must be a number");
}

void validate_ground_truth(const Json& truth) {
  const char* what = "ground truth";
  require(truth, "length", &Json::is_number_unsigned, what);
  require(truth, "changepoints", &Json::is_array, what);
  require(truth, "labels", &Json::is_array, what);
  require(truth, "segments", &Json::is_array, what);
  if (truth.at("labels").size() != truth.at("length").get<std::size_t>()) {
    throw IoError("ground truth: labels must have one entry per time point");
  }
  if (truth.at("segments").size() != truth.at("changepoints").size() + 1) {
    throw IoError("ground truth: need one parameter set per segment");
  }
}

std::vector<PlotRow> plot_rows(const EpidemicSeries& series, const std::vector<double>& fitted,
                               const std::vector<double>& ppi, const ForecastResult* forecast,
                               const std::vector<std::int64_t>* actual_tail) {
  std::vector<PlotRow> rows;
  const std::size_t length = series.length();
  for (std::size_t t = 0; t < length; ++t) {
    PlotRow row;
    row.time = t;
    row.observed = static_cast<double>(series.new_cases()[t]);
    row.fitted_mean = fitted[t];
    row.ppi = ppi[t];
    rows.push_back(row);
  }
  if (forecast != nullptr) {
    for (std::size_t h = 0; h < forecast->horizon; ++h) {
      PlotRow row;
      row.time = length + h;
      if (actual_tail != nullptr && h < actual_tail->size()) row.observed = static_cast<double>((*actual_tail)[h]);
      row.forecast_mean = forecast->mean[h];
      row.forecast_lo = forecast->lo[h];
      row.forecast_hi = forecast->hi[h];
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_plotdata(const std::vector<PlotRow>& rows) {
  std::ostringstream out;
  out << "time,observed,fitted_mean,ppi,forecast_mean,forecast_lo,forecast_hi\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    out << r.time << ',' << cell(r.observed) << ',' << cell(r.fitted_mean) << ',' << cell(r.ppi) << ','
        << cell(r.forecast_mean) << ',' << cell(r.forecast_lo) << ',' << cell(r.forecast_hi) << '\n';
  }
  return out.str();
}

std::string format_trace(const ChainTrace& trace) {
  std::ostringstream out;
  out << "iteration,m,log_lik,log_posterior,dispersion,changepoints\n";
  for (const auto& s : trace.samples) {
    out << s.iteration << ',' << s.state.segmentation.segment_count() << ',' << format_double(s.log_lik) << ','
        << format_double(s.log_posterior) << ',' << format_double(s.state.dispersion) << ',';
    bool first = true;
    for (std::size_t c : s.state.segmentation.changepoints()) {
      out << (first ? "" : " ") << c;
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

void validate_csv(const std::string& text, const std::vector<std::string>& header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("CSV artifact is empty");
  if (split(line, ',') != header) throw IoError("CSV artifact has an unexpected header: " + line);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (split(line, ',').size() != header.size()) {
      throw IoError("CSV artifact row " + std::to_string(row) + " has the wrong number of fields");
    }
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace episeg
