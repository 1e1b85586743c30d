#pragma once

// File formats.
//
// Series CSV:
//   # population=200000
//   # initial_count=100
//   date,cumulative
//   2020-03-01,112
//   ...
// The two metadata keys may instead live in "<path>.meta.json". Rows are
// numbered from 1 after the header in error messages.
//
// JSON artifacts are written with sorted keys and no timestamps, so equal
// inputs give byte-identical files.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "episeg/core_model.hpp"
#include "episeg/inference.hpp"
#include "episeg/simgen.hpp"
#include "episeg/trace.hpp"

namespace episeg {

using Json = nlohmann::json;

EpidemicSeries load_series(const std::filesystem::path& path);
EpidemicSeries parse_series(const std::string& text, const std::optional<Json>& sidecar = std::nullopt);
void write_series(const std::filesystem::path& path, const EpidemicSeries& series);
std::string format_series(const EpidemicSeries& series);

Json to_json(const PriorSpec& prior);
Json to_json(const SamplerConfig& config);
/// Overlays the keys present in `j` onto `prior`; unknown keys are a ConfigError.
void update_from_json(const Json& j, PriorSpec& prior);
void update_from_json(const Json& j, SamplerConfig& config);

Json to_json(const GlcScenario& scenario);
Json to_json(const SirScenario& scenario);
void update_from_json(const Json& j, GlcScenario& scenario);
void update_from_json(const Json& j, SirScenario& scenario);

Json to_json(const ModelState& state);
Json to_json(const PosteriorSummary& summary);
Json to_json(const ForecastResult& forecast);
Json to_json(const AcceptanceCounts& counts);

/// Ground truth of one simulated replicate: change points, labels, parameters.
Json truth_json(const Segmentation& truth, const std::vector<SegmentParams>& params, double dispersion);

/// Throw IoError naming the first missing or mistyped field.
void validate_summary(const Json& summary);
void validate_ground_truth(const Json& truth);

struct PlotRow {
  std::size_t time = 0;
  std::optional<double> observed, fitted_mean, ppi, forecast_mean, forecast_lo, forecast_hi;
};

std::vector<PlotRow> plot_rows(const EpidemicSeries& series, const std::vector<double>& fitted,
                               const std::vector<double>& ppi, const ForecastResult* forecast,
                               const std::vector<std::int64_t>* actual_tail);

std::string format_plotdata(const std::vector<PlotRow>& rows);
std::string format_trace(const ChainTrace& trace);

/// Checks the header and column count of a CSV artifact before it is written.
void validate_csv(const std::string& text, const std::vector<std::string>& header);

/// Writes `text` to `path` (creating parent directories); IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace episeg
