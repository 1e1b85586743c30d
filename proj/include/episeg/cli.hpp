#pragma once

// Workflow orchestration behind the `episeg` command.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "episeg/core_model.hpp"
#include "episeg/io.hpp"
#include "episeg/simgen.hpp"

namespace episeg {

enum class Mode { FitManual, FitAuto, Forecast, SimulateGlc, SimulateSir, Evaluate };

const char* to_string(Mode mode);

struct RunConfig {
  Mode mode = Mode::FitAuto;
  std::filesystem::path input_path;
  std::filesystem::path output_dir = ".";
  PriorSpec prior;
  SamplerConfig sampler;
  std::optional<std::size_t> m_fixed;  // fit-manual, or forecast with a fixed M
  std::optional<std::size_t> horizon;  // forecast
  std::size_t chains = 1;
  bool emit_trace = false;
  // forecast: hold back the last n points and score the forecast against them
  std::size_t holdout = 0;
  std::optional<std::filesystem::path> actual_path;
  // simulate
  std::size_t replicates = kDefaultReplicates;
  GlcScenario glc;
  SirScenario sir;
  // evaluate
  std::optional<std::filesystem::path> truth_path;
  std::optional<std::filesystem::path> estimate_path;

  void validate() const;
};

/// Config echo stored in summary.json.
Json to_json(const RunConfig& config);

/// Parses the command line (argv[0] is the program name). Throws ConfigError.
/// Returns std::nullopt after printing help to `out`.
std::optional<RunConfig> parse_arguments(int argc, const char* const* argv, std::ostream& out);

/// Runs one workflow and writes its artifacts. Throws episeg::Error on failure.
void run(const RunConfig& config, std::ostream& out);

/// Full command: parse, run, report errors as a JSON object on `err`.
/// Returns the process exit status.
int run_command_line(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace episeg
