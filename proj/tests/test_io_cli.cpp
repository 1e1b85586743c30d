#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "episeg/cli.hpp"
#include "episeg/errors.hpp"
#include "episeg/io.hpp"
#include "support.hpp"

using namespace episeg;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("episeg_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int status;
  std::string out, err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "episeg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_command_line(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

}  // namespace

TEST_CASE("parse a small series") {
  const auto s = parse_series("# population=1000\n# initial_count=5\ndate,cumulative\nd1,7\nd2,7\nd3,12\n");
  CHECK(s.length() == 3);
  CHECK(s.population() == 1000);
  CHECK(s.initial_count() == 5);
  CHECK(std::vector<std::int64_t>(s.new_cases().begin(), s.new_cases().end()) == std::vector<std::int64_t>{2, 0, 5});
  CHECK(s.labels() == std::vector<std::string>{"d1", "d2", "d3"});
}

TEST_CASE("decreasing counts are reported by row") {
  std::string text = "# population=1000\n# initial_count=1\ndate,cumulative\n";
  const std::vector<int> counts{2, 3, 4, 5, 6, 7, 6, 8};
  for (std::size_t i = 0; i < counts.size(); ++i) text += "d" + std::to_string(i + 1) + "," + std::to_string(counts[i]) + "\n";
  try {
    parse_series(text);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 7") != std::string::npos);
  }
}

TEST_CASE("malformed series files") {
  const std::string meta = "# population=1000\n# initial_count=1\n";
  CHECK_THROWS_AS(parse_series(meta + "day,count\nd1,3\n"), ParseError);
  try {
    parse_series(meta + "date,cumulative\nd1,3\nd2,x4\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == 2);
  }
  CHECK_THROWS_AS(parse_series(meta + "date,cumulative\nd1,3,4\n"), ParseError);
  CHECK_THROWS_AS(parse_series("date,cumulative\nd1,3\n"), ValidationError);  // no metadata
  CHECK_THROWS_AS(parse_series(meta + "date,cumulative\nd1,3000\n"), ValidationError);  // above N
  const auto s = parse_series("date,cumulative\nd1,3\n", Json{{"population", 50}, {"initial_count", 2}});
  CHECK(s.population() == 50);
  CHECK_THROWS_AS(load_series("/nonexistent/series.csv"), IoError);
}

TEST_CASE("series round trip through a file") {
  const auto dir = scratch_dir("roundtrip");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = episeg::testing::random_series(40, seed);
    write_series(dir / "s.csv", s);
    CHECK(load_series(dir / "s.csv") == s);
  }
  const EpidemicSeries labelled(3, {4, 9}, 100, {"2020-01-01", "2020-01-02"});
  write_series(dir / "l.csv", labelled);
  CHECK(load_series(dir / "l.csv") == labelled);

  // metadata from a sidecar
  std::ofstream(dir / "side.csv") << "date,cumulative\n,5\n,9\n";
  std::ofstream(dir / "side.csv.meta.json") << R"({"population": 100, "initial_count": 2})";
  const auto side = load_series(dir / "side.csv");
  CHECK(side.initial_count() == 2);
  CHECK(side.length() == 2);
}

TEST_CASE("configuration JSON round trip and unknown keys") {
  PriorSpec prior;
  prior.eta = 0.25;
  prior.omega_overrides[12] = 0.4;
  PriorSpec back;
  update_from_json(to_json(prior), back);
  CHECK(back.eta == 0.25);
  CHECK(back.omega(12) == 0.4);
  CHECK_THROWS_AS(update_from_json(Json{{"etaa", 1.0}}, back), ConfigError);

  SamplerConfig config;
  config.seed = 99;
  config.total_iterations = 1234;
  SamplerConfig sback;
  update_from_json(to_json(config), sback);
  CHECK(sback.seed == 99);
  CHECK(sback.total_iterations == 1234);
  CHECK_THROWS_AS(update_from_json(Json{{"iters", 1}}, sback), ConfigError);
}

TEST_CASE("CSV artifacts are checked before writing") {
  CHECK_NOTHROW(validate_csv("a,b\n1,2\n", {"a", "b"}));
  CHECK_THROWS(validate_csv("a,c\n1,2\n", {"a", "b"}));
  CHECK_THROWS(validate_csv("a,b\n1,2,3\n", {"a", "b"}));
}

TEST_CASE("simulate, fit and evaluate end to end") {
  const auto dir = scratch_dir("workflow");
  auto sim = run_cli({"simulate", "glc", "--seed", "3", "--out", (dir / "sim").string()});
  REQUIRE(sim.status == 0);
  std::size_t csv = 0, truth = 0;
  for (const auto& entry : fs::directory_iterator(dir / "sim")) {
    const auto name = entry.path().filename().string();
    csv += name.ends_with(".csv");
    truth += name.ends_with(".truth.json");
  }
  CHECK(csv == 50);
  CHECK(truth == 50);
  const Json ground = read_json(dir / "sim" / "ground_truth.json");
  CHECK(ground["replicates"].size() == 50);
  CHECK_NOTHROW(validate_ground_truth(ground["replicates"][0]));

  const std::string series = (dir / "sim" / "replicate_001.csv").string();
  const std::vector<std::string> fit{"fit", series, "--m", "3", "--iterations", "6000", "--seed", "11",
                                     "--emit-trace"};
  auto first = fit, second = fit;
  first.insert(first.end(), {"--out", (dir / "a").string()});
  second.insert(second.end(), {"--out", (dir / "b").string()});
  REQUIRE(run_cli(first).status == 0);
  REQUIRE(run_cli(second).status == 0);
  const std::string summary = slurp(dir / "a" / "summary.json");
  CHECK(summary == slurp(dir / "b" / "summary.json"));
  CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
  CHECK(slurp(dir / "a" / "plotdata.csv") == slurp(dir / "b" / "plotdata.csv"));
  const Json doc = Json::parse(summary);
  CHECK_NOTHROW(validate_summary(doc));
  CHECK(doc["seed"] == 11);
  CHECK(doc["config"]["sampler"]["burn_in"] == 3000);
  CHECK(doc["ppi"].size() == 150);

  auto eval = run_cli({"evaluate", "--truth", (dir / "sim" / "replicate_001.truth.json").string(), "--estimate",
                       (dir / "a" / "summary.json").string(), "--out", (dir / "eval").string()});
  REQUIRE(eval.status == 0);
  const Json scores = read_json(dir / "eval" / "evaluation.json");
  CHECK(scores["ari"].get<double>() > 0.9);

  auto self = run_cli({"evaluate", "--truth", (dir / "sim" / "replicate_001.truth.json").string(), "--estimate",
                       (dir / "sim" / "replicate_001.truth.json").string(), "--out", (dir / "eval2").string()});
  REQUIRE(self.status == 0);
  CHECK(read_json(dir / "eval2" / "evaluation.json")["ari"] == 1.0);
}

TEST_CASE("forecast with a holdout reports AMAPE") {
  const auto dir = scratch_dir("forecast");
  REQUIRE(run_cli({"simulate", "glc", "--replicates", "1", "--out", dir.string()}).status == 0);
  auto r = run_cli({"forecast", (dir / "replicate_001.csv").string(), "--m", "3", "--iterations", "3000",
                    "--holdout", "10", "--horizon", "10", "--out", (dir / "fc").string()});
  REQUIRE(r.status == 0);
  const Json doc = read_json(dir / "fc" / "summary.json");
  CHECK(doc.contains("amape"));
  CHECK(doc["forecast"]["mean"].size() == 10);
  CHECK(slurp(dir / "fc" / "plotdata.csv").starts_with("time,observed,fitted_mean,ppi,forecast_mean"));
}

TEST_CASE("errors give a JSON report and a nonzero status") {
  const auto dir = scratch_dir("errors");
  REQUIRE(run_cli({"simulate", "glc", "--replicates", "1", "--out", dir.string()}).status == 0);
  auto r = run_cli({"fit", (dir / "replicate_001.csv").string(), "--m", "30", "--out", (dir / "fit").string()});
  CHECK(r.status != 0);
  const Json err = Json::parse(r.err);
  CHECK(err["error"]["kind"] == "infeasible");
  CHECK_FALSE(fs::exists(dir / "fit" / "summary.json"));

  CHECK(run_cli({"fit"}).status != 0);
  CHECK(run_cli({"frobnicate"}).status != 0);
  CHECK(run_cli({"fit", (dir / "missing.csv").string(), "--m", "2"}).status != 0);

  // the installed binary reports the same way
  const std::string cmd = std::string(EPISEG_CLI_PATH) + " fit " + (dir / "replicate_001.csv").string() +
                          " --m 30 --out " + (dir / "bin").string() + " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  CHECK(status != 0);
  CHECK(Json::parse(slurp(dir / "stderr.txt"))["error"]["kind"] == "infeasible");
}
