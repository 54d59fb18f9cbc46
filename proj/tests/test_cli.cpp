#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "satflow/cli.hpp"
#include "satflow/harness.hpp"
#include "satflow/io.hpp"
#include "test_support.hpp"

using namespace satflow;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string config(const std::filesystem::path& dir, const json& j) {
  return write_file(dir / "config.json", j.dump()).string();
}

const json kPme = json::parse(R"({
  "domain": {"name": "interval", "params": {"a": -3, "b": 3}},
  "model": {"mobility": "linear", "entropy": {"kind": "power", "parameter": 2}},
  "h": 0.2, "T": 0.08,
  "initial": {"kind": "barenblatt", "m": 2, "mass": 2, "t0": 1}
})");

}  // namespace

TEST(Cli, MinimalRunWritesManifest) {
  const auto dir = fixtures::scratch_dir("satflow_cli_run");
  const Outcome r = cli({"run", "--config", config(dir, kPme), "--output", (dir / "out").string(), "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "out" / "manifest.json");
  ASSERT_TRUE(in);
  const json m = json::parse(in);
  EXPECT_EQ(m["versions"]["satflow"], "0.1.0");
  EXPECT_EQ(m["command"], "run");
  EXPECT_EQ(m["config"], kPme);
  EXPECT_EQ(m["levels"].size(), 1u);
  EXPECT_TRUE(m["wall_seconds"].is_number());
  for (const auto& f : m["files"]) EXPECT_TRUE(std::filesystem::exists(dir / "out" / f.get<std::string>())) << f;
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "level0" / "diagnostics.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "out" / "errors.csv"));
}

TEST(Cli, ManifestKeysAreSorted) {
  const auto dir = fixtures::scratch_dir("satflow_cli_sorted");
  ASSERT_EQ(cli({"run", "--config", config(dir, kPme), "--output", (dir / "out").string(), "--quiet"}).code, 0);
  std::ifstream in(dir / "out" / "manifest.json");
  std::string line;
  std::vector<std::string> top;
  while (std::getline(in, line)) {
    if (line.rfind("  \"", 0) == 0) top.push_back(line.substr(3, line.find('"', 3) - 3));
  }
  EXPECT_TRUE(std::is_sorted(top.begin(), top.end()));
  EXPECT_GE(top.size(), 6u);
}

TEST(Cli, MalformedJsonExitsTwo) {
  const auto dir = fixtures::scratch_dir("satflow_cli_malformed");
  const auto cfg = write_file(dir / "bad.json", "{\"h\": 0.1,, }");
  const Outcome r = cli({"run", "--config", cfg.string(), "--output", (dir / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("byte"), std::string::npos) << r.err;
}

TEST(Cli, UnknownKeyExitsTwoWithPath) {
  const auto dir = fixtures::scratch_dir("satflow_cli_unknown");
  json j = kPme;
  j["model"]["kernel"] = {{"kind", "gaussian"}, {"widht", 1}};
  const Outcome r = cli({"run", "--config", config(dir, j), "--output", (dir / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/model/kernel/widht"), std::string::npos) << r.err;
}

TEST(Cli, NonNaturalExponentExitsTwo) {
  const auto dir = fixtures::scratch_dir("satflow_cli_p");
  json j = kPme;
  j["p"] = 0.5;
  EXPECT_EQ(cli({"run", "--config", config(dir, j), "--output", (dir / "out").string()}).code, 2);
}

TEST(Cli, Eps2OnSingleLevelExitsTwo) {
  const auto dir = fixtures::scratch_dir("satflow_cli_eps2");
  json j = kPme;
  j["estimator"] = "eps2";
  EXPECT_EQ(cli({"convergence", "--config", config(dir, j), "--output", (dir / "out").string()}).code, 2);
}

TEST(Cli, ConvergenceNeedsAnEstimator) {
  const auto dir = fixtures::scratch_dir("satflow_cli_noest");
  EXPECT_EQ(cli({"convergence", "--config", config(dir, kPme), "--output", (dir / "out").string()}).code, 2);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"fly"}).code, 2);
  EXPECT_EQ(cli({"run", "--config", "/nonexistent/config.json"}).code, 2);
  EXPECT_EQ(cli({"--version"}).code, 0);
}

TEST(Cli, PresetsListsEveryName) {
  const Outcome r = cli({"presets"});
  ASSERT_EQ(r.code, 0);
  for (const std::string& name : preset_names()) EXPECT_NE(r.out.find(name), std::string::npos) << name;
}

TEST(Cli, SteadyPeanutSnapshotHasOneRowPerCell) {
  const auto dir = fixtures::scratch_dir("satflow_cli_peanut");
  const json j = {{"preset", "steady-peanut"}, {"T", 1.0}, {"snapshot_every", 1000}};
  ASSERT_EQ(cli({"run", "--config", config(dir, j), "--output", (dir / "out").string(), "--quiet"}).code, 0);
  std::ifstream in(dir / "out" / "manifest.json");
  const json m = json::parse(in);
  const int cells = m["levels"][0]["cells"].get<int>();
  const int steps = m["levels"][0]["steps"].get<int>();
  char name[32];
  std::snprintf(name, sizeof(name), "snapshot_%06d.csv", steps);
  const io::FieldRows rows = io::read_snapshot_csv(dir / "out" / "level0" / name);
  EXPECT_EQ(rows.dimension, 2);
  EXPECT_EQ(static_cast<int>(rows.indices.size()), cells);
}

TEST(Cli, BarenblattConvergenceWritesRates) {
  const auto dir = fixtures::scratch_dir("satflow_cli_conv");
  const json j = {{"preset", "barenblatt-1d"}};
  const Outcome r = cli({"convergence", "--config", config(dir, j), "--output", (dir / "out").string(), "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "out" / "errors.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "h,tau,eps1,eps2,rate");
  int rates = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() != ',') ++rates;
  }
  EXPECT_GE(rates, 2);
}

TEST(Cli, NormsOfZeroFieldAreZero) {
  const auto dir = fixtures::scratch_dir("satflow_cli_norms");
  const auto cfg = config(dir, {{"preset", "barenblatt-1d"}});
  const CellIndexSet cells = build_index_set(MeshSpec::uniform(1, 0.4), DomainShape::interval(-6.0, 6.0));
  io::write_snapshot_csv(dir / "zero.csv", cells, Eigen::VectorXd::Zero(cells.size()));
  const Outcome r = cli({"norms", "--config", cfg, "--field", (dir / "zero.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json n = json::parse(r.out);
  EXPECT_EQ(n["mass"], 0.0);
  EXPECT_EQ(n["h1_seminorm"], 0.0);
  EXPECT_EQ(n["wm11_upper_bound"], 0.0);
  EXPECT_EQ(n["wm11_exact"], 0.0);
}

TEST(Cli, NormsIn2dOmitExactValue) {
  const auto dir = fixtures::scratch_dir("satflow_cli_norms2d");
  const auto cfg = config(dir, {{"preset", "steady-square"}, {"T", 0.5}});
  ASSERT_EQ(cli({"run", "--config", cfg, "--output", (dir / "out").string(), "--quiet"}).code, 0);
  const Outcome r = cli({"norms", "--config", cfg, "--field", (dir / "out" / "level0" / "snapshot_000000.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json n = json::parse(r.out);
  EXPECT_FALSE(n.contains("wm11_exact"));
  EXPECT_GT(n["mass"].get<double>(), 0.0);
  EXPECT_GT(n["wm11_upper_bound"].get<double>(), 0.0);
}

TEST(Cli, ShapeMismatchExitsOne) {
  const auto dir = fixtures::scratch_dir("satflow_cli_mismatch");
  const auto cfg = config(dir, {{"preset", "barenblatt-1d"}});
  const CellIndexSet cells = fixtures::line_cells(0, 5, 0.4);
  io::write_snapshot_csv(dir / "short.csv", cells, Eigen::VectorXd::Ones(5));
  const Outcome r = cli({"norms", "--config", cfg, "--field", (dir / "short.csv").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("rows"), std::string::npos) << r.err;
}

TEST(Cli, BinaryExitCodes) {
  const auto dir = fixtures::scratch_dir("satflow_cli_binary");
  const auto bad = write_file(dir / "bad.json", "[");
  const std::string cmd = std::string(SATFLOW_BINARY) + " run --config " + bad.string() + " --output " +
                          (dir / "out").string() + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
