#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "resdeploy/cli/commands.hpp"
#include "resdeploy/error.hpp"
#include "resdeploy/grid/grid_io.hpp"

using namespace resdeploy;
using namespace resdeploy::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = RESDEPLOY_DATA_DIR;

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("resdeploy_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json small_config(const fs::path& out) {
  return {{"grid", (kData / "five_bus").string()},
          {"alpha", 0.95},
          {"methods", {"dsw", "ext", "ccg"}},
          {"output_dir", out.string()},
          {"forecast", (kData / "five_bus" / "forecast.csv").string()},
          {"sampler",
           {{"nodes", {3, 5}},
            {"covariance_pu2", {{0.141, 0.001}, {0.001, 0.141}}},
            {"train_seed", 11},
            {"test_seed", 12},
            {"train_count", 200},
            {"test_count", 100}}}};
}

fs::path write_json(const fs::path& file, const json& doc) {
  std::ofstream(file) << doc.dump(2);
  return file;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RESDEPLOY_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing, defaults and canonical round trip") {
  const fs::path dir = temp_dir("parse");
  const RunConfig c = parse_run_config(small_config(dir / "out"), dir);
  CHECK(c.alphas == std::vector<double>{0.95});
  CHECK(c.methods.size() == 3);
  CHECK(c.c_viol == 1000.0);
  CHECK(c.max_scenarios == 10);
  CHECK(c.adm_iterations == 20);
  REQUIRE(c.hours.size() == 1);
  REQUIRE(c.sampler.has_value());
  CHECK(c.sampler->covariance(0, 1) == 0.001);
  const auto canon = c.to_json();
  CHECK(parse_run_config(json::parse(canon.dump()), dir).to_json() == canon);
  check_run_config(c);
}

TEST_CASE("relative paths resolve against the config directory") {
  const RunConfig c = load_run_config(kData / "five_bus" / "config.json");
  CHECK(fs::equivalent(c.grid, kData / "five_bus"));
  CHECK(fs::equivalent(c.hours[0].forecast, kData / "five_bus" / "forecast.csv"));
}

TEST_CASE("config errors are ConfigError") {
  const fs::path dir = temp_dir("errors");
  auto bad = [&](auto mutate) {
    json j = small_config(dir / "out");
    mutate(j);
    return j;
  };
  CHECK_THROWS_AS(parse_run_config(bad([](json& j) { j["methods"] = {"dsw", "foo"}; }), dir), ConfigError);
  CHECK_THROWS_AS(parse_run_config(bad([](json& j) { j["colour"] = 1; }), dir), ConfigError);
  CHECK_THROWS_AS(parse_run_config(bad([](json& j) { j["alpha"] = "high"; }), dir), ConfigError);
  CHECK_THROWS_AS(parse_run_config(bad([](json& j) { j["init_set"] = "some"; }), dir), ConfigError);
  CHECK_THROWS_AS(parse_run_config(bad([](json& j) { j.erase("grid"); }), dir), ConfigError);
  CHECK_THROWS_AS(check_run_config(parse_run_config(bad([](json& j) { j["alpha"] = 1.0; }), dir)), ConfigError);
  CHECK_THROWS_AS(check_run_config(parse_run_config(bad([](json& j) { j["c_viol"] = 0; }), dir)), ConfigError);
  CHECK_THROWS_AS(check_run_config(parse_run_config(bad([](json& j) { j["grid"] = "/no/such/grid"; }), dir)),
                  ConfigError);
}

TEST_CASE("validate reports clean data and broken grids") {
  const RunConfig c = load_run_config(kData / "five_bus" / "config.json");
  const Diagnostics ok = validate(c);
  CHECK(ok.clean());
  CHECK(ok.info.size() >= 2);

  const Diagnostics disc = validate_grid(kData / "fixtures" / "disconnected");
  REQUIRE(disc.errors.size() == 1);
  CHECK(disc.errors[0].find("{1,2,3} | {4,5}") != std::string::npos);

  const Diagnostics bad = validate_grid(kData / "fixtures" / "bad_node");
  REQUIRE(bad.errors.size() == 1);
  CHECK(bad.errors[0].find("lines.csv:5") != std::string::npos);
  CHECK(bad.errors[0].find("unknown node id 9") != std::string::npos);
}

TEST_CASE("run writes a manifest whose replay reproduces every hash") {
  const fs::path dir = temp_dir("run");
  RunConfig c = parse_run_config(small_config(dir / "a"), dir);
  std::ostringstream log;
  const RunOutcome first = run(c, log);
  CHECK(first.failed_methods == 0);
  CHECK(first.artifacts.size() == 5);
  const json manifest = json::parse(read_all(first.manifest));
  REQUIRE(manifest["artifacts"].size() == 5);

  RunConfig replay = load_run_config(first.manifest);
  replay.output_dir = dir / "b";
  const RunOutcome second = run(replay, log);
  const json manifest2 = json::parse(read_all(second.manifest));
  CHECK(manifest2["artifacts"] == manifest["artifacts"]);
  for (const auto& a : manifest["artifacts"])
    CHECK(evalsim::sha256_file(dir / "a" / a["path"].get<std::string>()) == a["sha256"].get<std::string>());
}

TEST_CASE("shipped 5-bus run matches the pinned golden report") {
  const fs::path dir = temp_dir("golden");
  RunConfig c = load_run_config(kData / "five_bus" / "config.json");
  c.output_dir = dir;
  std::ostringstream log;
  run(c, log);
  json report = json::parse(read_all(dir / "report.json"));
  report.erase("run");
  CHECK(report == json::parse(read_all(RESDEPLOY_GOLDEN_DIR "/five_bus_report.json")));
}

TEST_CASE("several alphas get their own subdirectories") {
  const fs::path dir = temp_dir("alphas");
  json j = small_config(dir / "out");
  j["alpha"] = {0.9, 0.95};
  j["methods"] = {"dsw"};
  std::ostringstream log;
  const RunOutcome o = run(parse_run_config(j, dir), log);
  CHECK(fs::exists(dir / "out" / "alpha_0.9" / "report.json"));
  CHECK(fs::exists(dir / "out" / "alpha_0.95" / "report.json"));
  CHECK(o.artifacts.size() == 10);
}

TEST_CASE("exported scenarios round-trip through the loader") {
  const fs::path dir = temp_dir("export");
  const RunConfig c = parse_run_config(small_config(dir / "out"), dir);
  std::ostringstream log;
  CHECK(export_scenarios(c, evalsim::Method::kExt, 0, 0.95, dir / "ext.csv", log) == 2);
  const int n = export_scenarios(c, evalsim::Method::kCcg, 0, 0.95, dir / "ccg.csv", log);
  CHECK(n >= 1);
  const std::vector<int> ids{1, 2, 3, 4, 5};
  const Eigen::MatrixXd loaded = forecast::load_scenario_errors(dir / "ccg.csv", ids);
  CHECK(loaded.rows() == n);
  forecast::write_scenario_errors(dir / "again.csv", loaded, ids);
  CHECK(read_all(dir / "again.csv") == read_all(dir / "ccg.csv"));
  CHECK_THROWS_AS(export_scenarios(c, evalsim::Method::kCcg, 7, 0.95, dir / "x.csv", log), ConfigError);
}

TEST_CASE("sample writes the requested number of scenarios") {
  const fs::path dir = temp_dir("sample");
  const RunConfig c = parse_run_config(small_config(dir / "out"), dir);
  const auto g = grid::load_grid(c.grid);
  sample_to_csv(*c.sampler, g, 25, 3, dir / "s.csv");
  const Eigen::MatrixXd e = forecast::load_scenario_errors(dir / "s.csv", {1, 2, 3, 4, 5});
  CHECK(e.rows() == 25);
  CHECK(e.col(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = temp_dir("exit");
  const fs::path cfg = write_json(dir / "config.json", small_config(dir / "out"));
  CHECK(run_cli("validate --config " + cfg.string()) == kOk);
  CHECK(run_cli("validate --grid " + (kData / "fixtures" / "disconnected").string()) == kValidationFailure);
  CHECK(run_cli("validate --grid " + (kData / "fixtures" / "bad_node").string()) == kValidationFailure);
  CHECK(run_cli("run --config " + cfg.string() + " --methods dsw,bogus") == kConfigError);
  CHECK(run_cli("run --config " + cfg.string() + " --alpha 1.5") == kConfigError);
  CHECK(run_cli("run --config " + cfg.string() + " --no-such-flag") == kConfigError);
  CHECK(run_cli("run --config " + cfg.string() + " --methods dsw --test-count 20") == kOk);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(run_cli("export-scenarios --config " + cfg.string() + " --method ext --hour 0 --out " +
                (dir / "ext.csv").string()) == kOk);
  CHECK(run_cli("sample --config " + cfg.string() + " --count 10 --out " + (dir / "s.csv").string()) == kOk);

  json heavy = small_config(dir / "out2");
  heavy["forecast"] = (dir / "heavy.csv").string();
  std::ofstream(dir / "heavy.csv") << "node_id,net_demand_mw\n2,900\n4,900\n";
  const fs::path heavy_cfg = write_json(dir / "heavy.json", heavy);
  CHECK(run_cli("validate --config " + heavy_cfg.string()) == kValidationFailure);
  CHECK(run_cli("run --config " + heavy_cfg.string() + " --methods dsw") == kSolverFailure);
}
