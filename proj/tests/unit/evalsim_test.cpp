#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "resdeploy/error.hpp"
#include "resdeploy/evalsim/evalsim.hpp"
#include "resdeploy/grid/grid_io.hpp"

using namespace resdeploy;
using namespace resdeploy::evalsim;
namespace fs = std::filesystem;

namespace {

grid::GridModel five_bus() { return grid::load_grid(RESDEPLOY_DATA_DIR "/five_bus"); }

Eigen::VectorXd five_bus_forecast() { return Eigen::Vector<double, 5>(0, 300, 150, 300, 200); }

GaussianSampler five_bus_sampler(const grid::GridModel& g, std::uint64_t seed) {
  GaussianSampler s;
  s.covariance.resize(2, 2);
  s.covariance << 0.141, 0.001, 0.001, 0.141;
  s.nodes = {g.node_index(3), g.node_index(5)};
  s.num_nodes = g.num_nodes();
  s.base_mva = 100.0;
  s.seed = seed;
  return s;
}

EvalConfig small_config() {
  EvalConfig c;
  c.alpha = 0.95;
  c.methods = {Method::kDsw, Method::kExt, Method::kCcg};
  return c;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("Gaussian sampler reproduces the covariance in MW^2") {
  const auto g = five_bus();
  const Eigen::MatrixXd e = sample_errors(five_bus_sampler(g, 1), 200000);
  REQUIRE(e.rows() == 200000);
  REQUIRE(e.cols() == 5);
  for (int n : {0, 1, 3}) CHECK(e.col(n).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd x(e(Eigen::all, std::vector<int>{2, 4}));
  const Eigen::RowVector2d mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mean;
  const Eigen::Matrix2d cov = (c.transpose() * c) / static_cast<double>(x.rows() - 1);
  // Standard error of each entry is about 4.5 MW^2 at this sample size.
  CHECK(std::abs(cov(0, 0) - 1410.0) <= 28.0);
  CHECK(std::abs(cov(1, 1) - 1410.0) <= 28.0);
  CHECK(std::abs(cov(0, 1) - 10.0) <= 28.0);
  CHECK(std::abs(mean[0]) <= 0.5);
  CHECK(std::abs(mean[1]) <= 0.5);
}

TEST_CASE("sampler is seeded and rejects bad covariances") {
  const auto g = five_bus();
  CHECK(sample_errors(five_bus_sampler(g, 7), 50) == sample_errors(five_bus_sampler(g, 7), 50));
  CHECK(sample_errors(five_bus_sampler(g, 7), 50) != sample_errors(five_bus_sampler(g, 8), 50));
  GaussianSampler bad = five_bus_sampler(g, 1);
  bad.covariance << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.covariance << 1.0, 0.5, 0.4, 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("method and init-set names") {
  for (Method m : {Method::kDsw, Method::kExt, Method::kCcg, Method::kVenum}) CHECK(parse_method(to_string(m)) == m);
  CHECK(parse_method("v-enum") == Method::kVenum);
  CHECK(parse_method("Ccg") == Method::kCcg);
  CHECK_FALSE(parse_method("foo").has_value());
  for (InitSet s : {InitSet::kExtremesAndLines, InitSet::kExtremesOnly, InitSet::kLinesOnly})
    CHECK(parse_init_set(to_string(s)) == s);
  CHECK_FALSE(parse_init_set("some").has_value());
}

TEST_CASE("tallies partition the test set and hold their invariants") {
  const auto g = five_bus();
  const auto d = five_bus_forecast();
  const auto train = sample_scenarios(five_bus_sampler(g, 11), 300, d);
  const auto test = sample_scenarios(five_bus_sampler(g, 12), 300, d);
  const EvaluationReport rep = evaluate(g, d, train, test, small_config());
  REQUIRE(rep.methods.size() == 3);
  CHECK(rep.methods[0].method == Method::kDsw);
  CHECK(rep.test_count == 300);
  for (const auto& m : rep.methods) {
    REQUIRE(m.ok);
    CHECK(m.all.count == 300);
    CHECK(m.inside.count == rep.inside_count);
    CHECK(m.inside.count + m.outside.count == m.all.count);
    CHECK(m.inside.violations + m.outside.violations == m.all.violations);
    CHECK(std::abs(m.inside.rt_cost_sum + m.outside.rt_cost_sum - m.all.rt_cost_sum) <= 1e-6 * (1.0 + m.all.rt_cost_sum));
    CHECK(m.all.violations <= m.all.count);
    CHECK((m.all.violations == 0) == (m.all.rt_cost_sum == 0.0));
    CHECK(m.up_reserve >= rep.req.rho_plus - 1e-6);
  }
  CHECK(rep.find(Method::kExt)->scenarios.size() == 2);
  CHECK(rep.find(Method::kCcg)->ccg.has_value());
  CHECK(rep.find(Method::kVenum) == nullptr);
}

TEST_CASE("a method that cannot be solved is reported and the others continue") {
  const auto g = five_bus();
  const auto d = five_bus_forecast();
  const auto train = sample_scenarios(five_bus_sampler(g, 11), 100, d);
  const auto test = sample_scenarios(five_bus_sampler(g, 12), 20, d);
  EvalConfig c = small_config();
  c.methods.push_back(Method::kVenum);
  c.ccg.vertex_cap = 1;
  const EvaluationReport rep = evaluate(g, d, train, test, c);
  const MethodResult* v = rep.find(Method::kVenum);
  REQUIRE(v != nullptr);
  CHECK_FALSE(v->ok);
  CHECK_FALSE(v->error.empty());
  CHECK(rep.find(Method::kCcg)->ok);
}

TEST_CASE("aggregation recomputes from the per-hour reports") {
  const auto g = five_bus();
  std::vector<HourInput> hours;
  for (int h = 0; h < 3; ++h) {
    HourInput in;
    in.hour = h;
    in.d_hat = five_bus_forecast() * (0.9 + 0.05 * h);
    in.train = sample_scenarios(five_bus_sampler(g, 100 + h), 200, in.d_hat);
    in.test = sample_scenarios(five_bus_sampler(g, 200 + h), 100 + 50 * h, in.d_hat);
    hours.push_back(std::move(in));
  }
  const MultiHourReport rep = multi_hour_run(g, hours, small_config());
  REQUIRE(rep.aggregate.size() == 3);
  for (const auto& a : rep.aggregate) {
    Tally inside;
    double weighted = 0.0;
    int weight = 0;
    for (const auto& h : rep.hours) {
      const MethodResult* m = h.find(a.method);
      inside += m->inside;
      weighted += m->da_cost * m->all.count;
      weight += m->all.count;
    }
    CHECK(a.hours == 3);
    CHECK(a.inside.count == inside.count);
    CHECK(a.inside.violations == inside.violations);
    CHECK(a.da_cost == doctest::Approx(weighted / weight).epsilon(1e-12));
  }
  const auto& ccg = rep.aggregate[2];
  int hist = 0;
  for (int v : ccg.scenario_histogram) hist += v;
  CHECK(hist == 3);
}

TEST_CASE("reports are identical for any worker count") {
  const auto g = five_bus();
  HourInput in;
  in.d_hat = five_bus_forecast();
  in.train = sample_scenarios(five_bus_sampler(g, 11), 300, in.d_hat);
  in.test = sample_scenarios(five_bus_sampler(g, 12), 300, in.d_hat);
  EvalConfig one = small_config(), many = small_config();
  one.ccg.workers = 1;
  many.ccg.workers = 4;
  const auto a = to_json(multi_hour_run(g, {in}, one), g, one).dump();
  const auto b = to_json(multi_hour_run(g, {in}, many), g, many).dump();
  CHECK(a == b);
}

TEST_CASE("congested-line flags are ordered by count and capped") {
  const auto g = five_bus();
  const auto d = five_bus_forecast();
  const auto train = sample_scenarios(five_bus_sampler(g, 11), 200, d);
  const auto req = forecast::reserve_requirements(train, 0.95);
  const auto dsw = scheduling::solve_da(g, d, req);
  EvalConfig c = small_config();
  const auto flagged = flag_congested_lines(g, dsw, train.errors, c);
  CHECK(static_cast<int>(flagged.size()) <= c.flagged_lines);
  REQUIRE_FALSE(flagged.empty());
  CHECK(g.lines()[flagged[0]].id == "1-5");
  c.flagged_lines = 1;
  CHECK(flag_congested_lines(g, dsw, train.errors, c).size() == 1);
}

TEST_CASE("artifacts are written with stable hashes") {
  const auto g = five_bus();
  HourInput in;
  in.d_hat = five_bus_forecast();
  in.train = sample_scenarios(five_bus_sampler(g, 11), 200, in.d_hat);
  in.test = sample_scenarios(five_bus_sampler(g, 12), 100, in.d_hat);
  const EvalConfig c = small_config();
  const auto rep = multi_hour_run(g, {in}, c);
  const fs::path dir = fs::temp_directory_path() / "resdeploy_evalsim_artifacts";
  fs::remove_all(dir);
  const auto files = write_artifacts(dir, rep, g, c, {{"label", "test"}});
  CHECK(files.size() == 5);
  for (const auto& f : files) CHECK(fs::exists(dir / f));
  const std::string first = sha256_file(dir / "report.json");
  CHECK(first.size() == 64);
  write_artifacts(dir, rep, g, c, {{"label", "test"}});
  CHECK(sha256_file(dir / "report.json") == first);
  const std::string csv = read_all(dir / "per_hour.csv");
  CHECK(csv.rfind("hour,method,status,da_cost,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("SHA-256 of a known string") {
  const fs::path p = fs::temp_directory_path() / "resdeploy_sha_test.txt";
  std::ofstream(p, std::ios::binary) << "abc";
  CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
