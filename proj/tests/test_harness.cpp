#include "doctest.h"

#include "satett/error.hpp"
#include "satett/harness.hpp"
#include "satett/metrics.hpp"
#include "satett/rng.hpp"
#include "satett/simulation.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace satett;
using namespace satett::harness;
namespace fs = std::filesystem;

namespace {

simulation::ReplicationRow row(const std::string& method, double est, double se, double truth) {
  simulation::ReplicationRow r;
  r.scenario = 1;
  r.cell = "n_ext=100";
  r.method = method;
  r.subgroup = 1;
  r.estimate = est;
  r.se = se;
  r.truth = truth;
  r.ci_low = est - 1.959963984540054 * se;
  r.ci_high = est + 1.959963984540054 * se;
  r.p_value = 2.0 * (1.0 - 0.5 * std::erfc(-std::abs(est / se) / std::sqrt(2.0)));
  r.covered = r.ci_low <= truth && truth <= r.ci_high;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("satett_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + SATETT_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("metrics hand example") {
  const std::vector<simulation::ReplicationRow> rows{row("naive", 0.0, 10.0, 0.5), row("naive", 1.0, 10.0, 0.5)};
  const auto t = aggregate_metrics(rows);
  REQUIRE(t.rows.size() == 1);
  const auto& m = t.rows[0];
  CHECK(*m.variance == doctest::Approx(0.5));
  CHECK(*m.mean_abs_bias == doctest::Approx(0.5));
  CHECK(*m.coverage == 1.0);
  CHECK(*m.power == 0.0);
  CHECK(*m.mse == doctest::Approx(0.5));
  CHECK(m.reps_used == 2);
  CHECK(t.find("n_ext=100", "naive", 1) == &t.rows[0]);
  CHECK(t.find("n_ext=100", "naive", 0) == nullptr);
  CHECK_THROWS_AS(aggregate_metrics({}), EmptyInputError);
}

TEST_CASE("metrics agree with a streaming oracle") {
  Philox rng(2024);
  std::vector<simulation::ReplicationRow> rows;
  const std::vector<std::string> methods{"naive", "dr-glm", "covbal"};
  for (int i = 0; i < 1000; ++i) {
    auto r = row(methods[rng.below(3)], rng.normal() * 2.0 + 0.3, 0.1 + rng.uniform(), 0.5);
    r.subgroup = static_cast<int>(rng.below(2));
    r.truth = r.subgroup - 0.5;
    r.covered = r.ci_low <= r.truth && r.truth <= r.ci_high;
    rows.push_back(r);
  }
  // Welford updates per group
  struct Acc {
    double k = 0, mean = 0, m2 = 0, abs = 0, cover = 0, reject = 0;
  };
  std::map<std::pair<std::string, int>, Acc> acc;
  for (const auto& r : rows) {
    auto& a = acc[{r.method, r.subgroup}];
    a.k += 1;
    const double delta = r.estimate - a.mean;
    a.mean += delta / a.k;
    a.m2 += delta * (r.estimate - a.mean);
    a.abs += (std::abs(r.estimate - r.truth) - a.abs) / a.k;
    a.cover += ((r.covered ? 1.0 : 0.0) - a.cover) / a.k;
    a.reject += ((r.p_value < 0.05 ? 1.0 : 0.0) - a.reject) / a.k;
  }
  const auto t = aggregate_metrics(rows);
  CHECK(t.rows.size() == acc.size());
  for (const auto& m : t.rows) {
    const auto& a = acc.at({m.method, m.subgroup});
    const double var = a.m2 / (a.k - 1);
    CHECK(std::abs(*m.variance - var) <= 1e-12 * std::max(1.0, var));
    CHECK(std::abs(*m.mean_estimate - a.mean) <= 1e-12);
    CHECK(std::abs(*m.mean_abs_bias - a.abs) <= 1e-12);
    CHECK(std::abs(*m.coverage - a.cover) <= 1e-12);
    CHECK(std::abs(*m.power - a.reject) <= 1e-12);
    CHECK(std::abs(*m.mse - (var + (a.mean - m.truth) * (a.mean - m.truth))) <= 1e-12 * std::max(1.0, *m.mse));
  }
}

TEST_CASE("failed replications are excluded and an all-failed cell has no moments") {
  auto bad = row("riesz", 0.0, 1.0, 0.5);
  bad.failed = true;
  bad.error = "rank";
  const std::vector<simulation::ReplicationRow> rows{bad, bad, row("naive", 0.2, 1.0, 0.5), bad};
  const auto t = aggregate_metrics(rows);
  const auto* r = t.find("n_ext=100", "riesz", 1);
  REQUIRE(r != nullptr);
  CHECK(r->failures == 3);
  CHECK(r->reps_used == 0);
  CHECK_FALSE(r->power.has_value());
  CHECK_FALSE(r->variance.has_value());
  CHECK_FALSE(r->mean_abs_bias.has_value());
  const auto* n = t.find("n_ext=100", "naive", 1);
  CHECK(n->mean_abs_bias.has_value());
  CHECK_FALSE(n->variance.has_value());  // one replication
  CHECK(metrics_csv(t).find("NA") != std::string::npos);
  const auto j = json::parse(metrics_json(t));
  CHECK(validate_json(j, schema("metrics.schema.json")).empty());
  CHECK(j["rows"][0]["power"].is_null());
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(NAN) == "NA");
  CHECK(format_number(INFINITY) == "NA");
}

TEST_CASE("config validation") {
  const auto& s = schema("simulate.schema.json");
  CHECK(validate_json(json{{"scenario", 1}, {"methods", {"naive"}}}, s).empty());
  CHECK_FALSE(validate_json(json{{"methods", {"naive"}}}, s).empty());
  CHECK_FALSE(validate_json(json{{"scenario", 4}, {"methods", {"naive"}}}, s).empty());
  CHECK_FALSE(validate_json(json{{"scenario", 1}, {"methods", json::array()}}, s).empty());
  CHECK_FALSE(validate_json(json{{"scenario", 1}, {"methods", {"naive"}}, {"bogus", 1}}, s).empty());
  CHECK_FALSE(validate_json(json{{"scenario", 1}, {"methods", {"naive"}}, {"reps", 0}}, s).empty());
  CHECK_FALSE(
      validate_json(json{{"scenario", 1}, {"methods", {"naive"}}, {"estimators", {{"lambda", -1.0}}}}, s).empty());
  CHECK_FALSE(
      validate_json(json{{"scenario", 1}, {"methods", {"naive"}}, {"inference", {{"bootstrap_B", 1}}}}, s).empty());

  CHECK_THROWS_AS(simulate_plan(json{{"scenario", 1}, {"methods", {"magic"}}}), ConfigError);
  CHECK_THROWS_AS(simulate_plan(json{{"scenario", 1}, {"methods", {"dr-bart"}}}), OutOfScopeError);
  CHECK_THROWS_AS(simulate_plan(json{{"scenario", 2}, {"methods", {"naive"}}, {"n_ext", {100}}}), ConfigError);

  const auto plan = simulate_plan(json{{"scenario", 1}, {"methods", {"naive", "covbal"}}, {"seed", 3},
                                       {"n_ext", {100, 300}}, {"estimators", {{"lambda", 0.5}}},
                                       {"inference", {{"bootstrap_B", 40}}}},
                                  {std::nullopt, std::nullopt, 7});
  REQUIRE(plan.cells.size() == 2);
  CHECK(plan.cells[1].n_ext == 300);
  CHECK(plan.cells[0].reps == 7);
  CHECK(plan.cells[0].seed != plan.cells[1].seed);
  CHECK(plan.settings.lambda == 0.5);
  CHECK(plan.settings.bootstrap_B == 40);
  const auto s3 = simulate_plan(json{{"scenario", 3}, {"methods", {"naive"}}});
  CHECK(s3.cells.size() == 4);
  CHECK(s3.cells[3].cell() == "all-miss");
}

TEST_CASE("simulate command writes deterministic outputs") {
  const auto dir = scratch("simulate");
  write(dir / "cfg.json", R"({"scenario": 1, "methods": ["naive"], "reps": 5, "seed": 7, "out_dir": "run1"})");
  REQUIRE(run_cli("simulate --config \"" + (dir / "cfg.json").string() + "\"", dir / "log1") == 0);
  REQUIRE(run_cli("simulate --config \"" + (dir / "cfg.json").string() + "\" --out-dir \"" + (dir / "run2").string() +
                      "\"",
                  dir / "log2") == 0);
  for (const char* f : {"replications.csv", "metrics.csv", "metrics.json"}) {
    const auto a = slurp(dir / "run1" / f), b = slurp(dir / "run2" / f);
    CHECK_FALSE(a.empty());
    CHECK(a == b);
  }
  const auto reps = slurp(dir / "run1" / "replications.csv");
  CHECK(std::count(reps.begin(), reps.end(), '\n') == 1 + 2 * 9 * 5);
  CHECK(reps.rfind("scenario,cell,method,subgroup,replication,", 0) == 0);
  const auto metrics = json::parse(slurp(dir / "run1" / "metrics.json"));
  CHECK(metrics["rows"].size() == 18);
  CHECK(validate_json(metrics, schema("metrics.schema.json")).empty());

  REQUIRE(run_cli("simulate --config \"" + (dir / "cfg.json").string() + "\" --seed 8 --out-dir \"" +
                      (dir / "run3").string() + "\"",
                  dir / "log3") == 0);
  CHECK(slurp(dir / "run3" / "replications.csv") != reps);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exit");
  write(dir / "bad.json", R"({"scenario": 9, "methods": ["naive"]})");
  CHECK(run_cli("simulate --config \"" + (dir / "bad.json").string() + "\"", dir / "log") == 2);
  write(dir / "unknown.json", R"({"scenario": 1, "methods": ["nope"]})");
  CHECK(run_cli("simulate --config \"" + (dir / "unknown.json").string() + "\"", dir / "log") == 2);
  CHECK(slurp(dir / "log").find("naive") != std::string::npos);
  write(dir / "bart.json", R"({"scenario": 1, "methods": ["dr-bart"]})");
  CHECK(run_cli("simulate --config \"" + (dir / "bart.json").string() + "\"", dir / "log") == 2);
  write(dir / "broken.json", "{not json");
  CHECK(run_cli("simulate --config \"" + (dir / "broken.json").string() + "\"", dir / "log") == 2);
  CHECK(run_cli("simulate", dir / "log") == 2);
  CHECK(run_cli("frobnicate", dir / "log") == 2);
}

TEST_CASE("validate and analyze commands") {
  const auto dir = scratch("analyze");
  // all units in the trial: the external-data estimator reduces to the trial-only one
  Philox rng(12);
  std::string csv = "outcome,arm,src,group,age\n";
  for (int i = 0; i < 240; ++i) {
    const double age = rng.normal();
    const int a = rng.bernoulli(0.5), v = rng.bernoulli(0.5);
    const double y = age + a * (v - 0.5) + rng.normal();
    csv += format_number(y) + "," + std::to_string(a) + ",1," + (v ? "\"old\"" : "\"young\"") + "," +
           format_number(age) + "\n";
  }
  write(dir / "data.csv", csv);
  write(dir / "cols.json", R"({"outcome": "outcome", "treatment": "arm", "source": "src", "subgroup": "group"})");
  CHECK(run_cli("validate --data \"" + (dir / "data.csv").string() + "\" --schema \"" + (dir / "cols.json").string() +
                    "\"",
                dir / "vlog") == 0);
  write(dir / "bad.csv", "outcome,arm,src,group,age\n1,2,1,old,0\n");
  CHECK(run_cli("validate --data \"" + (dir / "bad.csv").string() + "\" --schema \"" + (dir / "cols.json").string() +
                    "\"",
                dir / "vlog") == 2);

  write(dir / "analyze.json",
        R"({"data": "data.csv", "schema": "cols.json", "methods": ["naive", "cov-adj", "dr-glm"], "output": "report.json"})");
  REQUIRE(run_cli("analyze --config \"" + (dir / "analyze.json").string() + "\"", dir / "alog") == 0);
  const auto report = json::parse(slurp(dir / "report.json"));
  CHECK(report["n"] == 240);
  CHECK(report["n_external"] == 0);
  CHECK(report["covariates"] == json{"age"});
  std::map<std::pair<std::string, std::string>, json> by;
  for (const auto& r : report["results"]) by[{r["method"], r["subgroup"]}] = r;
  for (const std::string g : {"old", "young"}) {
    const auto& cov = by.at({"cov-adj", g});
    const auto& dr = by.at({"dr-glm", g});
    CHECK(std::abs(cov["estimate"].get<double>() - dr["estimate"].get<double>()) < 1e-10);
    CHECK(by.at({"naive", g})["se_ratio"].get<double>() == doctest::Approx(1.0));
  }
}
