#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../oracles.hpp"
#include "dmlab/parallel.hpp"
#include "dmlab/runner.hpp"

using namespace dmlab;
using nlohmann::json;

namespace {

json gaussian_config() {
  return json::parse(R"({
    "experimentKind": "gaussianDM",
    "body": {"kind": "lp", "p": 2},
    "dimensionSchedule": [256],
    "dRule": {"kind": "fixed", "values": [16]},
    "trials": 3,
    "masterSeed": 11,
    "distortionMethod": {"sup": "exactSpectral", "inf": "exactSpectral"}
  })");
}

json cube_config() {
  return json::parse(R"({
    "experimentKind": "cubeCounterexample",
    "body": {"kind": "lp", "p": "inf"},
    "dimensionSchedule": [1024],
    "dRule": {"kind": "fixed", "values": [4, 16, 64]},
    "trials": 40,
    "masterSeed": 5
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("validation rejects bad configs before running") {
  auto bad = gaussian_config();
  bad["trials"] = 0;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = gaussian_config();
  bad["colour"] = "blue";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = gaussian_config();
  bad["body"]["radius"] = 2;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = gaussian_config();
  bad["body"]["p"] = "inf";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);  // exactSpectral needs p = 2

  bad = gaussian_config();
  bad["dimensionSchedule"] = json::array();
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = gaussian_config();
  bad["dRule"] = {{"kind", "fixed"}, {"values", {0}}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = gaussian_config();
  bad["distortionMethod"]["inf"] = "exactRowNorm";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  bad = gaussian_config();
  bad["distortionMethod"] = {{"sup", "netCertified"}, {"inf", "multiStartOpt"}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);  // no netRho

  bad = gaussian_config();
  bad["experimentKind"] = "productUniform";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);  // mRule missing

  bad = gaussian_config();
  bad["ensembles"] = {{"single", "Cauchy"}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  CHECK_NOTHROW(parse_config(gaussian_config()));
}

TEST_CASE("gaussian run produces one row per trial near the Bai-Yin ratio") {
  const auto res = run_experiment(parse_config(gaussian_config()));
  REQUIRE(res.records.size() == 3);
  for (const auto& r : res.records) {
    CHECK(r.error.empty());
    CHECK(r.ratio < oracle::bai_yin_ratio(256, 16) + 0.15);
    CHECK(r.ratio > 1.3);
    CHECK(r.ellK == doctest::Approx(oracle::gaussian_norm_mean(256)).epsilon(1e-12));
    CHECK(r.methodTags.find("sup=exactSpectral;inf=exactSpectral") != std::string::npos);
  }
  CHECK(res.summary["series"].size() == 1);
  CHECK(res.summary["series"][0]["trials"] == 3);
  CHECK(res.summary["configEcho"] == gaussian_config());
  for (const char* key : {"cSud", "C_chain", "concentration_c", "versions"}) CHECK(res.summary["calibration"].contains(key));
}

TEST_CASE("CSV round trip and summary self-consistency") {
  const auto res = run_experiment(parse_config(gaussian_config()));
  const auto back = parse_csv(res.csv);
  REQUIRE(back.size() == res.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].ratio == res.records[i].ratio);
    CHECK(back[i].seed == res.records[i].seed);
    CHECK(back[i].methodTags == res.records[i].methodTags);
  }
  CHECK(to_csv(back) == res.csv);
  CHECK_NOTHROW(verify_summary_against_csv(res.summary, res.csv));
  auto tampered = res.summary;
  tampered["series"][0]["medianRatio"] = 9.0;
  CHECK_THROWS_AS(verify_summary_against_csv(tampered, res.csv), ConfigError);
}

TEST_CASE("RFC-4180 quoting") {
  TrialRecord r;
  r.experimentId = "x";
  r.methodTags = "a,b";
  r.error = "said \"no\"\nthen stopped";
  const std::string csv = to_csv({r});
  const auto back = parse_csv(csv);
  REQUIRE(back.size() == 1);
  CHECK(back[0].methodTags == "a,b");
  CHECK(back[0].error == r.error);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("outputs are byte-identical across thread counts") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dmlab_runner_test";
  fs::remove_all(dir);
  auto cfg = parse_config(cube_config());
  RunOptions one, many;
  one.threads = 1;
  one.outDir = (dir / "one").string();
  many.threads = 8;
  many.outDir = (dir / "many").string();
  run_experiment(cfg, one);
  run_experiment(cfg, many);
  CHECK(slurp(dir / "one" / "trials.csv") == slurp(dir / "many" / "trials.csv"));
  CHECK(slurp(dir / "one" / "summary.json") == slurp(dir / "many" / "summary.json"));
  set_threads(max_threads());
  fs::remove_all(dir);
}

TEST_CASE("cube witness ratio scales like sqrt(d)") {
  const auto res = run_experiment(parse_config(cube_config()));
  const auto& series = res.summary["series"];
  REQUIRE(series.size() == 3);
  const double w4 = series[0]["medianWitnessRatio"], w16 = series[1]["medianWitnessRatio"],
               w64 = series[2]["medianWitnessRatio"];
  CHECK(w64 / w16 == doctest::Approx(2.0).epsilon(0.2));
  const std::string table = emit_plot_data(res.summary, PlotKind::ratioVsD);
  std::istringstream in(table);
  std::string line;
  std::getline(in, line);
  CHECK(line == "d,median,q25,q75");
  std::vector<double> xs, ys;
  while (std::getline(in, line)) {
    double d, med;
    std::sscanf(line.c_str(), "%lf,%lf", &d, &med);
    xs.push_back(std::log(d));
    ys.push_back(std::log(med));
  }
  REQUIRE(xs.size() == 3);
  const double mx = (xs[0] + xs[1] + xs[2]) / 3.0, my = (ys[0] + ys[1] + ys[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  CHECK(sxy / sxx == doctest::Approx(0.5).epsilon(0.2));
  (void)w4;
}

TEST_CASE("plot tables") {
  auto cfg = gaussian_config();
  cfg["dimensionSchedule"] = {256, 1024, 4096};
  cfg["trials"] = 1;
  const auto res = run_experiment(parse_config(cfg));
  const std::string t = emit_plot_data(res.summary, PlotKind::ratioVsN);
  CHECK(std::count(t.begin(), t.end(), '\n') == 4);
  CHECK_THROWS_AS(emit_plot_data(res.summary, PlotKind::tailCurve), ConfigError);
  CHECK_THROWS_AS(emit_plot_data(json::object(), PlotKind::ratioVsN), ConfigError);
  CHECK_THROWS_AS(plot_kind_from_string("pie"), ConfigError);
}

TEST_CASE("process sandbox emits a tail curve") {
  const auto cfg = parse_config(json::parse(R"({
    "experimentKind": "processSandbox",
    "dimensionSchedule": [32],
    "dRule": {"kind": "fixed", "values": [16]},
    "trials": 2,
    "masterSeed": 3,
    "constants": {"processTrials": 500}
  })"));
  const auto res = run_experiment(cfg);
  REQUIRE(res.summary.contains("tailCurve"));
  const std::string t = emit_plot_data(res.summary, PlotKind::tailCurve);
  CHECK(t.rfind("x,empirical,bound\n", 0) == 0);
  CHECK(std::count(t.begin(), t.end(), '\n') == 18);
  for (const auto& r : res.records) CHECK(r.infEst <= r.supEst);
}

TEST_CASE("event frequency experiment") {
  const auto cfg = parse_config(json::parse(R"({
    "experimentKind": "eventAFrequency",
    "dimensionSchedule": [16],
    "dRule": {"kind": "fixed", "values": [16]},
    "mRule": {"kind": "fixed", "value": 128},
    "trials": 4,
    "masterSeed": 9,
    "constants": {"kappa1": 2, "sparseRestarts": 5}
  })"));
  const auto res = run_experiment(cfg);
  REQUIRE(res.records.size() == 4);
  for (const auto& r : res.records) {
    CHECK(r.error.empty());
    CHECK(r.eventAHolds.has_value());
    CHECK(r.methodTags.find("sparse=greedy(5)") != std::string::npos);
  }
  CHECK(res.summary["series"][0]["eventAFrequency"].is_number());
}

TEST_CASE("per-trial failures become error rows") {
  const auto cfg = parse_config(json::parse(R"({
    "experimentKind": "gaussianDM",
    "body": {"kind": "lp", "p": 2},
    "dimensionSchedule": [64],
    "dRule": {"kind": "fixed", "values": [6]},
    "trials": 2,
    "masterSeed": 1,
    "distortionMethod": {"sup": "netCertified", "inf": "exactSpectral", "netRho": 0.3, "netBudget": 1, "netProbes": 500}
  })"));
  const auto res = run_experiment(cfg);
  CHECK(res.failures == 2);
  for (const auto& r : res.records) CHECK_FALSE(r.error.empty());
  CHECK(res.summary["series"][0]["failures"] == 2);
  CHECK(res.summary["series"][0]["medianRatio"].is_null());
}

TEST_CASE("dRule variants") {
  auto cfg = cube_config();
  cfg["dRule"] = {{"kind", "logN"}, {"c", 2.0}};
  cfg["trials"] = 1;
  auto res = run_experiment(parse_config(cfg));
  CHECK(res.records[0].d == static_cast<long long>(std::floor(2.0 * std::log(1024.0))));
  auto g = gaussian_config();
  g["dRule"] = {{"kind", "fractionOfDStar"}, {"c", 0.1}};
  g["trials"] = 1;
  res = run_experiment(parse_config(g));
  CHECK(res.records[0].d == static_cast<long long>(std::floor(0.1 * res.records[0].dStar)));
}

TEST_CASE("exceptions from parallel loops surface from the lowest index") {
  std::string caught;
  try {
    for_each_index(Exec::parallel, 100, [](std::size_t i) {
      if (i == 17 || i == 63) throw std::runtime_error(std::to_string(i));
    });
  } catch (const std::runtime_error& e) {
    caught = e.what();
  }
  CHECK(caught == "17");
}
