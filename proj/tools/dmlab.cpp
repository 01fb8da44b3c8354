// dmlab: run experiments, emit plot tables, and print ensemble diagnostics.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "dmlab/ensembles.hpp"
#include "dmlab/parallel.hpp"
#include "dmlab/runner.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitPartial = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dmlab::ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw dmlab::ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_or_print(const std::string& outDir, const std::string& name, const std::string& text) {
  if (outDir.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(outDir);
  std::ofstream(fs::path(outDir) / name, std::ios::binary) << text;
  std::cerr << "wrote " << (fs::path(outDir) / name).string() << "\n";
}

int cmd_run(const std::string& configPath, std::optional<std::uint64_t> seed, int threads, std::string outDir) {
  json raw = read_json(configPath);
  if (seed) raw["masterSeed"] = *seed;
  const auto config = dmlab::parse_config(raw);
  dmlab::RunOptions options;
  options.threads = threads;
  options.outDir = outDir.empty() ? "." : outDir;
  const auto result = dmlab::run_experiment(config, options);
  for (const auto& s : result.summary["series"]) {
    std::cout << "n=" << s["n"] << " d=" << s["d"] << " m=" << s["m"] << " medianRatio=" << s["medianRatio"]
              << " q25=" << s["q25"] << " q75=" << s["q75"] << " trials=" << s["trials"]
              << " failures=" << s["failures"];
    if (!s["eventAFrequency"].is_null()) std::cout << " eventAFrequency=" << s["eventAFrequency"];
    std::cout << "\n";
  }
  if (result.failures > 0) {
    std::cerr << result.failures << " trial(s) failed; see the error column\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_plot(const std::string& summaryPath, const std::string& kindName, const std::string& outDir) {
  const json summary = read_json(summaryPath);
  const auto kind = dmlab::plot_kind_from_string(kindName);
  std::string csvName = "trials.csv";
  if (summary.contains("configEcho") && summary["configEcho"].contains("outputPaths") &&
      summary["configEcho"]["outputPaths"].contains("csv"))
    csvName = summary["configEcho"]["outputPaths"]["csv"].get<std::string>();
  const fs::path csvPath = fs::path(summaryPath).parent_path() / csvName;
  if (fs::exists(csvPath)) dmlab::verify_summary_against_csv(summary, slurp(csvPath.string()));
  write_or_print(outDir, "plot_" + kindName + ".csv", dmlab::emit_plot_data(summary, kind));
  return kExitOk;
}

int cmd_diag(const std::string& path, std::optional<std::uint64_t> seed, const std::string& outDir) {
  const json j = read_json(path);
  for (const auto& [key, value] : j.items())
    if (key != "kind" && key != "dim" && key != "trials" && key != "probes" && key != "seed" && key != "q")
      throw dmlab::ConfigError("ensemble descriptor: unknown field '" + key + "'");
  dmlab::EnsembleSpec spec;
  dmlab::DiagnosticsOptions options;
  std::size_t trials = 0, probes = 0;
  std::uint64_t s = 0;
  try {
    spec.kind = dmlab::ensemble_kind_from_string(j.at("kind").get<std::string>());
    spec.rows = j.at("dim").get<long long>();
    spec.cols = 1;
    spec.layout = dmlab::VectorLayout::columns;
    trials = j.value("trials", 20000);
    probes = j.value("probes", 8);
    s = seed ? *seed : j.value("seed", std::uint64_t{0});
    options.q = j.value("q", options.q);
  } catch (const json::exception& e) {
    throw dmlab::ConfigError(std::string("ensemble descriptor: ") + e.what());
  } catch (const dmlab::InvalidArgument& e) {
    throw dmlab::ConfigError(std::string("ensemble descriptor: ") + e.what());
  }
  if (spec.rows < 1) throw dmlab::ConfigError("ensemble descriptor: dim must be >= 1");
  if (trials < 1000) throw dmlab::ConfigError("ensemble descriptor: trials must be >= 1000");
  const auto d = dmlab::marginal_diagnostics(spec, probes, trials, s, options);
  json out;
  out["kind"] = dmlab::to_string(spec.kind);
  out["dim"] = d.dim;
  out["trials"] = d.trials;
  out["probes"] = d.probes;
  out["seed"] = s;
  out["isotropyError"] = d.isotropyError;
  out["maxMarginalMeanZ"] = d.maxMarginalMean;
  out["probedP"] = d.probedP;
  out["psi2Estimate"] = d.psi2Estimate;
  out["q"] = d.q;
  out["lqL2Ratio"] = d.lqL2Ratio;
  json table = json::array();
  for (const auto& [kappa, prob] : d.smallBallTable) table.push_back({{"kappa", kappa}, {"probability", prob}});
  out["smallBallTable"] = table;
  json tail = json::array();
  for (const auto& [u, prob] : d.normTail) tail.push_back({{"u", u}, {"probability", prob}});
  out["normTail"] = tail;
  out["paourisC1"] = d.paourisC1;
  write_or_print(outDir, "diag.json", out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dmlab: random embeddings of normed spaces, experiment runner"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string outDir;
  app.add_option("--seed", seed, "override the master seed");
  app.add_option("--threads", threads, "worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  app.add_option("--out-dir", outDir, "directory for output files");

  std::string configPath, summaryPath, plotKind, ensemblePath;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", configPath)->required();
  auto* plot = app.add_subcommand("plot", "emit a plot table from a summary");
  plot->add_option("summary", summaryPath)->required();
  plot->add_option("--kind", plotKind, "ratioVsN | ratioVsD | tailCurve")->required();
  auto* diag = app.add_subcommand("diag", "marginal diagnostics for an ensemble descriptor");
  diag->add_option("ensemble", ensemblePath)->required();
  for (auto* sub : {run, plot, diag}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (threads > 0) dmlab::set_threads(threads);
    if (*run) return cmd_run(configPath, seed, threads, outDir);
    if (*plot) return cmd_plot(summaryPath, plotKind, outDir);
    return cmd_diag(ensemblePath, seed, outDir);
  } catch (const dmlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const dmlab::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
