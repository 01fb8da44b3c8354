#include "dmlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "dmlab/bodies.hpp"
#include "dmlab/distortion.hpp"
#include "dmlab/ensembles.hpp"
#include "dmlab/events.hpp"
#include "dmlab/nets.hpp"
#include "dmlab/params.hpp"
#include "dmlab/parallel.hpp"
#include "dmlab/processes.hpp"
#include "dmlab/rng.hpp"

namespace dmlab {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw ConfigError(where + ": unknown field '" + key + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

double parse_p(const json& p) {
  if (p.is_string()) {
    if (p.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("body.p: expected a number or \"inf\"");
  }
  if (!p.is_number()) throw ConfigError("body.p: expected a number or \"inf\"");
  const double v = p.get<double>();
  if (!(v >= 1.0)) throw ConfigError("body.p must be >= 1");
  return v;
}

bool needs_body(ExperimentKind k) { return k != ExperimentKind::eventAFrequency && k != ExperimentKind::processSandbox; }
bool needs_m(ExperimentKind k) {
  return k == ExperimentKind::productUniform || k == ExperimentKind::productLogConcave ||
         k == ExperimentKind::productHeavyTailed || k == ExperimentKind::eventAFrequency;
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::gaussianDM, ExperimentKind::cubeCounterexample, ExperimentKind::productUniform,
                 ExperimentKind::productLogConcave, ExperimentKind::productHeavyTailed, ExperimentKind::eventAFrequency,
                 ExperimentKind::processSandbox})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experimentKind '" + s + "'");
}

struct EnsembleChoice {
  EnsembleKind single = EnsembleKind::GaussianIID;
  EnsembleKind row = EnsembleKind::UniformPM1;
  EnsembleKind col = EnsembleKind::UniformPM1;
};

EnsembleChoice ensemble_choice(const ExperimentConfig& c) {
  EnsembleChoice e;
  switch (c.experimentKind) {
    case ExperimentKind::cubeCounterexample: e.single = EnsembleKind::UniformPM1; break;
    case ExperimentKind::productLogConcave:
      e.row = EnsembleKind::UniformIsotropic;
      e.col = EnsembleKind::LogConcaveSimplex;
      break;
    case ExperimentKind::productHeavyTailed:
      e.row = EnsembleKind::UniformIsotropic;
      e.col = EnsembleKind::HeavyTailedBounded;
      break;
    case ExperimentKind::eventAFrequency: e.col = EnsembleKind::UniformIsotropic; break;
    default: break;
  }
  try {
    if (c.ensembles.contains("single")) e.single = ensemble_kind_from_string(c.ensembles.at("single"));
    if (c.ensembles.contains("row")) e.row = ensemble_kind_from_string(c.ensembles.at("row"));
    if (c.ensembles.contains("col")) e.col = ensemble_kind_from_string(c.ensembles.at("col"));
  } catch (const InvalidArgument& err) {
    throw ConfigError(std::string("ensembles: ") + err.what());
  } catch (const json::exception& err) {
    throw ConfigError(std::string("ensembles: ") + err.what());
  }
  return e;
}

WidthMethod width_method(const json& body, double p, std::uint64_t seed) {
  const std::string name = get_or<std::string>(body, "width", "");
  const auto trials = static_cast<std::size_t>(get_or<long long>(body, "widthTrials", 10000));
  if (name == "closedForm") return WidthMethod::closed_form();
  if (name == "quadrature") return WidthMethod::quadrature();
  if (name == "monteCarlo") return WidthMethod::monte_carlo(trials, seed);
  if (!name.empty()) throw ConfigError("body.width: unknown method '" + name + "'");
  if (p == 2.0 || p == 1.0) return WidthMethod::closed_form();
  if (std::isinf(p)) return WidthMethod::quadrature();
  return WidthMethod::monte_carlo(trials, seed);
}

struct Series {
  long long n = 0, d = 0, m = 0;
  BodyConstants constants;
  std::shared_ptr<ConvexBody> body;
  std::shared_ptr<SphereNet> net;
};

long long d_for(const ExperimentConfig& c, long long n, double dStar, std::vector<long long>& out) {
  const std::string kind = c.dRule.at("kind");
  if (kind == "fixed") {
    for (const auto& v : c.dRule.at("values")) out.push_back(v.get<long long>());
  } else if (kind == "fractionOfDStar") {
    out.push_back(std::max(1LL, static_cast<long long>(std::floor(c.dRule.at("c").get<double>() * dStar))));
  } else {
    out.push_back(std::max(1LL, static_cast<long long>(std::floor(c.dRule.at("c").get<double>() *
                                                                 std::log(static_cast<double>(n))))));
  }
  return static_cast<long long>(out.size());
}

long long m_for(const ExperimentConfig& c, long long n) {
  if (c.mRule.is_null()) return 0;
  const std::string kind = c.mRule.at("kind");
  if (kind == "fixed") return c.mRule.at("value").get<long long>();
  return static_cast<long long>(std::ceil(c.mRule.at("c").get<double>() * static_cast<double>(n)));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct SeriesStats {
  double medianRatio, q25, q75;
};

SeriesStats ratio_stats(const std::vector<double>& ratios) {
  if (ratios.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan};
  }
  return {quantile(ratios, 0.5), quantile(ratios, 0.25), quantile(ratios, 0.75)};
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan" || s == "NA") return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::gaussianDM: return "gaussianDM";
    case ExperimentKind::cubeCounterexample: return "cubeCounterexample";
    case ExperimentKind::productUniform: return "productUniform";
    case ExperimentKind::productLogConcave: return "productLogConcave";
    case ExperimentKind::productHeavyTailed: return "productHeavyTailed";
    case ExperimentKind::eventAFrequency: return "eventAFrequency";
    case ExperimentKind::processSandbox: return "processSandbox";
  }
  return "unknown";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi || values[lo] == values[hi]) return values[lo];
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ExperimentConfig parse_config(const json& j) {
  only_keys(j, "config",
            {"experimentKind", "body", "ensembles", "dimensionSchedule", "dRule", "mRule", "trials", "masterSeed",
             "distortionMethod", "outputPaths", "constants"});
  ExperimentConfig c;
  c.raw = j;
  try {
    c.experimentKind = experiment_kind_from_string(j.at("experimentKind").get<std::string>());
    c.dimensionSchedule = j.at("dimensionSchedule").get<std::vector<long long>>();
    c.dRule = j.at("dRule");
    c.trials = j.at("trials").get<long long>();
    c.masterSeed = j.at("masterSeed").get<std::uint64_t>();
    c.body = j.value("body", json());
    c.ensembles = j.value("ensembles", json::object());
    c.mRule = j.value("mRule", json());
    c.distortionMethod = j.value("distortionMethod", json());
    c.outputPaths = j.value("outputPaths", json::object());
    c.constants = j.value("constants", json::object());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.dimensionSchedule.empty()) throw ConfigError("dimensionSchedule must be nonempty");
  for (long long n : c.dimensionSchedule)
    if (n < 1) throw ConfigError("dimensionSchedule entries must be positive");

  only_keys(c.dRule, "dRule", {"kind", "values", "c"});
  const std::string dkind = get_or<std::string>(c.dRule, "kind", "");
  if (dkind == "fixed") {
    if (!c.dRule.contains("values") || !c.dRule["values"].is_array() || c.dRule["values"].empty())
      throw ConfigError("dRule fixed needs a nonempty 'values' array");
    for (const auto& v : c.dRule["values"])
      if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError("dRule values must be positive integers");
  } else if (dkind == "fractionOfDStar" || dkind == "logN") {
    if (!(get_or<double>(c.dRule, "c", 0.0) > 0.0)) throw ConfigError("dRule " + dkind + " needs c > 0");
  } else {
    throw ConfigError("dRule.kind must be fixed, fractionOfDStar or logN");
  }

  if (needs_m(c.experimentKind)) {
    if (c.mRule.is_null()) throw ConfigError("mRule is required for " + to_string(c.experimentKind));
    only_keys(c.mRule, "mRule", {"kind", "value", "c"});
    const std::string mkind = get_or<std::string>(c.mRule, "kind", "");
    if (mkind == "fixed") {
      if (get_or<long long>(c.mRule, "value", 0) < 1) throw ConfigError("mRule fixed needs value >= 1");
    } else if (mkind == "multipleOfN") {
      if (!(get_or<double>(c.mRule, "c", 0.0) > 0.0)) throw ConfigError("mRule multipleOfN needs c > 0");
    } else {
      throw ConfigError("mRule.kind must be fixed or multipleOfN");
    }
  } else if (!c.mRule.is_null()) {
    only_keys(c.mRule, "mRule", {"kind", "value", "c"});
  }

  only_keys(c.ensembles, "ensembles", {"single", "row", "col"});
  (void)ensemble_choice(c);
  only_keys(c.outputPaths, "outputPaths", {"csv", "summary"});
  only_keys(c.constants, "constants",
            {"kappa1", "delta", "theta", "rho", "q", "c0", "c1", "c2", "c3", "sparseRestarts", "processTrials"});

  double p = 2.0;
  if (needs_body(c.experimentKind)) {
    if (c.body.is_null()) throw ConfigError("body is required for " + to_string(c.experimentKind));
    only_keys(c.body, "body", {"kind", "p", "width", "widthTrials"});
    if (get_or<std::string>(c.body, "kind", "") != "lp") throw ConfigError("body.kind must be \"lp\"");
    if (!c.body.contains("p")) throw ConfigError("body.p is required");
    p = parse_p(c.body["p"]);
    const auto w = width_method(c.body, p, 0);
    if (w.kind == WidthMethod::Kind::closedForm && !(p == 1.0 || p == 2.0))
      throw ConfigError("body.width closedForm needs p = 1 or 2");
    if (w.kind == WidthMethod::Kind::quadrature && !std::isinf(p))
      throw ConfigError("body.width quadrature needs p = inf");
  } else if (!c.body.is_null()) {
    throw ConfigError("body is not used by " + to_string(c.experimentKind));
  }

  const bool distortion_optional = c.experimentKind == ExperimentKind::cubeCounterexample;
  const bool distortion_unused =
      c.experimentKind == ExperimentKind::eventAFrequency || c.experimentKind == ExperimentKind::processSandbox;
  if (distortion_unused && !c.distortionMethod.is_null())
    throw ConfigError("distortionMethod is not used by " + to_string(c.experimentKind));
  if (!distortion_unused && !c.distortionMethod.is_null()) {
    only_keys(c.distortionMethod, "distortionMethod",
              {"sup", "inf", "starts", "maxIterations", "netRho", "netBudget", "netProbes", "netRepairRounds"});
    Estimator sup, inf;
    try {
      sup = estimator_from_string(get_or<std::string>(c.distortionMethod, "sup", "multiStartOpt"));
      inf = estimator_from_string(get_or<std::string>(c.distortionMethod, "inf", "multiStartOpt"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("distortionMethod: ") + e.what());
    }
    if (inf == Estimator::exactRowNorm) throw ConfigError("distortionMethod.inf cannot be exactRowNorm");
    for (Estimator e : {sup, inf}) {
      if (e == Estimator::exactSpectral && p != 2.0) throw ConfigError("exactSpectral requires body p = 2");
      if (e == Estimator::exactRowNorm && !std::isinf(p)) throw ConfigError("exactRowNorm requires body p = inf");
      if (e == Estimator::netCertified) {
        const double rho = get_or<double>(c.distortionMethod, "netRho", 0.0);
        if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("netCertified requires 0 < netRho < 1");
      }
    }
    if (get_or<long long>(c.distortionMethod, "starts", 64) < 0) throw ConfigError("starts must be >= 0");
  } else if (!distortion_unused && !distortion_optional) {
    throw ConfigError("distortionMethod is required for " + to_string(c.experimentKind));
  }

  if (c.experimentKind == ExperimentKind::eventAFrequency) {
    const double kappa1 = get_or<double>(c.constants, "kappa1", 2.0);
    if (!(kappa1 >= 1.0)) throw ConfigError("constants.kappa1 must be >= 1");
    const double rho = get_or<double>(c.constants, "rho", kOpenIntervalClamp);
    const double q = get_or<double>(c.constants, "q", 6.0);
    if (!(rho > 0.0 && rho < 0.25)) throw ConfigError("constants.rho must lie in (0, 1/4)");
    if (!(q > 2.0)) throw ConfigError("constants.q must exceed 2");
    for (const char* key : {"delta", "theta"})
      if (c.constants.contains(key)) {
        const double v = get_or<double>(c.constants, key, 0.0);
        if (!(v > 0.0 && v < 0.25)) throw ConfigError(std::string("constants.") + key + " must lie in (0, 1/4)");
      }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

std::string csv_header() {
  return "experimentId,n,d,m,seed,trialIndex,supEst,infEst,ratio,ellK,dStar,eventAHolds,witnessRatio,elapsedMs,"
         "methodTags,error";
}

std::string to_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << csv_header() << "\r\n";
  for (const auto& r : records) {
    os << csv_field(r.experimentId) << ',' << r.n << ',' << r.d << ',' << r.m << ',' << r.seed << ',' << r.trialIndex
       << ',' << format_double(r.supEst) << ',' << format_double(r.infEst) << ',' << format_double(r.ratio) << ','
       << format_double(r.ellK) << ',' << format_double(r.dStar) << ','
       << (r.eventAHolds ? (*r.eventAHolds ? "true" : "false") : "NA") << ','
       << (r.witnessRatio ? format_double(*r.witnessRatio) : "NA") << ','
       << (r.elapsedMs ? format_double(*r.elapsedMs) : "NA") << ',' << csv_field(r.methodTags) << ','
       << csv_field(r.error) << "\r\n";
  }
  return os.str();
}

std::vector<TrialRecord> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      row.push_back(field);
      field.clear();
      field_started = false;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(field);
      rows.push_back(row);
      row.clear();
      field.clear();
      field_started = false;
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (field_started || !row.empty()) {
    row.push_back(field);
    rows.push_back(row);
  }
  if (rows.empty()) throw ConfigError("csv: empty input");
  std::ostringstream header;
  for (std::size_t k = 0; k < rows[0].size(); ++k) header << (k ? "," : "") << rows[0][k];
  if (header.str() != csv_header()) throw ConfigError("csv: unexpected header");

  std::vector<TrialRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != 16) throw ConfigError("csv: row " + std::to_string(r) + " has " + std::to_string(f.size()) + " fields");
    TrialRecord t;
    t.experimentId = f[0];
    t.n = std::stoll(f[1]);
    t.d = std::stoll(f[2]);
    t.m = std::stoll(f[3]);
    t.seed = std::stoull(f[4]);
    t.trialIndex = std::stoll(f[5]);
    t.supEst = parse_double(f[6]);
    t.infEst = parse_double(f[7]);
    t.ratio = parse_double(f[8]);
    t.ellK = parse_double(f[9]);
    t.dStar = parse_double(f[10]);
    if (f[11] != "NA") t.eventAHolds = f[11] == "true";
    if (f[12] != "NA") t.witnessRatio = parse_double(f[12]);
    if (f[13] != "NA") t.elapsedMs = parse_double(f[13]);
    t.methodTags = f[14];
    t.error = f[15];
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

json series_summary(const Series& s, const std::vector<const TrialRecord*>& recs) {
  std::vector<double> ratios, sups, infs, witness;
  std::size_t failures = 0, events = 0, holds = 0;
  for (const auto* r : recs) {
    if (!r->error.empty()) {
      ++failures;
      continue;
    }
    ratios.push_back(r->ratio);
    sups.push_back(r->supEst);
    infs.push_back(r->infEst);
    if (r->witnessRatio) witness.push_back(*r->witnessRatio);
    if (r->eventAHolds) {
      ++events;
      holds += *r->eventAHolds ? 1 : 0;
    }
  }
  const SeriesStats st = ratio_stats(ratios);
  json j;
  j["n"] = s.n;
  j["d"] = s.d;
  j["m"] = s.m;
  j["medianRatio"] = finite_or_null(st.medianRatio);
  j["q25"] = finite_or_null(st.q25);
  j["q75"] = finite_or_null(st.q75);
  j["eventAFrequency"] = events ? json(static_cast<double>(holds) / static_cast<double>(events)) : json(nullptr);
  j["trials"] = ratios.size();
  j["failures"] = failures;
  j["medianSup"] = sups.empty() ? json(nullptr) : finite_or_null(quantile(sups, 0.5));
  j["medianInf"] = infs.empty() ? json(nullptr) : finite_or_null(quantile(infs, 0.5));
  j["medianWitnessRatio"] = witness.empty() ? json(nullptr) : finite_or_null(quantile(witness, 0.5));
  j["ellK"] = finite_or_null(s.constants.ellK);
  j["dStar"] = finite_or_null(s.constants.dStar);
  return j;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (options.threads > 0) set_threads(options.threads);
  const ExperimentKind kind = config.experimentKind;
  const EnsembleChoice ens = ensemble_choice(config);
  const Calibration& cal = options.calibration;

  // Series setup (deterministic, serial).
  std::vector<Series> series;
  double p = 2.0;
  if (needs_body(kind)) p = parse_p(config.body.at("p"));
  for (long long n : config.dimensionSchedule) {
    Series base;
    base.n = n;
    if (needs_body(kind)) {
      base.body = std::make_shared<ConvexBody>(ConvexBody::lp_ball(p, n));
      const auto wm = width_method(config.body, p, mix_seed(config.masterSeed, 0x77696474ULL + static_cast<std::uint64_t>(n)));
      base.constants = critical_dimension(*base.body, wm, Exec::serial);
    }
    std::vector<long long> ds;
    d_for(config, n, base.constants.dStar, ds);
    for (long long d : ds) {
      Series s = base;
      s.d = d;
      s.m = m_for(config, n);
      series.push_back(s);
    }
  }

  DistortionRequest proto;
  const bool has_distortion = !config.distortionMethod.is_null();
  if (has_distortion) {
    proto.sup = estimator_from_string(get_or<std::string>(config.distortionMethod, "sup", "multiStartOpt"));
    proto.inf = estimator_from_string(get_or<std::string>(config.distortionMethod, "inf", "multiStartOpt"));
    proto.starts = static_cast<int>(get_or<long long>(config.distortionMethod, "starts", 64));
    proto.maxIterations = static_cast<int>(get_or<long long>(config.distortionMethod, "maxIterations", 500));
    if (proto.sup == Estimator::netCertified || proto.inf == Estimator::netCertified) {
      const double rho = config.distortionMethod.at("netRho").get<double>();
      const auto budget = static_cast<std::size_t>(get_or<long long>(config.distortionMethod, "netBudget", 200000));
      const auto probes = static_cast<std::size_t>(get_or<long long>(config.distortionMethod, "netProbes", 20000));
      const auto repairs = static_cast<std::size_t>(get_or<long long>(config.distortionMethod, "netRepairRounds", 0));
      std::map<long long, std::shared_ptr<SphereNet>> nets;
      for (auto& s : series) {
        auto& slot = nets[s.d];
        if (!slot)
          slot = std::make_shared<SphereNet>(build_sphere_net(
              s.d, rho, budget, mix_seed(config.masterSeed, 0x6e6574ULL + static_cast<std::uint64_t>(s.d)), probes,
              Exec::parallel, repairs));
        s.net = slot;
      }
    }
  }

  const auto trials = static_cast<std::size_t>(config.trials);
  const std::size_t total = series.size() * trials;
  const std::string experimentId = to_string(kind);

  auto run_trial = [&](std::size_t flat) {
    const Series& s = series[flat / trials];
    TrialRecord r;
    r.experimentId = experimentId;
    r.n = s.n;
    r.d = s.d;
    r.m = s.m;
    r.trialIndex = static_cast<long long>(flat);
    r.seed = mix_seed(config.masterSeed, flat);
    r.ellK = s.constants.ellK;
    r.dStar = s.constants.dStar;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto distortion = [&](const Matrix& gamma) {
        DistortionRequest req = proto;
        req.net = s.net.get();
        req.seed = mix_seed(r.seed, 2);
        const auto rep = measure_distortion(*s.body, gamma, req, s.constants.ellK, Exec::serial);
        r.supEst = rep.supEst;
        r.infEst = rep.infEst;
        r.ratio = rep.ratio;
        r.methodTags = rep.methodTags();
      };
      switch (kind) {
        case ExperimentKind::gaussianDM: {
          EnsembleSpec spec{ens.single, s.n, s.d, std::nullopt, VectorLayout::rows};
          distortion(sample_matrix(spec, mix_seed(r.seed, 1)));
          r.methodTags = "ensemble=" + to_string(ens.single) + ";" + r.methodTags;
          break;
        }
        case ExperimentKind::cubeCounterexample: {
          EnsembleSpec spec{ens.single, s.n, s.d, std::nullopt, VectorLayout::rows};
          const Matrix mtx = sample_matrix(spec, mix_seed(r.seed, 1));
          const CubeWitness w = adversarial_linf_witness(mtx);
          r.witnessRatio = w.ratio;
          if (has_distortion) {
            distortion(mtx);
          } else {
            r.supEst = w.phiWitness;
            r.infEst = w.phiE1;
            r.ratio = w.ratio;
            r.methodTags = "sup=adversarialWitness;inf=e1";
          }
          r.methodTags = "ensemble=" + to_string(ens.single) + ";" + r.methodTags;
          break;
        }
        case ExperimentKind::productUniform:
        case ExperimentKind::productLogConcave:
        case ExperimentKind::productHeavyTailed: {
          ProductEnsembleSpec spec;
          spec.rowSpec = {ens.row, s.m, s.n, std::nullopt, VectorLayout::rows};
          spec.colSpec = {ens.col, s.d, s.m, std::nullopt, VectorLayout::columns};
          spec.m = s.m;
          distortion(sample_product_operator(spec, mix_seed(r.seed, 1)));
          r.methodTags = "ensemble=" + to_string(ens.row) + "x" + to_string(ens.col) + ";" + r.methodTags;
          break;
        }
        case ExperimentKind::eventAFrequency: {
          const double kappa1 = get_or<double>(config.constants, "kappa1", 2.0);
          double delta = get_or<double>(config.constants, "delta", 0.0);
          double theta = get_or<double>(config.constants, "theta", 0.0);
          if (delta == 0.0 || theta == 0.0) {  // Euclidean body: dStar = n
            ParameterConstants pc;
            pc.c0 = get_or<double>(config.constants, "c0", 1.0);
            pc.c1 = get_or<double>(config.constants, "c1", 1.0);
            pc.c2 = get_or<double>(config.constants, "c2", 1.0);
            pc.c3 = get_or<double>(config.constants, "c3", 1.0);
            const auto sol = solve_parameters(get_or<double>(config.constants, "rho", kOpenIntervalClamp),
                                              get_or<double>(config.constants, "q", 6.0), static_cast<double>(s.n), s.n, pc);
            if (delta == 0.0) delta = sol.delta;
            if (theta == 0.0) theta = sol.theta;
          }
          const int restarts = static_cast<int>(get_or<long long>(config.constants, "sparseRestarts", 20));
          EnsembleSpec spec{ens.col, s.d, s.m, std::nullopt, VectorLayout::columns};
          const Matrix g2 = sample_matrix(spec, mix_seed(r.seed, 1));
          const EventReport ev =
              check_event_A(g2, kappa1, delta, theta, SparseMethod::greedy(restarts), mix_seed(r.seed, 3), Exec::serial);
          r.eventAHolds = ev.eventAHolds;
          r.supEst = ev.lambdaMax;
          r.infEst = ev.lambdaMin;
          r.ratio = ev.lambdaMin > 0.0 ? ev.lambdaMax / ev.lambdaMin : std::numeric_limits<double>::infinity();
          const auto& entry = ev.sparseSup.at(ev.kEvent);
          r.witnessRatio = entry.value / std::sqrt(static_cast<double>(s.m));
          r.methodTags = "ensemble=" + to_string(ens.col) + ";sup=powerIteration;inf=" +
                         std::string(std::min(s.d, s.m) <= kFullDecompositionDim ? "fullSVD" : "shiftedPower") +
                         ";sparse=" + to_string(entry.method) + "(" + std::to_string(restarts) + ");k=" +
                         std::to_string(ev.kEvent);
          break;
        }
        case ExperimentKind::processSandbox: {
          EnsembleSpec spec{EnsembleKind::GaussianIID, s.n, s.d, std::nullopt, VectorLayout::rows};
          const FiniteIndexSet set(sample_matrix(spec, mix_seed(r.seed, 1)));
          const auto ptrials = static_cast<std::size_t>(get_or<long long>(config.constants, "processTrials", 2000));
          const auto g = emp_sup(ProcessKind::gaussian, set, SupMethod::monte_carlo(ptrials), mix_seed(r.seed, 2),
                                 Exec::serial);
          r.supEst = gamma2_upper(set).value;
          r.infEst = sudakov_lower(set, cal.cSud);
          r.ratio = r.infEst > 0.0 ? r.supEst / r.infEst : std::numeric_limits<double>::infinity();
          r.ellK = g.value;
          const double radius = set.vectors.rowwise().norm().maxCoeff();
          r.dStar = radius > 0.0 ? (g.value / radius) * (g.value / radius) : 0.0;
          r.witnessRatio = bernoulli_gaussian_ratio(set, ptrials, mix_seed(r.seed, 2), Exec::serial);
          r.methodTags = "sup=gamma2Upper;inf=sudakovLower(cSud=" + format_double(cal.cSud) +
                         ");ellK=empSupGaussian(" + std::to_string(ptrials) + ");witness=bernoulliGaussianRatio";
          break;
        }
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    if (options.recordTiming)
      r.elapsedMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };

  RunResult result;
  result.records = map_indices<TrialRecord>(Exec::parallel, total, run_trial);
  for (const auto& r : result.records)
    if (!r.error.empty()) ++result.failures;
  result.csv = to_csv(result.records);

  json summary;
  summary["configEcho"] = config.raw;
  summary["series"] = json::array();
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::vector<const TrialRecord*> recs;
    for (std::size_t t = 0; t < trials; ++t) recs.push_back(&result.records[k * trials + t]);
    summary["series"].push_back(series_summary(series[k], recs));
  }
  if (kind == ExperimentKind::processSandbox && !series.empty()) {
    EnsembleSpec spec{EnsembleKind::GaussianIID, series[0].n, series[0].d, std::nullopt, VectorLayout::rows};
    const FiniteIndexSet set(sample_matrix(spec, mix_seed(mix_seed(config.masterSeed, 0), 1)));
    const auto table = concentration_check(set, 10000, mix_seed(config.masterSeed, 0x7461696cULL), cal.concentration_c,
                                           Exec::parallel);
    json curve = json::array();
    for (const auto& row : table.rows) curve.push_back({{"x", row.x}, {"empirical", row.empirical}, {"bound", row.bound}});
    summary["tailCurve"] = curve;
  }
  summary["calibration"] = {{"cSud", cal.cSud},
                            {"C_chain", cal.C_chain},
                            {"concentration_c", cal.concentration_c},
                            {"versions", {{"calibration", cal.version}, {"dmlab", kVersion}}}};
  result.summary = summary;

  if (!options.outDir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(options.outDir);
    const std::string csv_name = get_or<std::string>(config.outputPaths, "csv", "trials.csv");
    const std::string summary_name = get_or<std::string>(config.outputPaths, "summary", "summary.json");
    std::ofstream(fs::path(options.outDir) / csv_name, std::ios::binary) << result.csv;
    std::ofstream(fs::path(options.outDir) / summary_name, std::ios::binary) << summary.dump(2) << "\n";
  }
  return result;
}

void verify_summary_against_csv(const json& summary, const std::string& csv) {
  const auto records = parse_csv(csv);
  std::map<std::tuple<long long, long long, long long>, std::vector<double>> ratios;
  for (const auto& r : records)
    if (r.error.empty()) ratios[{r.n, r.d, r.m}].push_back(r.ratio);
  auto same = [](const json& stored, double recomputed) {
    if (stored.is_null()) return !std::isfinite(recomputed);
    return stored.get<double>() == recomputed;
  };
  for (const auto& s : summary.at("series")) {
    const auto key = std::make_tuple(s.at("n").get<long long>(), s.at("d").get<long long>(), s.at("m").get<long long>());
    const auto it = ratios.find(key);
    const std::vector<double> values = it == ratios.end() ? std::vector<double>{} : it->second;
    const SeriesStats st = ratio_stats(values);
    const std::string where = "series n=" + std::to_string(std::get<0>(key)) + " d=" + std::to_string(std::get<1>(key));
    if (!same(s.at("medianRatio"), st.medianRatio)) throw ConfigError(where + ": medianRatio does not match the CSV");
    if (!same(s.at("q25"), st.q25)) throw ConfigError(where + ": q25 does not match the CSV");
    if (!same(s.at("q75"), st.q75)) throw ConfigError(where + ": q75 does not match the CSV");
  }
}

PlotKind plot_kind_from_string(const std::string& name) {
  if (name == "ratioVsN") return PlotKind::ratioVsN;
  if (name == "ratioVsD") return PlotKind::ratioVsD;
  if (name == "tailCurve") return PlotKind::tailCurve;
  throw ConfigError("unknown plot kind '" + name + "'");
}

std::string emit_plot_data(const json& summary, PlotKind kind) {
  std::ostringstream os;
  auto num = [](const json& v) { return v.is_null() ? std::string("nan") : format_double(v.get<double>()); };
  if (kind == PlotKind::tailCurve) {
    if (!summary.contains("tailCurve")) throw ConfigError("summary has no 'tailCurve' series");
    os << "x,empirical,bound\n";
    for (const auto& row : summary["tailCurve"])
      os << num(row.at("x")) << ',' << num(row.at("empirical")) << ',' << num(row.at("bound")) << '\n';
    return os.str();
  }
  if (!summary.contains("series") || summary["series"].empty()) throw ConfigError("summary has no 'series' entries");
  const char* axis = kind == PlotKind::ratioVsN ? "n" : "d";
  std::vector<json> rows(summary["series"].begin(), summary["series"].end());
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const json& a, const json& b) { return a.at(axis).get<long long>() < b.at(axis).get<long long>(); });
  os << axis << ",median,q25,q75\n";
  for (const auto& s : rows)
    os << s.at(axis).get<long long>() << ',' << num(s.at("medianRatio")) << ',' << num(s.at("q25")) << ','
       << num(s.at("q75")) << '\n';
  return os.str();
}

}  // namespace dmlab
