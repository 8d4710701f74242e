/*
 * Copyright 2026 The surreval Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// surreval command-line front end.
//
//   surreval estimate --input d1.csv [--input-surrogate d2.csv] --lambda 0.1,0.2
//   surreval simulate --dgp sim61 --n 1000 --reps 1000
//   surreval oracle   --dgp sim61 --lambda 0.2 --draws 10000000
//   surreval paradox  --dgp example1 --alpha 3
//
// Settings resolve as: command-line flag, then SURREVAL_<FLAG> environment
// variable, then the JSON file given by --config, then built-in defaults.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "surreval/crossfit.hpp"
#include "surreval/data.hpp"
#include "surreval/policy.hpp"
#include "surreval/rng.hpp"
#include "surreval/simulation.hpp"
#include "surreval/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace surreval;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kSchema = 3,
  kEstimation = 4,
  kIo = 5,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out;
  std::string format = "json";
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::vector<std::string> warnings;

  std::uint64_t resolved_seed = 0;
  std::string seed_source;
};

struct EstimateArgs {
  std::string input, input_surrogate, policy_out;
  std::vector<double> lambdas{0.1, 0.2, 0.3, 0.4, 1.0};
  std::vector<std::string> metrics{"R", "G", "V"};
  std::string nuisance = "logistic", propensity = "logistic", partition = "disjoint";
  std::optional<std::size_t> folds;
  std::size_t bootstrap = 0;
  double level = kDefaultLevel, clip = kDefaultPropensityClip, main_fraction = kDefaultMainFraction;
};

struct DgpArgs {
  std::string dgp = "sim61";
  double alpha = 1.0, beta = 1.0;
  std::size_t n = 1000;
};

struct SimulateArgs {
  DgpArgs dgp;
  std::vector<double> lambdas{0.1, 0.2, 0.3, 0.4};
  std::size_t reps = 1000, folds = 2, bootstrap = 500, draws = kDefaultOracleDraws;
  std::string nuisance = "logistic", layout = "single", ci = "analytic", partition = "disjoint";
  bool oracle_nuisances = false, no_unconstrained = false;
  double level = kDefaultLevel;
};

struct OracleArgs {
  DgpArgs dgp;
  std::vector<double> lambdas{0.1, 0.2, 0.3, 0.4, 1.0};
  std::size_t draws = kDefaultOracleDraws;
};

struct ParadoxArgs {
  DgpArgs dgp{"example1", 1.0, 1.0, 100000};
  double lambda = 1.0;
  std::size_t draws = kMinOracleDraws;
};

std::string env_name(const std::string& flag) {
  std::string name = "SURREVAL_";
  for (char c : flag) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

template <typename T>
CLI::Option* option(CLI::App* app, const std::string& flag, T& target, const std::string& help) {
  return app->add_option("--" + flag, target, help)->envname(env_name(flag));
}

void add_common(CLI::App* app, Common& c) {
  option(app, "out", c.out, "output file (default: stdout)");
  option(app, "format", c.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  option(app, "config", c.config, "JSON file with option defaults")->check(CLI::ExistingFile);
  option(app, "seed", c.seed, "master seed (default: fresh entropy, recorded in the output)");
  option(app, "threads", c.threads, "worker threads (0 = hardware concurrency)");
}

void add_dgp(CLI::App* app, DgpArgs& d) {
  option(app, "dgp", d.dgp, "sim61|example1|example2|example3|appendixS1")
      ->check(CLI::IsMember({"sim61", "example1", "example2", "example3", "appendixS1"}));
  option(app, "alpha", d.alpha, "alpha parameter of the paradox examples");
  option(app, "beta", d.beta, "beta parameter of the paradox examples");
  option(app, "n", d.n, "sample size");
}

std::string json_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

// Fills options not given on the command line or in the environment.
void apply_config_file(CLI::App* app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config " + path + ": top level must be an object");
  for (const auto& [raw_key, value] : j.items()) {
    std::string key = raw_key;
    for (char& c : key)
      if (c == '_') c = '-';
    CLI::Option* opt = key == "config" ? nullptr : app->get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError("config " + path + ": unknown key '" + raw_key + "'");
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(json_text(v));
    } else {
      opt->add_result(json_text(value));
    }
    opt->run_callback();
  }
}

void resolve_seed(Common& c) {
  if (c.seed) {
    c.resolved_seed = *c.seed;
    c.seed_source = "given";
    return;
  }
  std::random_device rd;
  c.resolved_seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  c.seed_source = "entropy";
  std::cerr << "surreval: no --seed given, using " << c.resolved_seed << "\n";
}

void check_lambdas(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw UsageError("--lambda needs at least one value");
  for (double l : lambdas)
    if (!(l > 0.0 && l <= 1.0)) throw UsageError("--lambda values must lie in (0, 1], got " + std::to_string(l));
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("--level must lie in (0, 1)");
}

RegressorKind regressor(const std::string& name, const char* flag) {
  try {
    return regressor_kind_from_string(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

NuisancePartition partition(const std::string& name) {
  if (name == "disjoint") return NuisancePartition::disjoint;
  if (name == "shared") return NuisancePartition::shared;
  throw UsageError("--partition must be disjoint or shared");
}

DgpSpec dgp_spec(const DgpArgs& d, std::uint64_t seed) {
  DgpSpec spec;
  spec.kind = dgp_kind_from_string(d.dgp);
  spec.alpha = d.alpha;
  spec.beta = d.beta;
  spec.n = d.n;
  spec.seed = seed;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return spec;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("cannot write to stdout");
    return;
  }
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot move output into " + path + ": " + ec.message());
  }
}

json envelope(const char* command, const Common& c, const json& config) {
  return json{{"tool", "surreval"},
              {"version", kVersion},
              {"command", command},
              {"seed", c.resolved_seed},
              {"seed_source", c.seed_source},
              {"config_hash", fnv1a_hex(config.dump())},
              {"config", config},
              {"warnings", c.warnings}};
}

std::string csv_preamble(const char* command, const Common& c, const json& config) {
  std::string s = "# surreval " + std::string(kVersion) + " command=" + command +
                  " seed=" + std::to_string(c.resolved_seed) + " config_hash=" + fnv1a_hex(config.dump()) + "\n";
  for (const auto& w : c.warnings) s += "# warning: " + w + "\n";
  return s;
}

// ---- estimate ----

ObservationTable load(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw IoError("cannot open input " + path);
  return read_csv(path);
}

int cmd_estimate(EstimateArgs& a, Common& c) {
  if (a.input.empty()) throw UsageError("estimate needs --input");
  check_lambdas(a.lambdas);
  check_level(a.level);
  std::vector<Metric> metrics;
  for (const auto& m : a.metrics) {
    try {
      metrics.push_back(metric_from_string(m));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--metric: ") + e.what());
    }
  }
  if (metrics.empty()) throw UsageError("--metric needs at least one value");
  if (a.bootstrap != 0 && a.bootstrap < kMinBootstrap)
    throw UsageError("--bootstrap needs 0 or at least " + std::to_string(kMinBootstrap) + " resamples");
  if (!(a.clip > 0.0 && a.clip < 0.5)) throw UsageError("--clip must lie in (0, 0.5)");
  if (!(a.main_fraction > 0.0 && a.main_fraction < 1.0)) throw UsageError("--main-fraction must lie in (0, 1)");

  const bool two_files = !a.input_surrogate.empty();
  CrossfitConfig cfg;
  cfg.outcome_kind = cfg.surrogate_kind = regressor(a.nuisance, "--nuisance");
  cfg.propensity_kind = regressor(a.propensity, "--propensity");
  cfg.partition = partition(a.partition);
  cfg.clip = a.clip;
  cfg.main_fraction = a.main_fraction;
  cfg.level = a.level;
  cfg.folds = a.folds.value_or(two_files ? 1 : kDefaultSingleDatasetFolds);
  if (!two_files && cfg.folds < 2) throw UsageError("a single input file needs --folds >= 2");
  if (two_files && cfg.folds == 0) throw UsageError("--folds must be 1 (single split) or at least 2");

  resolve_seed(c);
  cfg.seed = derive_seed(c.resolved_seed, 0);

  std::vector<ObservationTable> data;
  data.push_back(load(a.input));
  if (two_files) data.push_back(load(a.input_surrogate));

  json config{{"inputs", two_files ? json{a.input, a.input_surrogate} : json{a.input}},
              {"lambdas", a.lambdas},
              {"metrics", a.metrics},
              {"nuisance", a.nuisance},
              {"propensity", a.propensity},
              {"partition", a.partition},
              {"folds", cfg.folds},
              {"bootstrap", a.bootstrap},
              {"level", a.level},
              {"clip", a.clip},
              {"main_fraction", a.main_fraction}};

  const NuisanceFit fit = two_files ? fit_split(data[0], data[1], cfg) : fit_single(data[0], cfg);
  std::vector<MetricEstimate> estimates = evaluate(fit, a.lambdas, metrics, a.level);

  if (a.bootstrap > 0) {
    const auto boot = bootstrap_ci(data, crossfit_pipeline(a.lambdas, metrics, cfg), a.bootstrap, a.level,
                                   derive_seed(c.resolved_seed, 1), c.threads);
    for (std::size_t k = 0; k < estimates.size(); ++k) {
      estimates[k].bootstrap = BootstrapSummary{boot.se[k], boot.ci[k], boot.b_effective, boot.skipped};
    }
    if (boot.skipped > 0) c.warnings.push_back(std::to_string(boot.skipped) + " bootstrap resamples failed twice and were skipped");
  }

  if (!a.policy_out.empty()) {
    const NuisanceBundle b = bundle_at(fit, a.lambdas.front());
    BudgetPolicy policy;
    policy.lambda = a.lambdas.front();
    policy.assignments = b.pi_s;
    policy.threshold = fit.folds.size() == 1 ? b.threshold_s.front() : kNoBudgetCut;
    write_atomic(a.policy_out, policy_csv(fit.tau_s, policy));
  }

  std::string text;
  if (c.format == "json") {
    json j = envelope("estimate", c, config);
    j["n_eval"] = fit.eval.rows();
    j["estimates"] = estimates;
    text = j.dump(2) + "\n";
  } else {
    text = csv_preamble("estimate", c, config);
    text += "metric,lambda,estimate,se,ci_lo,ci_hi,level,n_main,boot_se,boot_lo,boot_hi,boot_b\n";
    for (const auto& e : estimates) {
      text += std::string(to_string(e.metric)) + "," + num(e.lambda) + "," + num(e.point) + "," + num(e.analytic_se) +
              "," + num(e.ci.lo) + "," + num(e.ci.hi) + "," + num(e.level) + "," + std::to_string(e.n_main) + ",";
      if (e.bootstrap) {
        text += num(e.bootstrap->se) + "," + num(e.bootstrap->ci.lo) + "," + num(e.bootstrap->ci.hi) + "," +
                std::to_string(e.bootstrap->b_effective) + "\n";
      } else {
        text += ",,,\n";
      }
    }
  }
  write_atomic(c.out, text);
  return kOk;
}

// ---- simulate ----

int cmd_simulate(SimulateArgs& a, Common& c) {
  if (a.reps < 2) throw UsageError("--reps must be at least 2");
  check_lambdas(a.lambdas);
  check_level(a.level);
  resolve_seed(c);
  ReplicationConfig cfg;
  cfg.dgp = dgp_spec(a.dgp, c.resolved_seed);
  cfg.lambdas = a.lambdas;
  cfg.include_unconstrained = !a.no_unconstrained;
  cfg.reps = a.reps;
  if (a.layout != "single" && a.layout != "split") throw UsageError("--layout must be single or split");
  cfg.layout = a.layout == "single" ? Layout::single : Layout::split;
  cfg.crossfit.folds = a.folds;
  if (cfg.layout == Layout::single && a.folds < 2) throw UsageError("the single layout needs --folds >= 2");
  cfg.crossfit.outcome_kind = cfg.crossfit.surrogate_kind = regressor(a.nuisance, "--nuisance");
  cfg.crossfit.partition = partition(a.partition);
  cfg.crossfit.level = a.level;
  if (a.ci != "analytic" && a.ci != "bootstrap") throw UsageError("--ci must be analytic or bootstrap");
  cfg.ci = a.ci == "analytic" ? CiKind::analytic : CiKind::bootstrap;
  if (cfg.ci == CiKind::bootstrap && a.bootstrap < kMinBootstrap)
    throw UsageError("--bootstrap needs at least " + std::to_string(kMinBootstrap) + " resamples");
  if (cfg.ci == CiKind::bootstrap && a.oracle_nuisances) throw UsageError("--ci bootstrap needs fitted nuisances");
  cfg.bootstrap_replicates = a.bootstrap;
  cfg.oracle_nuisances = a.oracle_nuisances;
  cfg.oracle_draws = a.draws;
  cfg.threads = c.threads;
  if (a.draws < kMinOracleDraws && cfg.dgp.kind != DgpKind::appendix_s1) {
    c.warnings.push_back("oracle truth uses only " + std::to_string(a.draws) + " draws; Monte Carlo error may dominate");
  }

  const json config = config_json(cfg);
  const ReplicationReport report = run_replications(cfg);
  std::string text;
  if (c.format == "json") {
    json j = envelope("simulate", c, config);
    j["rows"] = report_json(report)["rows"];
    text = j.dump(2) + "\n";
  } else {
    text = csv_preamble("simulate", c, config) + report_csv(report);
  }
  write_atomic(c.out, text);
  return kOk;
}

// ---- oracle ----

int cmd_oracle(OracleArgs& a, Common& c) {
  check_lambdas(a.lambdas);
  resolve_seed(c);
  const DgpSpec spec = dgp_spec(a.dgp, c.resolved_seed);
  const bool exact = spec.kind == DgpKind::appendix_s1;
  if (!exact && a.draws < 2) throw UsageError("--draws must be at least 2");
  if (!exact && a.draws < kMinOracleDraws) {
    c.warnings.push_back("only " + std::to_string(a.draws) + " draws; Monte Carlo error (mc_se) dominates");
  }
  json config{{"dgp", a.dgp.dgp}, {"alpha", a.dgp.alpha}, {"beta", a.dgp.beta}, {"lambdas", a.lambdas},
              {"draws", exact ? 3 : a.draws}};
  const auto truths = oracle_truth(spec, a.lambdas, a.draws, c.resolved_seed);
  for (const auto& w : c.warnings) std::cerr << "surreval: warning: " << w << "\n";
  std::string text;
  if (c.format == "json") {
    json j = envelope("oracle", c, config);
    j["truth"] = truths;
    text = j.dump(2) + "\n";
  } else {
    text = csv_preamble("oracle", c, config);
    text += "lambda,R,G,V,ate,R_mc_se,G_mc_se,V_mc_se,mc_se,threshold_y,threshold_s,draws,exact\n";
    for (const auto& t : truths) {
      text += num(t.lambda) + "," + num(t.regret) + "," + num(t.gain) + "," + num(t.efficiency) + "," + num(t.ate) +
              "," + num(t.regret_se) + "," + num(t.gain_se) + "," + num(t.efficiency_se) + "," + num(t.mc_se) + "," +
              num(t.threshold_y) + "," + num(t.threshold_s) + "," + std::to_string(t.draws) + "," +
              (t.exact ? "true" : "false") + "\n";
    }
  }
  write_atomic(c.out, text);
  return kOk;
}

// ---- paradox ----

int cmd_paradox(ParadoxArgs& a, Common& c) {
  if (a.dgp.dgp == "sim61") throw UsageError("paradox needs --dgp example1|example2|example3|appendixS1");
  check_lambdas({a.lambda});
  resolve_seed(c);
  const DgpSpec spec = dgp_spec(a.dgp, c.resolved_seed);
  json config{{"dgp", a.dgp.dgp}, {"alpha", a.dgp.alpha}, {"beta", a.dgp.beta}, {"n", a.dgp.n},
              {"lambda", a.lambda}, {"draws", a.draws}};
  if (a.draws < kMinOracleDraws && spec.kind != DgpKind::appendix_s1) {
    c.warnings.push_back("only " + std::to_string(a.draws) + " oracle draws");
  }
  const json summary = paradox_summary(spec, a.lambda, a.draws);
  std::string text;
  if (c.format == "json") {
    json j = envelope("paradox", c, config);
    j["summary"] = summary;
    text = j.dump(2) + "\n";
  } else {
    text = csv_preamble("paradox", c, config) + "key,value\n";
    const json flat = summary.flatten();
    for (const auto& [key, value] : flat.items()) text += key + "," + json_text(value) + "\n";
  }
  write_atomic(c.out, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surreval: doubly robust evaluation of surrogate endpoints for treatment rules"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;
  EstimateArgs est;
  SimulateArgs sim;
  OracleArgs orc;
  ParadoxArgs par;

  auto* e = app.add_subcommand("estimate", "estimate R, G and V from observed data");
  add_common(e, common);
  option(e, "input", est.input, "CSV with x1..xd, a, y (and s for the single-dataset layout)");
  option(e, "input-surrogate", est.input_surrogate, "CSV with x1..xd, a, s (two-dataset layout)");
  option(e, "lambda", est.lambdas, "budget list, comma separated")->delimiter(',');
  option(e, "metric", est.metrics, "metric list (R,G,V)")->delimiter(',');
  option(e, "nuisance", est.nuisance, "outcome and surrogate regressor (logistic|stumps|mean)");
  option(e, "propensity", est.propensity, "propensity model (logistic|mean)");
  option(e, "partition", est.partition, "single-dataset fold split (disjoint|shared)");
  option(e, "folds", est.folds, "cross-fitting folds (1 = single split, two files only)");
  option(e, "bootstrap", est.bootstrap, "bootstrap resamples (0 = analytic intervals only)");
  option(e, "level", est.level, "confidence level");
  option(e, "clip", est.clip, "propensity clipping bound");
  option(e, "main-fraction", est.main_fraction, "main-half share of the single split");
  option(e, "policy-out", est.policy_out, "write the surrogate rule at the first lambda to this CSV");

  auto* s = app.add_subcommand("simulate", "Monte Carlo replication study");
  add_common(s, common);
  add_dgp(s, sim.dgp);
  option(s, "lambda", sim.lambdas, "budget list, comma separated")->delimiter(',');
  option(s, "reps", sim.reps, "replications");
  option(s, "folds", sim.folds, "cross-fitting folds");
  option(s, "nuisance", sim.nuisance, "outcome and surrogate regressor (logistic|stumps|mean)");
  option(s, "layout", sim.layout, "single (one dataset) or split (two datasets)");
  option(s, "partition", sim.partition, "single-dataset fold split (disjoint|shared)");
  option(s, "ci", sim.ci, "analytic|bootstrap");
  option(s, "bootstrap", sim.bootstrap, "bootstrap resamples per replication");
  option(s, "draws", sim.draws, "oracle draws for the ground truth");
  option(s, "level", sim.level, "confidence level");
  s->add_flag("--oracle-nuisances", sim.oracle_nuisances, "plug in the true nuisances")
      ->envname(env_name("oracle-nuisances"));
  s->add_flag("--no-unconstrained", sim.no_unconstrained, "omit the unconstrained regret row")
      ->envname(env_name("no-unconstrained"));

  auto* o = app.add_subcommand("oracle", "brute-force ground truth");
  add_common(o, common);
  add_dgp(o, orc.dgp);
  option(o, "lambda", orc.lambdas, "budget list, comma separated")->delimiter(',');
  option(o, "draws", orc.draws, "Monte Carlo draws");

  auto* p = app.add_subcommand("paradox", "surrogate paradox demonstrations");
  add_common(p, common);
  add_dgp(p, par.dgp);
  p->get_option("--dgp")->default_str("example1");
  option(p, "lambda", par.lambda, "budget");
  option(p, "draws", par.draws, "oracle draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (!common.config.empty()) apply_config_file(active, common.config);
    if (active == e) return cmd_estimate(est, common);
    if (active == s) return cmd_simulate(sim, common);
    if (active == o) return cmd_oracle(orc, common);
    return cmd_paradox(par, common);
  } catch (const CLI::Error& err) {
    std::cerr << "surreval: invalid option: " << err.what() << "\n";
    return kUsage;
  } catch (const UsageError& err) {
    std::cerr << "surreval: " << err.what() << "\n";
    return kUsage;
  } catch (const DataError& err) {
    std::cerr << "surreval: schema error: " << err.what() << "\n";
    return kSchema;
  } catch (const EstimationError& err) {
    std::cerr << "surreval: estimation failed at stage '" << err.stage() << "': " << err.what() << "\n";
    return kEstimation;
  } catch (const FitError& err) {
    std::cerr << "surreval: estimation failed at stage 'nuisance': " << err.what() << "\n";
    return kEstimation;
  } catch (const IoError& err) {
    std::cerr << "surreval: " << err.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& err) {
    std::cerr << "surreval: " << err.what() << "\n";
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << "surreval: " << err.what() << "\n";
    return kFailure;
  }
}
