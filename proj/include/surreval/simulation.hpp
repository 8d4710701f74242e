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

// Synthetic worlds with known truth, brute-force oracle metrics, and the
// replication harness that reports Monte Carlo bias / SD / coverage.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surreval/crossfit.hpp"
#include "surreval/data.hpp"
#include "surreval/influence.hpp"

namespace surreval {

enum class DgpKind {
  sim61,       // bivariate normal covariates, logistic propensity, Bernoulli outcomes
  example1,    // observed S-Y correlation with opposite effects
  example2,    // potential-outcome correlation with opposite effects
  example3,    // sign-preserving effects with reversed rankings
  appendix_s1  // three-point optimal-transformation counterexample
};

const char* to_string(DgpKind kind);
DgpKind dgp_kind_from_string(const std::string& name);

struct DgpSpec {
  DgpKind kind = DgpKind::sim61;
  double alpha = 1.0;
  double beta = 1.0;
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument when parameters leave the kind's domain.
  void validate() const;
  std::size_t dims() const { return kind == DgpKind::sim61 ? 2 : 1; }
};

struct GeneratedData {
  ObservationTable table;  // carries both Y and S
  PotentialTable potentials;
};

GeneratedData gen_sim61(std::size_t n, std::uint64_t seed);
GeneratedData gen_example(const DgpSpec& spec);

// Closed-form conditional means under the DGP. mu_a(x) = E[Y | X = x, A = a]
// equals E[Y(a) | X = x] because assignment is unconfounded.
struct TrueNuisance {
  double e, mu0, mu1, mu_s0, mu_s1;
  double tau_y() const { return mu1 - mu0; }
  double tau_s() const { return mu_s1 - mu_s0; }
};

TrueNuisance true_nuisance(const DgpSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& x);

// Bundle of true nuisances on the rows of `table`, with policies cut at the
// supplied population thresholds.
NuisanceBundle oracle_bundle(const DgpSpec& spec, const ObservationTable& table, double lambda, double threshold_y,
                             double threshold_s);

struct OracleTruth {
  double lambda = 1.0;
  double regret = 0.0, gain = 0.0, efficiency = 0.0, ate = 0.0;
  double regret_se = 0.0, gain_se = 0.0, efficiency_se = 0.0, ate_se = 0.0;
  double mc_se = 0.0;  // largest of the per-metric Monte Carlo SEs
  double threshold_y = 0.0, threshold_s = 0.0;
  std::size_t draws = 0;
  bool exact = false;
  std::map<std::string, double> analytic;

  double value(Metric metric) const;
  double se(Metric metric) const;
};

inline constexpr std::size_t kMinOracleDraws = 1'000'000;
inline constexpr std::size_t kDefaultOracleDraws = 10'000'000;

// Monte Carlo (continuous covariates) or exact enumeration (appendix_s1) of
// R, G, V at each lambda. Quantiles come from the sampled CATE distribution.
// Draw counts below kMinOracleDraws are accepted but flagged by the caller.
std::vector<OracleTruth> oracle_truth(const DgpSpec& spec, std::span<const double> lambdas, std::size_t draws,
                                      std::uint64_t seed);
OracleTruth oracle_truth(const DgpSpec& spec, double lambda, std::size_t draws, std::uint64_t seed);

void to_json(nlohmann::json& j, const OracleTruth& truth);

// Exact facts about the three-point counterexample.
struct AppendixS1 {
  std::vector<double> x{-1.0, 0.0, 1.0};
  std::vector<double> s0{2, 3, 2}, s1{3, 2, 2}, y0{4, 3, 0}, y1{3, 4, 0};

  double outcome_itr_value() const;      // treat where tau_Y > 0
  double surrogate_itr_value() const;    // treat where tau_S > 0 (g(s) = s)
  double random_itr_value(double lambda) const;
};

// ---- replications ----

enum class Layout { single, split };
enum class CiKind { analytic, bootstrap };

const char* to_string(Layout layout);
const char* to_string(CiKind kind);

inline CrossfitConfig replication_crossfit_defaults() {
  CrossfitConfig c;
  c.folds = 2;
  return c;
}

struct ReplicationConfig {
  DgpSpec dgp;  // dgp.seed is the master seed
  std::vector<double> lambdas{0.1, 0.2, 0.3, 0.4};
  bool include_unconstrained = true;
  std::size_t reps = 1000;
  Layout layout = Layout::single;
  CrossfitConfig crossfit = replication_crossfit_defaults();
  CiKind ci = CiKind::analytic;
  std::size_t bootstrap_replicates = 500;
  bool oracle_nuisances = false;
  std::size_t oracle_draws = kDefaultOracleDraws;
  unsigned threads = 0;
};

struct ReplicationRow {
  Metric metric = Metric::regret;
  double lambda = 1.0;
  std::size_t n = 0, reps = 0, failures = 0;
  double truth = 0.0, truth_se = 0.0;
  double mean = 0.0, bias = 0.0, sd = 0.0, cp95 = 0.0, mean_se = 0.0;
};

struct ReplicationReport {
  std::vector<ReplicationRow> rows;
  std::uint64_t master_seed = 0;
  std::string config_hash;

  const ReplicationRow& row(Metric metric, double lambda) const;
};

// Canonical run configuration. The master seed, thread count and output
// paths are left out so the hash identifies the experiment, not the run.
nlohmann::json config_json(const ReplicationConfig& config);

ReplicationReport run_replications(const ReplicationConfig& config);

std::string report_csv(const ReplicationReport& report);
nlohmann::json report_json(const ReplicationReport& report);

// Parameters, analytic quantities, oracle values and policy agreement for one
// paradox configuration.
nlohmann::json paradox_summary(const DgpSpec& spec, double lambda, std::size_t draws);

std::string fnv1a_hex(const std::string& text);

}  // namespace surreval
