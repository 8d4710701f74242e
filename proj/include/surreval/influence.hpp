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

// Influence functions for surrogate regret, gain and efficiency, and the
// sample-mean estimators built on them.
//
// Every influence value shares one doubly robust building block,
//   ipw_residual = {A / e - (1 - A) / (1 - e)} * (Y - mu_A),
// weighted by a policy contrast w(X) and added to tau_Y(X) * w(X):
//   regret      w = pi_Y - pi_S
//   gain        w = pi_S
//   efficiency  w = pi_S - lambda
// The estimate is the mean over rows not used to fit the nuisances; its
// standard error is the sample SD of the values over sqrt(n).

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surreval/data.hpp"

namespace surreval {

enum class Metric { regret, gain, efficiency };

const char* to_string(Metric metric);
Metric metric_from_string(const std::string& name);

// Per-row nuisance values on the rows being averaged. Thresholds are stored
// per row because each cross-fitting fold carries its own quantiles.
struct NuisanceBundle {
  std::vector<double> mu0, mu1, e, tau_y, tau_s;
  std::vector<int> pi_y, pi_s;
  std::vector<double> threshold_y, threshold_s;
  double lambda = 1.0;

  std::size_t rows() const { return mu0.size(); }
  // Throws std::logic_error when lengths disagree, e leaves (0, 1), or a policy
  // entry does not match its CATE/threshold construction.
  void check() const;
};

double ipw_residual(int a, double y, double e, double mu0, double mu1);

double phi_regret(const NuisanceBundle& b, std::size_t i, int a, double y);
double omega_gain(const NuisanceBundle& b, std::size_t i, int a, double y);
double psi_efficiency(const NuisanceBundle& b, std::size_t i, int a, double y);
// Doubly robust ATE pseudo-outcome ipw_residual + tau_Y.
double dr_ate_term(const NuisanceBundle& b, std::size_t i, int a, double y);

double influence(Metric metric, const NuisanceBundle& b, std::size_t i, int a, double y);

// Influence values for every row of `main` (which must carry the outcome).
std::vector<double> influence_values(Metric metric, const ObservationTable& main, const NuisanceBundle& bundle);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct BootstrapSummary {
  double se = 0.0;
  Interval ci;
  std::size_t b_effective = 0;
  std::size_t skipped = 0;
};

struct MetricEstimate {
  Metric metric = Metric::regret;
  double lambda = 1.0;
  double point = 0.0;
  double analytic_se = 0.0;
  double level = 0.95;
  Interval ci;
  std::optional<BootstrapSummary> bootstrap;
  std::size_t n_main = 0;
};

inline constexpr double kDefaultLevel = 0.95;

double normal_quantile(double p);

// Mean, SD / sqrt(n) and the symmetric normal interval. Identical values give
// the value itself with zero SE.
MetricEstimate summarize(std::span<const double> values, Metric metric, double lambda, double level = kDefaultLevel);

MetricEstimate estimate_metric(const ObservationTable& main, const NuisanceBundle& bundle, Metric metric,
                               double level = kDefaultLevel);

void to_json(nlohmann::json& j, const MetricEstimate& estimate);

// ---- exact bias of the regret influence function under perturbed nuisances ----

// Known conditional law on a finite covariate grid with binary Y:
// P(A = 1 | x) = e, P(Y = 1 | A = a, x) = mu_a.
struct ConditionalLaw {
  std::vector<double> e, mu0, mu1;
};

struct BiasPair {
  double exact = 0.0;        // E[phi(hat) - phi(true) | X = x] summed over (A, Y)
  double closed_form = 0.0;  // product-of-errors expression
};

// One entry per grid point. `truth` should carry the law's own e/mu values;
// the bundles' policies may be arbitrary 0/1 vectors.
std::vector<BiasPair> product_bias(const NuisanceBundle& estimated, const NuisanceBundle& truth,
                                  const ConditionalLaw& law);

}  // namespace surreval
