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

// Sample-splitting and cross-fitting pipelines.
//
// Three layouts are supported:
//   * two datasets, single split: the outcome dataset is cut into a main and
//     an auxiliary half; outcome regressions use the auxiliary half, surrogate
//     regressions and the propensity use the surrogate dataset, quantiles are
//     taken over the union of both auxiliary samples, and influence values are
//     averaged over the main half;
//   * two datasets, K folds: outcome regressions are refit on each fold's
//     complement, surrogate regressions and the propensity once on the whole
//     surrogate dataset, and influence values are averaged over every outcome
//     row;
//   * one dataset with both endpoints, K folds: each fold's complement is cut
//     again, outcome-side nuisances on one part and surrogate-side nuisances
//     plus the propensity on the other.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "surreval/data.hpp"
#include "surreval/influence.hpp"
#include "surreval/nuisance.hpp"

namespace surreval {

// A pipeline stage failed (empty arm, fold too small, ...).
class EstimationError : public std::runtime_error {
 public:
  EstimationError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// How the single-dataset layout divides each fold complement.
enum class NuisancePartition {
  disjoint,  // outcome side and surrogate side on disjoint halves
  shared,    // both sides on the whole complement
};

struct CrossfitConfig {
  RegressorKind outcome_kind = RegressorKind::logistic;
  RegressorKind surrogate_kind = RegressorKind::logistic;
  RegressorKind propensity_kind = RegressorKind::logistic;
  NuisanceConfig nuisance;
  double clip = kDefaultPropensityClip;
  // 1 selects the single-split layout (two datasets only).
  std::size_t folds = 1;
  double main_fraction = kDefaultMainFraction;
  NuisancePartition partition = NuisancePartition::disjoint;
  std::uint64_t seed = 0;
  double level = kDefaultLevel;
};

inline constexpr std::size_t kDefaultSingleDatasetFolds = 5;

struct FoldRecord {
  // Row indices into NuisanceFit::eval.
  std::vector<std::size_t> eval_rows;
  // The same rows as indices into the outcome source (d1 or the single
  // dataset).
  std::vector<std::size_t> eval_source_rows;
  // Rows of the outcome source used for mu0/mu1.
  std::vector<std::size_t> outcome_fit_rows;
  // Rows of the surrogate source used for mu_S0/mu_S1 and e. In the
  // two-dataset layouts these index the surrogate dataset.
  std::vector<std::size_t> surrogate_fit_rows;
  bool surrogate_source_is_eval_table = false;
  // Sorted CATE samples the budget quantiles are read from.
  std::vector<double> quantile_sample_y;
  std::vector<double> quantile_sample_s;
  RegressorHandle mu0, mu1, mu_s0, mu_s1, propensity;
};

// Nuisance predictions on the averaging rows; lambda-free.
struct NuisanceFit {
  ObservationTable eval;
  std::vector<double> mu0, mu1, e, tau_y, tau_s;
  std::vector<std::size_t> fold_of_row;
  std::vector<FoldRecord> folds;
};

NuisanceFit fit_split(const ObservationTable& d1, const ObservationTable& d2, const CrossfitConfig& config);
NuisanceFit fit_single(const ObservationTable& d, const CrossfitConfig& config);

// Budgeted policies and thresholds for one lambda (lambda = 1 uses the
// -infinity threshold).
NuisanceBundle bundle_at(const NuisanceFit& fit, double lambda);

// The unconstrained sign rule 1{tau > 0}, built without any quantile.
NuisanceBundle plugin_bundle(const NuisanceFit& fit);

// One estimate per (lambda, metric), lambda-major.
std::vector<MetricEstimate> evaluate(const NuisanceFit& fit, std::span<const double> lambdas,
                                     std::span<const Metric> metrics, double level = kDefaultLevel);

std::vector<MetricEstimate> crossfit_split(const ObservationTable& d1, const ObservationTable& d2,
                                           std::span<const double> lambdas, std::span<const Metric> metrics,
                                           const CrossfitConfig& config);
std::vector<MetricEstimate> crossfit_single(const ObservationTable& d, std::span<const double> lambdas,
                                            std::span<const Metric> metrics, const CrossfitConfig& config);

// ---- bootstrap ----

// Maps resampled datasets (same order as given to bootstrap_ci) to a vector
// of statistics. Throwing marks the resample as failed.
using Pipeline = std::function<std::vector<double>(std::span<const ObservationTable>)>;

struct BootstrapResult {
  std::vector<double> point;  // pipeline on the original datasets
  std::vector<double> se;
  std::vector<Interval> ci;
  std::size_t b_effective = 0;
  std::size_t skipped = 0;
  std::vector<std::vector<double>> draws;  // b_effective x statistics
};

inline constexpr std::size_t kMinBootstrap = 100;

// Nonparametric bootstrap: rows are resampled with replacement within each
// dataset and the whole pipeline is rerun. A failing resample is redrawn once;
// if that fails too it is skipped and counted. Intervals take the percentiles
// of the resampled statistics minus their mean and add them to the
// full-sample estimate.
BootstrapResult bootstrap_ci(std::span<const ObservationTable> datasets, const Pipeline& pipeline, std::size_t replicates,
                             double level, std::uint64_t seed, unsigned threads = 1);

// Pipeline that reruns crossfit_split / crossfit_single and returns the point
// estimates in evaluate() order.
Pipeline crossfit_pipeline(std::vector<double> lambdas, std::vector<Metric> metrics, CrossfitConfig config);

// Percentile of a sorted sample with linear interpolation between order
// statistics.
double sample_quantile_sorted(std::span<const double> sorted, double p);

}  // namespace surreval
