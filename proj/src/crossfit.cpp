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

#include "surreval/crossfit.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "surreval/parallel.hpp"
#include "surreval/policy.hpp"
#include "surreval/rng.hpp"

namespace surreval {

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(idx[r]));
  }
  return out;
}

std::vector<double> difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

void require_column(const ObservationTable& t, Endpoint endpoint, const char* which) {
  if (!t.has(endpoint)) {
    throw EstimationError("input", std::string(which) + " dataset has no " + to_string(endpoint) + " column");
  }
}

struct ArmPair {
  RegressorHandle arm0, arm1;
};

ArmPair fit_arms(const ObservationTable& table, Endpoint endpoint, RegressorKind kind, const CrossfitConfig& config) {
  const std::string stage = std::string(to_string(endpoint)) + " regression";
  try {
    return {fit_arm_regression(table, endpoint, 0, kind, config.nuisance),
            fit_arm_regression(table, endpoint, 1, kind, config.nuisance)};
  } catch (const FitError& err) {
    throw EstimationError(stage, err.what());
  }
}

RegressorHandle fit_e(const ObservationTable& table, const CrossfitConfig& config) {
  try {
    return fit_propensity(table, config.propensity_kind, config.nuisance);
  } catch (const FitError& err) {
    throw EstimationError("propensity", err.what());
  }
}

std::vector<double> cate_on(const ArmPair& arms, const Eigen::MatrixXd& x) {
  return difference(arms.arm1.predict_rows(x), arms.arm0.predict_rows(x));
}

std::vector<double> sorted_concat(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

std::vector<double> sorted_copy(std::vector<double> a) {
  std::sort(a.begin(), a.end());
  return a;
}

// Writes fold predictions for eval rows into the fit.
void predict_fold(NuisanceFit& fit, std::size_t fold, const ArmPair& outcome, const ArmPair& surrogate,
                  const RegressorHandle& propensity, double clip) {
  const auto& rows = fit.folds[fold].eval_rows;
  const Eigen::MatrixXd x = rows_of(fit.eval.covariates, rows);
  const auto mu0 = outcome.arm0.predict_rows(x);
  const auto mu1 = outcome.arm1.predict_rows(x);
  const auto ms0 = surrogate.arm0.predict_rows(x);
  const auto ms1 = surrogate.arm1.predict_rows(x);
  const auto e = clip_propensity(propensity.predict_rows(x), clip);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    fit.mu0[i] = mu0[r];
    fit.mu1[i] = mu1[r];
    fit.tau_y[i] = mu1[r] - mu0[r];
    fit.tau_s[i] = ms1[r] - ms0[r];
    fit.e[i] = e[r];
    fit.fold_of_row[i] = fold;
  }
  auto& rec = fit.folds[fold];
  rec.mu0 = outcome.arm0;
  rec.mu1 = outcome.arm1;
  rec.mu_s0 = surrogate.arm0;
  rec.mu_s1 = surrogate.arm1;
  rec.propensity = propensity;
}

void allocate(NuisanceFit& fit) {
  const std::size_t n = fit.eval.rows();
  for (auto* v : {&fit.mu0, &fit.mu1, &fit.e, &fit.tau_y, &fit.tau_s}) v->assign(n, 0.0);
  fit.fold_of_row.assign(n, 0);
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& sorted_rows) {
  std::vector<std::size_t> out;
  out.reserve(n - sorted_rows.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (k < sorted_rows.size() && sorted_rows[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace

NuisanceFit fit_split(const ObservationTable& d1, const ObservationTable& d2, const CrossfitConfig& config) {
  require_column(d1, Endpoint::outcome, "outcome");
  require_column(d2, Endpoint::surrogate, "surrogate");
  if (d1.dims() != d2.dims()) throw EstimationError("input", "datasets have different covariate counts");

  const ArmPair surrogate = fit_arms(d2, Endpoint::surrogate, config.surrogate_kind, config);
  const RegressorHandle propensity = fit_e(d2, config);
  const auto tau_s_d2 = cate_on(surrogate, d2.covariates);
  std::vector<std::size_t> all_d2(d2.rows());
  for (std::size_t j = 0; j < all_d2.size(); ++j) all_d2[j] = j;

  NuisanceFit fit;
  if (config.folds <= 1) {
    SplitPlan plan;
    try {
      plan = split_half(d1, config.main_fraction, derive_seed(config.seed, 1));
    } catch (const std::invalid_argument& err) {
      throw EstimationError("split", err.what());
    }
    const ObservationTable aux = d1.subset(plan.aux_indices);
    const ArmPair outcome = fit_arms(aux, Endpoint::outcome, config.outcome_kind, config);
    fit.eval = d1.subset(plan.main_indices);
    allocate(fit);
    fit.folds.resize(1);
    auto& rec = fit.folds[0];
    rec.eval_rows.resize(fit.eval.rows());
    for (std::size_t i = 0; i < rec.eval_rows.size(); ++i) rec.eval_rows[i] = i;
    rec.outcome_fit_rows = plan.aux_indices;
    rec.surrogate_fit_rows = all_d2;
    // Both quantiles are read off the pooled auxiliary sample.
    rec.quantile_sample_y = sorted_concat(cate_on(outcome, aux.covariates), cate_on(outcome, d2.covariates));
    rec.quantile_sample_s = sorted_concat(cate_on(surrogate, aux.covariates), tau_s_d2);
    rec.eval_source_rows = plan.main_indices;
    predict_fold(fit, 0, outcome, surrogate, propensity, config.clip);
    return fit;
  }

  std::vector<std::vector<std::size_t>> folds;
  try {
    folds = kfold(d1.rows(), config.folds, derive_seed(config.seed, 2));
  } catch (const std::invalid_argument& err) {
    throw EstimationError("folds", err.what());
  }
  fit.eval = d1;
  allocate(fit);
  fit.folds.resize(folds.size());
  for (std::size_t k = 0; k < folds.size(); ++k) {
    auto& rec = fit.folds[k];
    rec.eval_rows = folds[k];
    rec.eval_source_rows = folds[k];
    rec.outcome_fit_rows = complement(d1.rows(), folds[k]);
    rec.surrogate_fit_rows = all_d2;
    const ObservationTable train = d1.subset(rec.outcome_fit_rows);
    const ArmPair outcome = fit_arms(train, Endpoint::outcome, config.outcome_kind, config);
    rec.quantile_sample_y = sorted_concat(cate_on(outcome, train.covariates), cate_on(outcome, d2.covariates));
    rec.quantile_sample_s = sorted_concat(cate_on(surrogate, train.covariates), tau_s_d2);
    predict_fold(fit, k, outcome, surrogate, propensity, config.clip);
  }
  return fit;
}

NuisanceFit fit_single(const ObservationTable& d, const CrossfitConfig& config) {
  require_column(d, Endpoint::outcome, "single");
  require_column(d, Endpoint::surrogate, "single");
  if (config.folds < 2) throw EstimationError("folds", "single-dataset cross-fitting needs at least 2 folds");
  std::vector<std::vector<std::size_t>> folds;
  try {
    folds = kfold(d.rows(), config.folds, derive_seed(config.seed, 3));
  } catch (const std::invalid_argument& err) {
    throw EstimationError("folds", err.what());
  }

  NuisanceFit fit;
  fit.eval = d;
  allocate(fit);
  fit.folds.resize(folds.size());
  for (std::size_t k = 0; k < folds.size(); ++k) {
    auto& rec = fit.folds[k];
    rec.eval_rows = folds[k];
    rec.eval_source_rows = folds[k];
    rec.surrogate_source_is_eval_table = true;
    const auto rest = complement(d.rows(), folds[k]);
    if (config.partition == NuisancePartition::shared) {
      rec.outcome_fit_rows = rest;
      rec.surrogate_fit_rows = rest;
    } else {
      SplitPlan plan;
      try {
        plan = split_half(rest.size(), 0.5, derive_seed(config.seed, 100 + k));
      } catch (const std::invalid_argument& err) {
        throw EstimationError("folds", err.what());
      }
      for (std::size_t p : plan.main_indices) rec.outcome_fit_rows.push_back(rest[p]);
      for (std::size_t p : plan.aux_indices) rec.surrogate_fit_rows.push_back(rest[p]);
    }
    const ObservationTable outcome_train = d.subset(rec.outcome_fit_rows);
    const ObservationTable surrogate_train = d.subset(rec.surrogate_fit_rows);
    const ArmPair outcome = fit_arms(outcome_train, Endpoint::outcome, config.outcome_kind, config);
    const ArmPair surrogate = fit_arms(surrogate_train, Endpoint::surrogate, config.surrogate_kind, config);
    const RegressorHandle propensity = fit_e(surrogate_train, config);
    rec.quantile_sample_y = sorted_copy(cate_on(outcome, outcome_train.covariates));
    rec.quantile_sample_s = sorted_copy(cate_on(surrogate, surrogate_train.covariates));
    predict_fold(fit, k, outcome, surrogate, propensity, config.clip);
  }
  return fit;
}

namespace {
NuisanceBundle bundle_skeleton(const NuisanceFit& fit, double lambda) {
  NuisanceBundle b;
  b.mu0 = fit.mu0;
  b.mu1 = fit.mu1;
  b.e = fit.e;
  b.tau_y = fit.tau_y;
  b.tau_s = fit.tau_s;
  b.lambda = lambda;
  const std::size_t n = fit.mu0.size();
  b.pi_y.resize(n);
  b.pi_s.resize(n);
  b.threshold_y.resize(n);
  b.threshold_s.resize(n);
  return b;
}
}  // namespace

NuisanceBundle bundle_at(const NuisanceFit& fit, double lambda) {
  check_budget(lambda);
  NuisanceBundle b = bundle_skeleton(fit, lambda);
  std::vector<double> thr_y(fit.folds.size()), thr_s(fit.folds.size());
  for (std::size_t k = 0; k < fit.folds.size(); ++k) {
    thr_y[k] = empirical_quantile_sorted(fit.folds[k].quantile_sample_y, lambda);
    thr_s[k] = empirical_quantile_sorted(fit.folds[k].quantile_sample_s, lambda);
  }
  for (std::size_t i = 0; i < b.rows(); ++i) {
    const std::size_t k = fit.fold_of_row[i];
    b.threshold_y[i] = thr_y[k];
    b.threshold_s[i] = thr_s[k];
    b.pi_y[i] = assign_treatment(b.tau_y[i], thr_y[k]);
    b.pi_s[i] = assign_treatment(b.tau_s[i], thr_s[k]);
  }
  return b;
}

NuisanceBundle plugin_bundle(const NuisanceFit& fit) {
  NuisanceBundle b = bundle_skeleton(fit, 1.0);
  for (std::size_t i = 0; i < b.rows(); ++i) {
    b.threshold_y[i] = kNoBudgetCut;
    b.threshold_s[i] = kNoBudgetCut;
    b.pi_y[i] = b.tau_y[i] > 0.0 ? 1 : 0;
    b.pi_s[i] = b.tau_s[i] > 0.0 ? 1 : 0;
  }
  return b;
}

std::vector<MetricEstimate> evaluate(const NuisanceFit& fit, std::span<const double> lambdas,
                                     std::span<const Metric> metrics, double level) {
  std::vector<MetricEstimate> out;
  out.reserve(lambdas.size() * metrics.size());
  for (double lambda : lambdas) {
    const NuisanceBundle bundle = bundle_at(fit, lambda);
    for (Metric m : metrics) out.push_back(estimate_metric(fit.eval, bundle, m, level));
  }
  return out;
}

std::vector<MetricEstimate> crossfit_split(const ObservationTable& d1, const ObservationTable& d2,
                                           std::span<const double> lambdas, std::span<const Metric> metrics,
                                           const CrossfitConfig& config) {
  return evaluate(fit_split(d1, d2, config), lambdas, metrics, config.level);
}

std::vector<MetricEstimate> crossfit_single(const ObservationTable& d, std::span<const double> lambdas,
                                            std::span<const Metric> metrics, const CrossfitConfig& config) {
  return evaluate(fit_single(d, config), lambdas, metrics, config.level);
}

// ---- bootstrap ----

double sample_quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("sample_quantile_sorted: empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  if (sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BootstrapResult bootstrap_ci(std::span<const ObservationTable> datasets, const Pipeline& pipeline,
                             std::size_t replicates, double level, std::uint64_t seed, unsigned threads) {
  if (replicates < kMinBootstrap) {
    throw std::invalid_argument("bootstrap needs at least " + std::to_string(kMinBootstrap) + " resamples");
  }
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap level must lie in (0, 1)");
  if (datasets.empty()) throw std::invalid_argument("bootstrap needs at least one dataset");

  BootstrapResult out;
  out.point = pipeline(datasets);

  std::vector<std::optional<std::vector<double>>> results(replicates);
  parallel_for(replicates, threads, [&](std::size_t b) {
    for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
      Rng rng(derive_seed(seed, b), attempt);
      std::vector<ObservationTable> resampled;
      resampled.reserve(datasets.size());
      for (const auto& table : datasets) {
        std::vector<std::size_t> idx(table.rows());
        for (auto& i : idx) i = static_cast<std::size_t>(rng.below(table.rows()));
        resampled.push_back(table.subset(idx));
      }
      try {
        results[b] = pipeline(resampled);
        return;
      } catch (const std::exception&) {
        // redraw once, then give up on this replicate
      }
    }
  });

  for (auto& r : results) {
    if (r) {
      if (r->size() != out.point.size()) {
        throw EstimationError("bootstrap", "pipeline returned a varying number of statistics");
      }
      out.draws.push_back(std::move(*r));
    } else {
      ++out.skipped;
    }
  }
  out.b_effective = out.draws.size();
  if (out.b_effective < 2) throw EstimationError("bootstrap", "fewer than two resamples succeeded");

  const std::size_t stats = out.point.size();
  out.se.resize(stats);
  out.ci.resize(stats);
  std::vector<double> column(out.b_effective);
  for (std::size_t s = 0; s < stats; ++s) {
    for (std::size_t b = 0; b < out.b_effective; ++b) column[b] = out.draws[b][s];
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= static_cast<double>(column.size());
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    out.se[s] = std::sqrt(ss / static_cast<double>(column.size() - 1));
    std::sort(column.begin(), column.end());
    if (column.front() == column.back()) {
      out.se[s] = 0.0;
      out.ci[s] = {out.point[s], out.point[s]};
      continue;
    }
    // Percentiles of the centred draws, anchored at the full-sample estimate.
    // Each resample draws a fresh fold split, so the bootstrap mean averages
    // out split noise that the point estimate carries.
    const double lo = sample_quantile_sorted(column, 0.5 - 0.5 * level) - mean;
    const double hi = sample_quantile_sorted(column, 0.5 + 0.5 * level) - mean;
    out.ci[s] = {out.point[s] + lo, out.point[s] + hi};
  }
  return out;
}

Pipeline crossfit_pipeline(std::vector<double> lambdas, std::vector<Metric> metrics, CrossfitConfig config) {
  return [lambdas = std::move(lambdas), metrics = std::move(metrics),
          config = std::move(config)](std::span<const ObservationTable> data) {
    std::vector<MetricEstimate> est;
    if (data.size() == 2) {
      est = crossfit_split(data[0], data[1], lambdas, metrics, config);
    } else if (data.size() == 1) {
      est = crossfit_single(data[0], lambdas, metrics, config);
    } else {
      throw EstimationError("bootstrap", "pipeline expects one or two datasets");
    }
    std::vector<double> points;
    points.reserve(est.size());
    for (const auto& e : est) points.push_back(e.point);
    return points;
  };
}

}  // namespace surreval
