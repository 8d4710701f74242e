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

// Nuisance regressions: logistic IRLS, least-squares boosted stumps, and a
// constant (mean-only) fit, behind one RegressorHandle.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "surreval/data.hpp"

namespace surreval {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Maximum likelihood does not exist (one class only, or the classes are
// linearly separable) and no ridge penalty was requested.
class SeparationError : public FitError {
 public:
  using FitError::FitError;
};

double expit(double x);
double logit(double p);

struct LogisticConfig {
  int max_iter = 100;
  double tol = 1e-8;     // on the max-norm of the mean penalized score
  double ridge = 1e-8;   // penalty (ridge / 2) * ||beta||^2 on the mean log-likelihood, intercept included
};

struct LogisticModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  bool converged = false;
  int iterations = 0;
  // Penalized mean log-likelihood after each accepted step, starting point first.
  std::vector<double> objective_trace;

  double linear_predictor(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

LogisticModel fit_logistic(const Eigen::MatrixXd& x, std::span<const double> y, const LogisticConfig& config = {});
std::vector<double> predict_proba(const LogisticModel& model, const Eigen::MatrixXd& x);

struct StumpConfig {
  int rounds = 100;
  double rate = 0.1;
  std::size_t min_leaf = 5;
};

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  double left = 0.0;
  double right = 0.0;
};

struct StumpEnsemble {
  double base = 0.0;
  double rate = 0.1;
  std::vector<Stump> stages;
  // Training MSE before any stage and after each stage.
  std::vector<double> mse_trace;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

StumpEnsemble fit_stump_ensemble(const Eigen::MatrixXd& x, std::span<const double> y, const StumpConfig& config = {});

enum class RegressorKind { logistic, stumps, mean };

const char* to_string(RegressorKind kind);
RegressorKind regressor_kind_from_string(const std::string& name);

struct NuisanceConfig {
  LogisticConfig logistic;
  StumpConfig stumps;
};

class RegressorHandle {
 public:
  struct MeanOnly {
    double value = 0.0;
  };
  using Model = std::variant<LogisticModel, StumpEnsemble, MeanOnly>;

  RegressorHandle() : model_(MeanOnly{}), dims_(0) {}
  RegressorHandle(Model model, std::size_t dims) : model_(std::move(model)), dims_(dims) {}

  RegressorKind kind() const;
  std::size_t dims() const { return dims_; }
  const Model& model() const { return model_; }

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  std::vector<double> predict_rows(const Eigen::MatrixXd& x) const;

 private:
  Model model_;
  std::size_t dims_;
};

RegressorHandle fit_regressor(const Eigen::MatrixXd& x, std::span<const double> y, RegressorKind kind,
                              const NuisanceConfig& config = {});

// Fits E[target | X, A = arm] on the rows with A == arm.
RegressorHandle fit_arm_regression(const ObservationTable& table, Endpoint target, int arm, RegressorKind kind,
                                   const NuisanceConfig& config = {});

// Fits e(X) = P(A = 1 | X) on all rows.
RegressorHandle fit_propensity(const ObservationTable& table, RegressorKind kind, const NuisanceConfig& config = {});

inline constexpr double kDefaultPropensityClip = 0.01;

double clip_propensity(double e, double epsilon = kDefaultPropensityClip);
std::vector<double> clip_propensity(std::span<const double> e, double epsilon = kDefaultPropensityClip);

void to_json(nlohmann::json& j, const RegressorHandle& handle);
void from_json(const nlohmann::json& j, RegressorHandle& handle);

}  // namespace surreval
