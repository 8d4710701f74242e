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

#include "surreval/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace surreval {

double expit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  return z;
}

double penalized_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                           double ridge) {
  const Eigen::VectorXd eta = z * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
  return ll / static_cast<double>(z.rows()) - 0.5 * ridge * beta.squaredNorm();
}

}  // namespace

double LogisticModel::linear_predictor(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double eta = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) eta += coefficients[j] * x[static_cast<Eigen::Index>(j)];
  return eta;
}

LogisticModel fit_logistic(const Eigen::MatrixXd& x, std::span<const double> y_in, const LogisticConfig& config) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (static_cast<std::size_t>(n) != y_in.size()) throw FitError("fit_logistic: X and y lengths differ");
  if (n < d + 1) {
    throw FitError("fit_logistic: need at least d + 1 = " + std::to_string(d + 1) + " rows, got " + std::to_string(n));
  }
  if (config.max_iter < 1 || !(config.tol > 0.0) || config.ridge < 0.0) throw FitError("fit_logistic: invalid config");

  Eigen::VectorXd y(n);
  double ybar = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = y_in[static_cast<std::size_t>(i)];
    if (!(v >= 0.0 && v <= 1.0)) throw FitError("fit_logistic: responses must lie in [0, 1]");
    y[i] = v;
    ybar += v;
  }
  ybar /= static_cast<double>(n);
  const bool one_class = ybar <= 0.0 || ybar >= 1.0;
  if (one_class && config.ridge == 0.0) {
    throw SeparationError("fit_logistic: response has a single class; MLE does not exist without ridge");
  }

  const Eigen::MatrixXd z = with_intercept(x);
  const auto p = z.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (!one_class) beta[0] = logit(ybar);

  LogisticModel model;
  double obj = penalized_objective(z, y, beta, config.ridge);
  model.objective_trace.push_back(obj);
  const double inv_n = 1.0 / static_cast<double>(n);

  for (int iter = 0; iter < config.max_iter; ++iter) {
    const Eigen::VectorXd eta = z * beta;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = expit(eta[i]);
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    const Eigen::VectorXd grad = z.transpose() * (y - mu) * inv_n - config.ridge * beta;
    if (grad.lpNorm<Eigen::Infinity>() <= config.tol) {
      model.converged = true;
      break;
    }
    Eigen::MatrixXd hess = z.transpose() * w.asDiagonal() * z * inv_n;
    hess.diagonal().array() += config.ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      hess.diagonal().array() += 1e-10;
      step = hess.ldlt().solve(grad);
    }
    // Step halving keeps the penalized likelihood non-decreasing.
    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double cand_obj = penalized_objective(z, y, candidate, config.ridge);
    int halvings = 0;
    while (!(cand_obj >= obj) && halvings < 40) {
      scale *= 0.5;
      candidate = beta + scale * step;
      cand_obj = penalized_objective(z, y, candidate, config.ridge);
      ++halvings;
    }
    model.iterations = iter + 1;
    if (!(cand_obj >= obj)) break;  // no ascent direction left at double precision
    beta = candidate;
    obj = cand_obj;
    model.objective_trace.push_back(obj);
  }
  if (!model.converged) {
    const Eigen::VectorXd eta = z * beta;
    Eigen::VectorXd mu = eta.unaryExpr([](double v) { return expit(v); });
    const Eigen::VectorXd grad = z.transpose() * (y - mu) * inv_n - config.ridge * beta;
    model.converged = grad.lpNorm<Eigen::Infinity>() <= config.tol;
  }

  if (config.ridge == 0.0) {
    const Eigen::VectorXd eta = z * beta;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) worst = std::max(worst, std::abs(y[i] - expit(eta[i])));
    if (worst < 1e-6 || !beta.allFinite()) {
      throw SeparationError("fit_logistic: perfect separation (coefficients diverge); use ridge > 0");
    }
  }
  if (!beta.allFinite()) throw FitError("fit_logistic: non-finite coefficients");

  model.intercept = beta[0];
  model.coefficients.assign(beta.data() + 1, beta.data() + p);
  return model;
}

std::vector<double> predict_proba(const LogisticModel& model, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != model.coefficients.size()) {
    throw FitError("predict_proba: model has " + std::to_string(model.coefficients.size()) + " covariates, X has " +
                   std::to_string(x.cols()));
  }
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = expit(model.linear_predictor(x.row(i)));
  return out;
}

// ---- boosted stumps ----

double StumpEnsemble::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double sum = 0.0;
  for (const auto& s : stages) sum += x[static_cast<Eigen::Index>(s.feature)] <= s.threshold ? s.left : s.right;
  return base + rate * sum;
}

StumpEnsemble fit_stump_ensemble(const Eigen::MatrixXd& x, std::span<const double> y, const StumpConfig& config) {
  if (config.rounds < 1) throw FitError("fit_stump_ensemble: rounds must be >= 1");
  if (!(config.rate > 0.0 && config.rate <= 1.0)) throw FitError("fit_stump_ensemble: rate must lie in (0, 1]");
  if (config.min_leaf < 1) throw FitError("fit_stump_ensemble: min_leaf must be >= 1");
  const std::size_t n = y.size();
  const std::size_t d = static_cast<std::size_t>(x.cols());
  if (n == 0 || static_cast<std::size_t>(x.rows()) != n) throw FitError("fit_stump_ensemble: X and y lengths differ or are empty");

  StumpEnsemble model;
  model.rate = config.rate;
  model.base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - model.base;
  auto mse = [&] {
    double s = 0.0;
    for (double r : resid) s += r * r;
    return s / static_cast<double>(n);
  };
  model.mse_trace.push_back(mse());

  std::vector<std::vector<std::size_t>> order(d);
  for (std::size_t j = 0; j < d; ++j) {
    order[j].resize(n);
    std::iota(order[j].begin(), order[j].end(), std::size_t{0});
    std::stable_sort(order[j].begin(), order[j].end(), [&](std::size_t a, std::size_t b) {
      return x(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) <
             x(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
    });
  }

  for (int round = 0; round < config.rounds; ++round) {
    const double total = std::accumulate(resid.begin(), resid.end(), 0.0);
    Stump best{0, 0.0, total / static_cast<double>(n), total / static_cast<double>(n)};
    double best_gain = 0.0;
    const double base_score = total * total / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t i = order[j][k];
        left_sum += resid[i];
        const std::size_t n_left = k + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < config.min_leaf) continue;
        if (n_right < config.min_leaf) break;
        const double xv = x(static_cast<Eigen::Index>(i), col);
        const double xn = x(static_cast<Eigen::Index>(order[j][k + 1]), col);
        if (!(xv < xn)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                            right_sum * right_sum / static_cast<double>(n_right) - base_score;
        if (gain > best_gain) {
          best_gain = gain;
          best = Stump{j, 0.5 * (xv + xn), left_sum / static_cast<double>(n_left),
                       right_sum / static_cast<double>(n_right)};
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const bool left = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best.feature)) <= best.threshold;
      resid[i] -= config.rate * (left ? best.left : best.right);
    }
    model.stages.push_back(best);
    model.mse_trace.push_back(mse());
  }
  return model;
}

// ---- handle ----

const char* to_string(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::logistic:
      return "logistic";
    case RegressorKind::stumps:
      return "stumps";
    case RegressorKind::mean:
      return "mean";
  }
  return "?";
}

RegressorKind regressor_kind_from_string(const std::string& name) {
  if (name == "logistic") return RegressorKind::logistic;
  if (name == "stumps") return RegressorKind::stumps;
  if (name == "mean" || name == "mean-only") return RegressorKind::mean;
  throw std::invalid_argument("unknown regressor kind '" + name + "' (expected logistic|stumps|mean)");
}

RegressorKind RegressorHandle::kind() const {
  switch (model_.index()) {
    case 0:
      return RegressorKind::logistic;
    case 1:
      return RegressorKind::stumps;
    default:
      return RegressorKind::mean;
  }
}

double RegressorHandle::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (const auto* m = std::get_if<LogisticModel>(&model_)) return expit(m->linear_predictor(x));
  if (const auto* m = std::get_if<StumpEnsemble>(&model_)) return m->predict(x);
  return std::get<MeanOnly>(model_).value;
}

std::vector<double> RegressorHandle::predict_rows(const Eigen::MatrixXd& x) const {
  if (dims_ != 0 && static_cast<std::size_t>(x.cols()) != dims_) {
    throw FitError("predict: regressor fitted on " + std::to_string(dims_) + " covariates, got " +
                   std::to_string(x.cols()));
  }
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = predict(x.row(i));
  return out;
}

RegressorHandle fit_regressor(const Eigen::MatrixXd& x, std::span<const double> y, RegressorKind kind,
                              const NuisanceConfig& config) {
  const auto dims = static_cast<std::size_t>(x.cols());
  if (y.empty()) throw FitError("fit_regressor: no rows");
  switch (kind) {
    case RegressorKind::logistic:
      return RegressorHandle(fit_logistic(x, y, config.logistic), dims);
    case RegressorKind::stumps:
      return RegressorHandle(fit_stump_ensemble(x, y, config.stumps), dims);
    case RegressorKind::mean:
      return RegressorHandle(RegressorHandle::MeanOnly{std::accumulate(y.begin(), y.end(), 0.0) /
                                                       static_cast<double>(y.size())},
                             dims);
  }
  throw FitError("fit_regressor: unknown kind");
}

RegressorHandle fit_arm_regression(const ObservationTable& table, Endpoint target, int arm, RegressorKind kind,
                                   const NuisanceConfig& config) {
  const auto& col = table.column(target);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (table.treatment[i] == arm) rows.push_back(i);
  if (rows.empty()) {
    throw FitError(std::string("fit_arm_regression: no rows with A = ") + std::to_string(arm) + " for " +
                   to_string(target));
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), table.covariates.cols());
  std::vector<double> y(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = table.covariates.row(static_cast<Eigen::Index>(rows[r]));
    y[r] = col[rows[r]];
  }
  return fit_regressor(x, y, kind, config);
}

RegressorHandle fit_propensity(const ObservationTable& table, RegressorKind kind, const NuisanceConfig& config) {
  std::vector<double> a(table.treatment.begin(), table.treatment.end());
  return fit_regressor(table.covariates, a, kind, config);
}

double clip_propensity(double e, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("clip_propensity: epsilon must lie in (0, 0.5)");
  return std::clamp(e, epsilon, 1.0 - epsilon);
}

std::vector<double> clip_propensity(std::span<const double> e, double epsilon) {
  std::vector<double> out(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = clip_propensity(e[i], epsilon);
  return out;
}

// ---- JSON ----

void to_json(nlohmann::json& j, const RegressorHandle& handle) {
  j = nlohmann::json{{"kind", to_string(handle.kind())}, {"dims", handle.dims()}};
  if (const auto* m = std::get_if<LogisticModel>(&handle.model())) {
    j["intercept"] = m->intercept;
    j["coefficients"] = m->coefficients;
    j["converged"] = m->converged;
    j["iterations"] = m->iterations;
  } else if (const auto* s = std::get_if<StumpEnsemble>(&handle.model())) {
    j["base"] = s->base;
    j["rate"] = s->rate;
    auto stages = nlohmann::json::array();
    for (const auto& st : s->stages) {
      stages.push_back({{"feature", st.feature}, {"threshold", st.threshold}, {"left", st.left}, {"right", st.right}});
    }
    j["stages"] = std::move(stages);
  } else {
    j["value"] = std::get<RegressorHandle::MeanOnly>(handle.model()).value;
  }
}

void from_json(const nlohmann::json& j, RegressorHandle& handle) {
  const auto kind = regressor_kind_from_string(j.at("kind").get<std::string>());
  const auto dims = j.at("dims").get<std::size_t>();
  switch (kind) {
    case RegressorKind::logistic: {
      LogisticModel m;
      m.intercept = j.at("intercept").get<double>();
      m.coefficients = j.at("coefficients").get<std::vector<double>>();
      m.converged = j.value("converged", true);
      m.iterations = j.value("iterations", 0);
      handle = RegressorHandle(std::move(m), dims);
      return;
    }
    case RegressorKind::stumps: {
      StumpEnsemble s;
      s.base = j.at("base").get<double>();
      s.rate = j.at("rate").get<double>();
      for (const auto& st : j.at("stages")) {
        s.stages.push_back(Stump{st.at("feature").get<std::size_t>(), st.at("threshold").get<double>(),
                                 st.at("left").get<double>(), st.at("right").get<double>()});
      }
      handle = RegressorHandle(std::move(s), dims);
      return;
    }
    case RegressorKind::mean:
      handle = RegressorHandle(RegressorHandle::MeanOnly{j.at("value").get<double>()}, dims);
      return;
  }
}

}  // namespace surreval
