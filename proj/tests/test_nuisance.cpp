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

#include <doctest.h>

#include <cmath>

#include "surreval/nuisance.hpp"
#include "surreval/rng.hpp"
#include "surreval/simulation.hpp"

using namespace surreval;

TEST_CASE("expit saturates without overflow") {
  CHECK(expit(0.0) == 0.5);
  // 1 - exp(-40) is not representable below 1 in binary64; it rounds to 1.
  const double hi = expit(40.0);
  CHECK(hi <= 1.0);
  CHECK(expit(36.0) < 1.0);
  CHECK(hi > 1.0 - 1e-15);
  const double lo = expit(-40.0);
  CHECK(lo > 0.0);
  CHECK(lo < 1e-15);
  CHECK(std::isfinite(expit(1e6)));
  CHECK(expit(-1e6) >= 0.0);
  CHECK(logit(expit(0.7)) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("intercept-only logistic fit recovers logit of the mean") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(10, 1);
  std::vector<double> y{1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
  const auto m = fit_logistic(x, y);
  CHECK(m.converged);
  CHECK(m.intercept == doctest::Approx(std::log(0.6 / 0.4)).epsilon(1e-6));
  CHECK(std::abs(m.coefficients[0]) < 1e-9);
}

TEST_CASE("logistic fit rejects a single class without ridge") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, 2);
  std::vector<double> y(20, 1.0);
  LogisticConfig cfg;
  cfg.ridge = 0.0;
  CHECK_THROWS_AS(fit_logistic(x, y, cfg), SeparationError);
}

TEST_CASE("logistic fit rejects separable classes without ridge") {
  Eigen::MatrixXd x(6, 1);
  x << -3, -2, -1, 1, 2, 3;
  std::vector<double> y{0, 0, 0, 1, 1, 1};
  LogisticConfig cfg;
  cfg.ridge = 0.0;
  CHECK_THROWS_AS(fit_logistic(x, y, cfg), SeparationError);
}

TEST_CASE("logistic objective never decreases") {
  const auto g = gen_sim61(2000, 11);
  const auto m = fit_logistic(g.table.covariates, *g.table.outcome);
  REQUIRE(m.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < m.objective_trace.size(); ++i)
    CHECK(m.objective_trace[i] >= m.objective_trace[i - 1] - 1e-15);
}

TEST_CASE("propensity coefficients are consistent at n = 1e5") {
  const auto g = gen_sim61(100000, 12);
  std::vector<double> a(g.table.treatment.begin(), g.table.treatment.end());
  const auto m = fit_logistic(g.table.covariates, a);
  CHECK(std::abs(m.coefficients[0] - 0.1) <= 0.05);
  CHECK(std::abs(m.coefficients[1] - 0.1) <= 0.05);
}

TEST_CASE("arm regressions") {
  SUBCASE("mean-only predicts the arm constant") {
    auto t = gen_sim61(200, 1).table;
    for (std::size_t i = 0; i < t.rows(); ++i)
      if (t.treatment[i] == 1) (*t.outcome)[i] = 0.37;
    const auto h = fit_arm_regression(t, Endpoint::outcome, 1, RegressorKind::mean, {});
    for (double p : h.predict_rows(t.covariates)) CHECK(p == doctest::Approx(0.37).epsilon(1e-14));
  }
  SUBCASE("logistic predictions lie in (0, 1)") {
    const auto t = gen_sim61(500, 2).table;
    const auto h = fit_arm_regression(t, Endpoint::outcome, 0, RegressorKind::logistic, {});
    for (double p : h.predict_rows(t.covariates)) CHECK((p > 0.0 && p < 1.0));
  }
  SUBCASE("arm-1 outcome fit tracks the generating mean at n = 1e5") {
    const auto t = gen_sim61(100000, 3).table;
    const auto h = fit_arm_regression(t, Endpoint::outcome, 1, RegressorKind::logistic, {});
    Rng rng(99, 0);
    double err = 0.0;
    const int grid = 2000;
    for (int i = 0; i < grid; ++i) {
      Eigen::RowVectorXd x(2);
      x << rng.normal(0, 0.2), rng.normal(0, 0.2);
      err += std::abs(h.predict(x) - expit(0.3 * x[0] + 0.1 * x[1]));
    }
    CHECK(err / grid < 0.02);
  }
  SUBCASE("an empty arm is an error") {
    auto t = gen_sim61(50, 4).table;
    for (auto& a : t.treatment) a = 0;
    CHECK_THROWS_AS(fit_arm_regression(t, Endpoint::outcome, 1, RegressorKind::logistic, {}), FitError);
  }
}

TEST_CASE("stump ensemble") {
  SUBCASE("fits a step function") {
    Rng rng(5, 0);
    const int n = 400;
    Eigen::MatrixXd x(n, 2);
    std::vector<double> y(n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      x(i, 0) = rng.uniform();
      x(i, 1) = rng.uniform();
      y[i] = x(i, 0) > 0.4 ? 2.0 : -1.0;
      mean += y[i] / n;
    }
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean) / n;
    StumpConfig cfg;
    cfg.rounds = 50;
    const auto m = fit_stump_ensemble(x, y, cfg);
    CHECK(m.mse_trace.back() < 0.01 * var);
    for (std::size_t i = 1; i < m.mse_trace.size(); ++i) CHECK(m.mse_trace[i] <= m.mse_trace[i - 1] + 1e-12);
  }
  SUBCASE("rounds = 0 is an error") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, 1);
    std::vector<double> y(20, 1.0);
    StumpConfig cfg;
    cfg.rounds = 0;
    CHECK_THROWS(fit_stump_ensemble(x, y, cfg));
  }
  SUBCASE("constant target") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(30, 2);
    std::vector<double> y(30, 0.25);
    const auto m = fit_stump_ensemble(x, y);
    for (Eigen::Index i = 0; i < x.rows(); ++i) CHECK(m.predict(x.row(i)) == doctest::Approx(0.25));
  }
}

TEST_CASE("propensity clipping") {
  CHECK(clip_propensity(0.0001, 0.01) == 0.01);
  CHECK(clip_propensity(0.5, 0.01) == 0.5);
  CHECK(clip_propensity(0.9999, 0.01) == 0.99);
  CHECK_THROWS(clip_propensity(0.5, 0.0));
  CHECK_THROWS(clip_propensity(0.5, 0.5));
}

TEST_CASE("regressor kinds parse") {
  CHECK(regressor_kind_from_string("logistic") == RegressorKind::logistic);
  CHECK(regressor_kind_from_string("stumps") == RegressorKind::stumps);
  CHECK(regressor_kind_from_string("mean") == RegressorKind::mean);
  CHECK_THROWS(regressor_kind_from_string("xgboost"));
}
