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

#include "surreval/influence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "surreval/policy.hpp"

namespace surreval {

const char* to_string(Metric metric) {
  switch (metric) {
    case Metric::regret:
      return "regret";
    case Metric::gain:
      return "gain";
    case Metric::efficiency:
      return "efficiency";
  }
  return "?";
}

Metric metric_from_string(const std::string& name) {
  if (name == "regret" || name == "R") return Metric::regret;
  if (name == "gain" || name == "G") return Metric::gain;
  if (name == "efficiency" || name == "V") return Metric::efficiency;
  throw std::invalid_argument("unknown metric '" + name + "' (expected regret|gain|efficiency)");
}

void NuisanceBundle::check() const {
  const std::size_t n = mu0.size();
  for (std::size_t len : {mu1.size(), e.size(), tau_y.size(), tau_s.size(), pi_y.size(), pi_s.size(),
                          threshold_y.size(), threshold_s.size()}) {
    if (len != n) throw std::logic_error("NuisanceBundle: vectors differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(e[i] > 0.0 && e[i] < 1.0)) throw std::logic_error("NuisanceBundle: propensity outside (0, 1)");
    if (pi_y[i] != assign_treatment(tau_y[i], threshold_y[i]) || pi_s[i] != assign_treatment(tau_s[i], threshold_s[i])) {
      throw std::logic_error("NuisanceBundle: policy does not match its CATE and threshold at row " +
                             std::to_string(i + 1));
    }
  }
}

double ipw_residual(int a, double y, double e, double mu0, double mu1) {
  const double weight = a == 1 ? 1.0 / e : -1.0 / (1.0 - e);
  return weight * (y - (a == 1 ? mu1 : mu0));
}

namespace {
double dr_with_weight(double w, const NuisanceBundle& b, std::size_t i, int a, double y) {
  return w * ipw_residual(a, y, b.e[i], b.mu0[i], b.mu1[i]) + b.tau_y[i] * w;
}
}  // namespace

double phi_regret(const NuisanceBundle& b, std::size_t i, int a, double y) {
  return dr_with_weight(static_cast<double>(b.pi_y[i] - b.pi_s[i]), b, i, a, y);
}

double omega_gain(const NuisanceBundle& b, std::size_t i, int a, double y) {
  return dr_with_weight(static_cast<double>(b.pi_s[i]), b, i, a, y);
}

double psi_efficiency(const NuisanceBundle& b, std::size_t i, int a, double y) {
  return dr_with_weight(static_cast<double>(b.pi_s[i]) - b.lambda, b, i, a, y);
}

double dr_ate_term(const NuisanceBundle& b, std::size_t i, int a, double y) {
  return ipw_residual(a, y, b.e[i], b.mu0[i], b.mu1[i]) + b.tau_y[i];
}

double influence(Metric metric, const NuisanceBundle& b, std::size_t i, int a, double y) {
  switch (metric) {
    case Metric::regret:
      return phi_regret(b, i, a, y);
    case Metric::gain:
      return omega_gain(b, i, a, y);
    case Metric::efficiency:
      return psi_efficiency(b, i, a, y);
  }
  throw std::logic_error("influence: unknown metric");
}

std::vector<double> influence_values(Metric metric, const ObservationTable& main, const NuisanceBundle& bundle) {
  const auto& y = main.column(Endpoint::outcome);
  if (bundle.rows() != main.rows()) throw std::invalid_argument("influence_values: bundle is not row-aligned with data");
  std::vector<double> out(main.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = influence(metric, bundle, i, main.treatment[i], y[i]);
  return out;
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

MetricEstimate summarize(std::span<const double> values, Metric metric, double lambda, double level) {
  if (values.empty()) throw std::invalid_argument("summarize: empty main sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("summarize: level must lie in (0, 1)");
  MetricEstimate est;
  est.metric = metric;
  est.lambda = lambda;
  est.level = level;
  est.n_main = values.size();
  const double n = static_cast<double>(values.size());
  const bool constant = std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
  if (constant) {
    est.point = values.front() + 0.0;  // no negative zero
    est.analytic_se = 0.0;
  } else {
    double sum = 0.0;
    for (double v : values) sum += v;
    est.point = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - est.point) * (v - est.point);
    est.analytic_se = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  }
  const double z = normal_quantile(0.5 + 0.5 * level);
  est.ci = {est.point - z * est.analytic_se, est.point + z * est.analytic_se};
  return est;
}

MetricEstimate estimate_metric(const ObservationTable& main, const NuisanceBundle& bundle, Metric metric, double level) {
  const auto values = influence_values(metric, main, bundle);
  return summarize(values, metric, bundle.lambda, level);
}

void to_json(nlohmann::json& j, const MetricEstimate& est) {
  j = nlohmann::json{{"metric", to_string(est.metric)},
                     {"lambda", est.lambda},
                     {"point", est.point},
                     {"analytic_se", est.analytic_se},
                     {"level", est.level},
                     {"ci", {est.ci.lo, est.ci.hi}},
                     {"n_main", est.n_main}};
  if (est.bootstrap) {
    j["bootstrap_se"] = est.bootstrap->se;
    j["bootstrap_ci"] = {est.bootstrap->ci.lo, est.bootstrap->ci.hi};
    j["B_effective"] = est.bootstrap->b_effective;
    j["B_skipped"] = est.bootstrap->skipped;
  } else {
    j["bootstrap_se"] = nullptr;
    j["bootstrap_ci"] = nullptr;
    j["B_effective"] = 0;
  }
}

std::vector<BiasPair> product_bias(const NuisanceBundle& est, const NuisanceBundle& truth, const ConditionalLaw& law) {
  const std::size_t n = law.e.size();
  if (est.rows() != n || truth.rows() != n || law.mu0.size() != n || law.mu1.size() != n) {
    throw std::invalid_argument("product_bias: grid sizes differ");
  }
  std::vector<BiasPair> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double exact = 0.0;
    for (int a = 0; a <= 1; ++a) {
      const double pa = a == 1 ? law.e[i] : 1.0 - law.e[i];
      const double p1 = a == 1 ? law.mu1[i] : law.mu0[i];
      for (int y = 0; y <= 1; ++y) {
        const double py = y == 1 ? p1 : 1.0 - p1;
        const double diff = phi_regret(est, i, a, y) - phi_regret(truth, i, a, y);
        exact += pa * py * diff;
      }
    }
    const double tau = law.mu1[i] - law.mu0[i];
    const double e_err = est.e[i] - law.e[i];
    const double policy_error =
        static_cast<double>(est.pi_y[i] - truth.pi_y[i]) - static_cast<double>(est.pi_s[i] - truth.pi_s[i]);
    const double product = e_err / est.e[i] * (est.mu1[i] - law.mu1[i]) +
                           e_err / (1.0 - est.e[i]) * (est.mu0[i] - law.mu0[i]);
    out[i] = {exact, tau * policy_error + static_cast<double>(est.pi_y[i] - est.pi_s[i]) * product};
  }
  return out;
}

}  // namespace surreval
