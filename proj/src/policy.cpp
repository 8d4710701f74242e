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

#include "surreval/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace surreval {

CateVector cate(std::span<const double> mu1, std::span<const double> mu0, Endpoint endpoint) {
  if (mu1.size() != mu0.size()) throw std::invalid_argument("cate: prediction vectors differ in length");
  CateVector out{std::vector<double>(mu1.size()), endpoint};
  for (std::size_t i = 0; i < mu1.size(); ++i) out.values[i] = mu1[i] - mu0[i];
  return out;
}

void check_budget(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("budget lambda must lie in (0, 1], got " + std::to_string(lambda));
  }
}

double empirical_quantile_sorted(std::span<const double> sorted, double lambda) {
  check_budget(lambda);
  if (sorted.empty()) throw std::invalid_argument("empirical_quantile: empty input");
  if (lambda == 1.0) return kNoBudgetCut;
  const std::size_t n = sorted.size();
  const double target = 1.0 - lambda;
  const double nd = static_cast<double>(n);
  // Smallest count k with k / n >= 1 - lambda, evaluated exactly as written.
  auto k = static_cast<std::size_t>(std::ceil(target * nd));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && static_cast<double>(k - 1) / nd >= target) --k;
  while (k < n && static_cast<double>(k) / nd < target) ++k;
  return sorted[k - 1];
}

double empirical_quantile(std::span<const double> tau, double lambda) {
  check_budget(lambda);
  if (tau.empty()) throw std::invalid_argument("empirical_quantile: empty input");
  if (lambda == 1.0) return kNoBudgetCut;
  std::vector<double> sorted(tau.begin(), tau.end());
  std::sort(sorted.begin(), sorted.end());
  return empirical_quantile_sorted(sorted, lambda);
}

double BudgetPolicy::treated_fraction() const {
  if (assignments.empty()) return 0.0;
  std::size_t treated = 0;
  for (int a : assignments) treated += static_cast<std::size_t>(a);
  return static_cast<double>(treated) / static_cast<double>(assignments.size());
}

BudgetPolicy budget_policy(std::span<const double> tau, double lambda, double threshold) {
  check_budget(lambda);
  BudgetPolicy p{lambda, threshold, std::vector<int>(tau.size())};
  for (std::size_t i = 0; i < tau.size(); ++i) p.assignments[i] = assign_treatment(tau[i], threshold);
  return p;
}

BudgetPolicy budget_policy(std::span<const double> tau, double lambda) {
  return budget_policy(tau, lambda, empirical_quantile(tau, lambda));
}

double policy_agreement(const BudgetPolicy& p1, const BudgetPolicy& p2) {
  if (p1.assignments.size() != p2.assignments.size()) {
    throw std::invalid_argument("policy_agreement: policies differ in length");
  }
  std::size_t either = 0, both = 0;
  for (std::size_t i = 0; i < p1.assignments.size(); ++i) {
    const bool a = p1.assignments[i] != 0;
    const bool b = p2.assignments[i] != 0;
    either += (a || b) ? 1 : 0;
    both += (a && b) ? 1 : 0;
  }
  if (either == 0) return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

std::string policy_csv(std::span<const double> tau, const BudgetPolicy& policy) {
  if (tau.size() != policy.assignments.size()) throw std::invalid_argument("policy_csv: length mismatch");
  std::string out = "row,tau,assignment\n";
  char buf[64];
  for (std::size_t i = 0; i < tau.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out.append(buf, std::to_chars(buf, buf + sizeof buf, tau[i]).ptr);
    out += ',';
    out += policy.assignments[i] ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace surreval
