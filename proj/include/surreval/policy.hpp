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

// CATE vectors, empirical quantile thresholds and the top-lambda plug-in
// treatment rules built from them.
//
// Ties are never treated: a row is assigned iff tau > threshold and tau > 0,
// both strict. The unconstrained rule (lambda = 1) uses the -infinity
// threshold so it runs through the same code as the budgeted one.

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "surreval/data.hpp"

namespace surreval {

inline constexpr double kNoBudgetCut = -std::numeric_limits<double>::infinity();

struct CateVector {
  std::vector<double> values;
  Endpoint endpoint = Endpoint::outcome;
};

CateVector cate(std::span<const double> mu1, std::span<const double> mu0, Endpoint endpoint = Endpoint::outcome);

// Smallest observed t with (1/n) #{tau_i <= t} >= 1 - lambda; kNoBudgetCut
// when lambda == 1. Rejects lambda outside (0, 1] and empty input.
double empirical_quantile(std::span<const double> tau, double lambda);

// Same, over an already sorted sample (ascending).
double empirical_quantile_sorted(std::span<const double> sorted_tau, double lambda);

void check_budget(double lambda);

inline int assign_treatment(double tau, double threshold) { return (tau > threshold && tau > 0.0) ? 1 : 0; }

struct BudgetPolicy {
  double lambda = 1.0;
  double threshold = kNoBudgetCut;
  std::vector<int> assignments;

  double treated_fraction() const;
};

BudgetPolicy budget_policy(std::span<const double> tau, double lambda, double threshold);
// Threshold from the same vector.
BudgetPolicy budget_policy(std::span<const double> tau, double lambda);

// Among rows treated by at least one policy, the fraction treated by both.
// Two policies that treat nobody agree completely (1.0).
double policy_agreement(const BudgetPolicy& p1, const BudgetPolicy& p2);

// CSV with columns row,tau,assignment (rows numbered from 1).
std::string policy_csv(std::span<const double> tau, const BudgetPolicy& policy);

}  // namespace surreval
