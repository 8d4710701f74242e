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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace surreval {

// Raised for malformed input. Row and column are 1-based; 0 means "not
// applicable".
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t row = 0, std::string column = {})
      : std::runtime_error(what), row_(row), column_(std::move(column)) {}
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

enum class Endpoint { outcome, surrogate };

const char* to_string(Endpoint endpoint);

// Rows of (X, A, Y and/or S). An outcome-only table plays the role of the
// labeled dataset, a surrogate-only table the unlabeled one, and a table with
// both columns the unified single-dataset case.
struct ObservationTable {
  Eigen::MatrixXd covariates;  // n x d
  std::vector<int> treatment;
  std::optional<std::vector<double>> outcome;
  std::optional<std::vector<double>> surrogate;

  std::size_t rows() const { return treatment.size(); }
  std::size_t dims() const { return static_cast<std::size_t>(covariates.cols()); }
  bool has(Endpoint endpoint) const;
  const std::vector<double>& column(Endpoint endpoint) const;

  // Rows in the order given; indices may repeat (bootstrap resamples).
  ObservationTable subset(std::span<const std::size_t> rows) const;
  // Drops the named endpoint column.
  ObservationTable without(Endpoint endpoint) const;
};

// Unobservable potential outcomes, available only for simulated data.
struct PotentialTable {
  std::vector<double> y0, y1, s0, s1;
};

// Throws DataError naming the first offending row/column. Returns the table
// unchanged on success.
const ObservationTable& validate(const ObservationTable& table);

// True iff Y = A*Y(1) + (1-A)*Y(0) and S = A*S(1) + (1-A)*S(0) hold exactly on
// every row where the observed column is present.
bool satisfies_consistency(const ObservationTable& table, const PotentialTable& potentials);

struct SplitPlan {
  std::uint64_t seed = 0;
  std::vector<std::size_t> main_indices;
  std::vector<std::size_t> aux_indices;
  std::vector<std::vector<std::size_t>> folds;
};

inline constexpr double kDefaultMainFraction = 0.5;

// Random main/auxiliary partition of {0..n-1}. The main part has
// floor(fraction * n) rows, clamped to [1, n-1]. Both index lists are sorted.
SplitPlan split_half(std::size_t n, double fraction, std::uint64_t seed);
SplitPlan split_half(const ObservationTable& table, double fraction, std::uint64_t seed);

// K disjoint sorted folds covering {0..n-1}. The first n % K folds receive the
// extra rows.
std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t folds, std::uint64_t seed);

// Seeded permutation of {0..n-1} (Fisher-Yates on the counter-based RNG).
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

// CSV with header x1..xd, a, optional y, optional s. Column order is free.
ObservationTable read_csv(const std::string& path);
ObservationTable parse_csv(const std::string& text, const std::string& source = "<memory>");
std::string to_csv(const ObservationTable& table);

}  // namespace surreval
