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

#include "surreval/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "surreval/rng.hpp"

namespace surreval {

const char* to_string(Endpoint endpoint) {
  return endpoint == Endpoint::outcome ? "outcome" : "surrogate";
}

bool ObservationTable::has(Endpoint endpoint) const {
  return endpoint == Endpoint::outcome ? outcome.has_value() : surrogate.has_value();
}

const std::vector<double>& ObservationTable::column(Endpoint endpoint) const {
  const auto& col = endpoint == Endpoint::outcome ? outcome : surrogate;
  if (!col) throw DataError(std::string("table has no ") + to_string(endpoint) + " column");
  return *col;
}

ObservationTable ObservationTable::subset(std::span<const std::size_t> idx) const {
  ObservationTable out;
  out.covariates.resize(static_cast<Eigen::Index>(idx.size()), covariates.cols());
  out.treatment.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.covariates.row(static_cast<Eigen::Index>(r)) = covariates.row(static_cast<Eigen::Index>(idx[r]));
    out.treatment.push_back(treatment[idx[r]]);
  }
  auto pick = [&](const std::optional<std::vector<double>>& src) -> std::optional<std::vector<double>> {
    if (!src) return std::nullopt;
    std::vector<double> v;
    v.reserve(idx.size());
    for (std::size_t i : idx) v.push_back((*src)[i]);
    return v;
  };
  out.outcome = pick(outcome);
  out.surrogate = pick(surrogate);
  return out;
}

ObservationTable ObservationTable::without(Endpoint endpoint) const {
  ObservationTable out = *this;
  if (endpoint == Endpoint::outcome) {
    out.outcome.reset();
  } else {
    out.surrogate.reset();
  }
  return out;
}

namespace {

std::string at(std::size_t row, const std::string& column) {
  return " at row " + std::to_string(row) + ", column " + column;
}

void check_column(const std::vector<double>& v, std::size_t n, const std::string& name) {
  if (v.size() != n) {
    throw DataError("dimension mismatch: column " + name + " has " + std::to_string(v.size()) +
                        " entries, expected " + std::to_string(n),
                    0, name);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) throw DataError("non-finite value" + at(i + 1, name), i + 1, name);
  }
}

}  // namespace

const ObservationTable& validate(const ObservationTable& table) {
  const std::size_t n = table.treatment.size();
  if (n == 0) throw DataError("table has no rows");
  if (table.covariates.cols() < 1) throw DataError("table has no covariate columns");
  if (static_cast<std::size_t>(table.covariates.rows()) != n) {
    throw DataError("dimension mismatch: covariates have " + std::to_string(table.covariates.rows()) +
                    " rows, treatment has " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (table.treatment[i] != 0 && table.treatment[i] != 1) {
      throw DataError("non-binary treatment at row " + std::to_string(i + 1), i + 1, "a");
    }
  }
  for (Eigen::Index j = 0; j < table.covariates.cols(); ++j) {
    for (Eigen::Index i = 0; i < table.covariates.rows(); ++i) {
      if (!std::isfinite(table.covariates(i, j))) {
        const std::string name = "x" + std::to_string(j + 1);
        throw DataError("non-finite value" + at(static_cast<std::size_t>(i) + 1, name),
                        static_cast<std::size_t>(i) + 1, name);
      }
    }
  }
  if (!table.outcome && !table.surrogate) throw DataError("table has neither outcome nor surrogate column");
  if (table.outcome) check_column(*table.outcome, n, "y");
  if (table.surrogate) check_column(*table.surrogate, n, "s");
  return table;
}

bool satisfies_consistency(const ObservationTable& table, const PotentialTable& pot) {
  const std::size_t n = table.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const bool treated = table.treatment[i] == 1;
    if (table.outcome && (*table.outcome)[i] != (treated ? pot.y1[i] : pot.y0[i])) return false;
    if (table.surrogate && (*table.surrogate)[i] != (treated ? pot.s1[i] : pot.s0[i])) return false;
  }
  return true;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed, 0x5eed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

SplitPlan split_half(std::size_t n, double fraction, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("split_half needs at least 2 rows, got " + std::to_string(n));
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split fraction must lie in (0, 1)");
  auto perm = permutation(n, seed);
  std::size_t n_main = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  n_main = std::clamp<std::size_t>(n_main, 1, n - 1);
  SplitPlan plan;
  plan.seed = seed;
  plan.main_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_main));
  plan.aux_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_main), perm.end());
  std::sort(plan.main_indices.begin(), plan.main_indices.end());
  std::sort(plan.aux_indices.begin(), plan.aux_indices.end());
  return plan;
}

SplitPlan split_half(const ObservationTable& table, double fraction, std::uint64_t seed) {
  return split_half(table.rows(), fraction, seed);
}

std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw std::invalid_argument("fold count " + std::to_string(k) + " out of range [2, " + std::to_string(n) + "]");
  }
  auto perm = permutation(n, seed);
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

// ---- CSV ----

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t row, const std::string& column, const std::string& source) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, value);
  if (field.empty() || res.ec != std::errc{} || res.ptr != last) {
    throw DataError(source + ": cannot parse '" + std::string(field) + "'" + at(row, column), row, column);
  }
  if (!std::isfinite(value)) throw DataError(source + ": non-finite value" + at(row, column), row, column);
  return value;
}

}  // namespace

ObservationTable parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty input");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const auto header = split_fields(line);

  std::map<std::size_t, std::size_t> x_cols;  // covariate number (1-based) -> field
  std::optional<std::size_t> a_col, y_col, s_col;
  for (std::size_t f = 0; f < header.size(); ++f) {
    const std::string name(header[f]);
    auto claim = [&](std::optional<std::size_t>& slot) {
      if (slot) throw DataError(source + ": duplicate column '" + name + "'", 0, name);
      slot = f;
    };
    if (name == "a") {
      claim(a_col);
    } else if (name == "y") {
      claim(y_col);
    } else if (name == "s") {
      claim(s_col);
    } else if (name.size() > 1 && name[0] == 'x' &&
               std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      const std::size_t j = std::stoul(name.substr(1));
      if (j == 0 || !x_cols.emplace(j, f).second) throw DataError(source + ": bad covariate column '" + name + "'", 0, name);
    } else {
      throw DataError(source + ": unknown column '" + name + "'", 0, name);
    }
  }
  if (!a_col) throw DataError(source + ": missing required column 'a'", 0, "a");
  if (x_cols.empty()) throw DataError(source + ": no covariate columns x1..xd", 0, "x1");
  if (x_cols.rbegin()->first != x_cols.size()) {
    throw DataError(source + ": covariate columns must be x1..xd without gaps", 0, "x" + std::to_string(x_cols.size()));
  }
  if (!y_col && !s_col) throw DataError(source + ": need at least one of columns 'y', 's'");

  const std::size_t d = x_cols.size();
  std::vector<double> xs;
  std::vector<int> a;
  std::vector<double> y, s;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError(source + ": row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                          " fields, header has " + std::to_string(header.size()),
                      row);
    }
    for (const auto& [j, f] : x_cols) xs.push_back(parse_number(fields[f], row, "x" + std::to_string(j), source));
    const double av = parse_number(fields[*a_col], row, "a", source);
    if (av != 0.0 && av != 1.0) throw DataError(source + ": non-binary treatment at row " + std::to_string(row), row, "a");
    a.push_back(static_cast<int>(av));
    if (y_col) y.push_back(parse_number(fields[*y_col], row, "y", source));
    if (s_col) s.push_back(parse_number(fields[*s_col], row, "s", source));
  }
  if (row == 0) throw DataError(source + ": no data rows");

  ObservationTable table;
  table.covariates.resize(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < row; ++i)
    for (std::size_t j = 0; j < d; ++j)
      table.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xs[i * d + j];
  table.treatment = std::move(a);
  if (y_col) table.outcome = std::move(y);
  if (s_col) table.surrogate = std::move(s);
  validate(table);
  return table;
}

ObservationTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

namespace {
void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}
}  // namespace

std::string to_csv(const ObservationTable& table) {
  std::string out;
  for (std::size_t j = 0; j < table.dims(); ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "a";
  if (table.outcome) out += ",y";
  if (table.surrogate) out += ",s";
  out += '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.dims(); ++j) {
      append_number(out, table.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out += ',';
    }
    out += table.treatment[i] ? '1' : '0';
    if (table.outcome) {
      out += ',';
      append_number(out, (*table.outcome)[i]);
    }
    if (table.surrogate) {
      out += ',';
      append_number(out, (*table.surrogate)[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace surreval
