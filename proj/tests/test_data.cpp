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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "surreval/data.hpp"
#include "surreval/rng.hpp"

using namespace surreval;

namespace {
ObservationTable toy(std::vector<int> a, std::vector<double> y) {
  ObservationTable t;
  t.covariates = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.size()), 2);
  t.treatment = std::move(a);
  t.outcome = std::move(y);
  return t;
}

std::string message_of(const ObservationTable& t) {
  try {
    validate(t);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST_CASE("validate accepts a well-formed table") {
  CHECK_NOTHROW(validate(toy({0, 1, 1}, {1, 0, 1})));
}

TEST_CASE("validate names the non-binary treatment row") {
  const auto t = toy({0, 2, 1}, {1, 0, 1});
  CHECK(message_of(t) == "non-binary treatment at row 2");
  try {
    validate(t);
  } catch (const DataError& e) {
    CHECK(e.row() == 2);
  }
}

TEST_CASE("validate locates a NaN outcome") {
  auto t = toy({0, 1, 1}, {1, std::nan(""), 1});
  const std::string msg = message_of(t);
  CHECK(msg.find("row 2") != std::string::npos);
  CHECK(msg.find("y") != std::string::npos);
}

TEST_CASE("validate rejects mismatched lengths and missing endpoints") {
  auto t = toy({0, 1, 1}, {1, 0});
  CHECK_THROWS_AS(validate(t), DataError);
  auto u = toy({0, 1}, {1, 0});
  u.outcome.reset();
  CHECK_THROWS_AS(validate(u), DataError);
}

TEST_CASE("split_half gives disjoint covering halves") {
  const auto plan = split_half(10, 0.5, 7);
  CHECK(plan.main_indices.size() == 5);
  CHECK(plan.aux_indices.size() == 5);
  std::set<std::size_t> all(plan.main_indices.begin(), plan.main_indices.end());
  all.insert(plan.aux_indices.begin(), plan.aux_indices.end());
  CHECK(all.size() == 10);
  CHECK(std::is_sorted(plan.main_indices.begin(), plan.main_indices.end()));
}

TEST_CASE("split_half is deterministic in the seed") {
  const auto a = split_half(10, 0.5, 7);
  const auto b = split_half(10, 0.5, 7);
  CHECK(a.main_indices == b.main_indices);
  CHECK(a.aux_indices == b.aux_indices);
  const auto c = split_half(1000, 0.5, 8);
  const auto d = split_half(1000, 0.5, 9);
  CHECK(c.main_indices != d.main_indices);
}

TEST_CASE("split_half rejects n = 1") { CHECK_THROWS(split_half(1, 0.5, 7)); }

TEST_CASE("kfold sizes") {
  const auto even = kfold(10, 5, 1);
  REQUIRE(even.size() == 5);
  for (const auto& f : even) CHECK(f.size() == 2);

  const auto odd = kfold(11, 5, 1);
  std::vector<std::size_t> sizes;
  for (const auto& f : odd) sizes.push_back(f.size());
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{2, 2, 2, 2, 3});
  std::set<std::size_t> all;
  for (const auto& f : odd) all.insert(f.begin(), f.end());
  CHECK(all.size() == 11);

  CHECK_THROWS(kfold(3, 5, 1));
  CHECK_THROWS(kfold(10, 1, 1));
}

TEST_CASE("permutation is a bijection") {
  auto p = permutation(257, 3);
  std::sort(p.begin(), p.end());
  std::vector<std::size_t> id(257);
  std::iota(id.begin(), id.end(), 0);
  CHECK(p == id);
}

TEST_CASE("csv round trip with free column order") {
  const std::string text = "y,a,x2,x1,s\n1,0,0.5,-1.25,0\n0,1,2,3,1\n";
  const auto t = parse_csv(text);
  REQUIRE(t.rows() == 2);
  CHECK(t.dims() == 2);
  CHECK(t.covariates(0, 0) == -1.25);
  CHECK(t.covariates(0, 1) == 0.5);
  CHECK(t.treatment == std::vector<int>{0, 1});
  CHECK(*t.outcome == std::vector<double>{1, 0});
  CHECK(*t.surrogate == std::vector<double>{0, 1});
  const auto back = parse_csv(to_csv(t));
  CHECK(back.covariates == t.covariates);
  CHECK(*back.outcome == *t.outcome);
}

TEST_CASE("csv schema errors") {
  CHECK_THROWS_AS(parse_csv("x1,y\n0,1\n"), DataError);           // missing a
  CHECK_THROWS_AS(parse_csv("x1,a,y,z\n0,1,1,2\n"), DataError);   // unknown column
  CHECK_THROWS_AS(parse_csv("x1,a,a,y\n0,1,1,2\n"), DataError);   // duplicate
  CHECK_THROWS_AS(parse_csv("x1,a,y\n0,1\n"), DataError);         // short row
  CHECK_THROWS_AS(parse_csv("x1,a,y\n0,1,abc\n"), DataError);     // not a number
  try {
    parse_csv("x1,a,y\n0,1,1\n0,3,1\n");
    FAIL("expected a schema error");
  } catch (const DataError& e) {
    CHECK(e.row() == 2);
  }
}

TEST_CASE("subset and without") {
  const auto t = parse_csv("x1,a,y,s\n1,0,1,0\n2,1,0,1\n3,1,1,1\n");
  const std::size_t rows[] = {2, 2, 0};
  const auto s = t.subset(rows);
  CHECK(s.rows() == 3);
  CHECK(s.covariates(1, 0) == 3.0);
  CHECK((*s.outcome)[2] == 1.0);
  const auto no_s = t.without(Endpoint::surrogate);
  CHECK(!no_s.has(Endpoint::surrogate));
  CHECK(no_s.has(Endpoint::outcome));
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 5; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  Rng u(1, 2);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    CHECK_FALSE((v < 0.0 || v >= 1.0));
    sum += v;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(derive_seed(5, 1) != derive_seed(5, 2));
  CHECK(derive_seed(5, 1) == derive_seed(5, 1));
}
