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

// Acceptance checks. Prints one PASS/FAIL line per criterion; detail lines
// start with two spaces. `surreval_acceptance 3` runs criterion 3 only.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "surreval/crossfit.hpp"
#include "surreval/policy.hpp"
#include "surreval/rng.hpp"
#include "surreval/simulation.hpp"

using namespace surreval;

namespace {

// ---- tolerances ----
constexpr double kBiasTol = 0.006;
constexpr double kSdRelTol = 0.25;
constexpr double kCoverageLo = 0.93;
constexpr double kCoverageHi = 0.97;
constexpr double kOracleSeTol = 4.0;
constexpr double kRobustTol = 0.01;
constexpr double kBiasIdentityTol = 1e-10;
constexpr double kCorrTol = 0.004;
constexpr double kIdentityTol = 1e-12;

constexpr std::uint64_t kSeed = 20240601;
constexpr std::size_t kOracleDraws = kDefaultOracleDraws;

struct TableCell {
  Metric metric;
  double lambda, bias, sd, cp95;
};

// Reference bias, SD and CP95 at n = 1000.
const TableCell kTable[] = {
    {Metric::regret, 0.1, -0.0009, 0.0264, 0.9495},     {Metric::regret, 0.2, -0.0016, 0.0351, 0.9448},
    {Metric::regret, 0.3, -0.0019, 0.0385, 0.9443},     {Metric::regret, 0.4, -0.0018, 0.0395, 0.9412},
    {Metric::efficiency, 0.1, -0.0020, 0.0202, 0.9469}, {Metric::efficiency, 0.2, -0.0030, 0.0267, 0.9456},
    {Metric::efficiency, 0.3, -0.0038, 0.0294, 0.9438}, {Metric::efficiency, 0.4, -0.0044, 0.0315, 0.9392},
    {Metric::gain, 0.1, -0.0020, 0.0213, 0.9482},       {Metric::gain, 0.2, -0.0031, 0.0296, 0.9446},
    {Metric::gain, 0.3, -0.0039, 0.0333, 0.9407},       {Metric::gain, 0.4, -0.0046, 0.0344, 0.9401},
};
constexpr TableCell kTableUnconstrained{Metric::regret, 1.0, -0.0018, 0.0396, 0.9410};

const char* mark(bool ok) { return ok ? "ok  " : "FAIL"; }

bool table_rows(const ReplicationReport& report) {
  bool all = true;
  for (const auto& cell : kTable) {
    const auto& row = report.row(cell.metric, cell.lambda);
    const bool bias_ok = std::abs(row.bias - cell.bias) <= kBiasTol;
    const bool sd_ok = std::abs(row.sd - cell.sd) <= kSdRelTol * cell.sd;
    const bool cp_ok = row.cp95 >= kCoverageLo && row.cp95 <= kCoverageHi;
    all = all && bias_ok && sd_ok && cp_ok;
    std::printf("  %s %-10s lambda=%.1f  bias %+.4f (table %+.4f) %s  sd %.4f (table %.4f, ratio %.2f) %s  cp95 %.3f %s\n",
                mark(bias_ok && sd_ok && cp_ok), to_string(cell.metric), cell.lambda, row.bias, cell.bias,
                bias_ok ? "ok" : "off", row.sd, cell.sd, row.sd / cell.sd, sd_ok ? "ok" : "off", row.cp95,
                cp_ok ? "ok" : "off");
  }
  return all;
}

bool criterion1() {
  ReplicationConfig cfg;
  cfg.dgp.seed = kSeed;
  cfg.dgp.n = 1000;
  cfg.reps = 1000;
  cfg.oracle_draws = kOracleDraws;
  const auto report = run_replications(cfg);
  std::printf("  single dataset, K = 2, n = 1000, %zu reps\n", cfg.reps);
  const bool ok = table_rows(report);
  const auto& u = report.row(Metric::regret, 1.0);
  std::printf("  info regret unconstrained: bias %+.4f (table %+.4f) sd %.4f (table %.4f) cp95 %.3f\n", u.bias,
              kTableUnconstrained.bias, u.sd, kTableUnconstrained.sd, u.cp95);

  // Not part of the verdict: the two-dataset single split with 500 rows per
  // dataset, for comparison of the spread.
  ReplicationConfig alt = cfg;
  alt.layout = Layout::split;
  alt.crossfit.folds = 1;
  alt.dgp.n = 500;
  const auto alt_report = run_replications(alt);
  std::size_t bias_hits = 0, sd_hits = 0, cp_hits = 0;
  for (const auto& cell : kTable) {
    const auto& row = alt_report.row(cell.metric, cell.lambda);
    bias_hits += std::abs(row.bias - cell.bias) <= kBiasTol ? 1 : 0;
    sd_hits += std::abs(row.sd - cell.sd) <= kSdRelTol * cell.sd ? 1 : 0;
    cp_hits += row.cp95 >= kCoverageLo && row.cp95 <= kCoverageHi ? 1 : 0;
  }
  std::printf("  info two datasets of 500 rows, single split: bias %zu/12, sd %zu/12, cp95 %zu/12 cells in tolerance\n",
              bias_hits, sd_hits, cp_hits);
  return ok;
}

bool criterion2() {
  ReplicationConfig cfg;
  cfg.dgp.seed = kSeed + 2;
  cfg.dgp.n = 10000;
  cfg.reps = 200;
  cfg.lambdas = {0.1, 0.4, 1.0};
  cfg.include_unconstrained = false;
  cfg.oracle_nuisances = true;
  cfg.oracle_draws = kOracleDraws;
  const auto report = run_replications(cfg);
  bool all = true;
  for (const auto& row : report.rows) {
    const double se = std::sqrt(row.sd * row.sd / static_cast<double>(row.reps) + row.truth_se * row.truth_se);
    const double z = std::abs(row.mean - row.truth) / se;
    const bool ok = z <= kOracleSeTol;
    all = all && ok;
    std::printf("  %s %-10s lambda=%.1f  mean %+.5f oracle %+.5f  |z| %.2f\n", mark(ok), to_string(row.metric),
                row.lambda, row.mean, row.truth, z);
  }
  return all;
}

bool criterion3() {
  const DgpSpec spec{DgpKind::sim61, 1.0, 1.0, 100000, kSeed + 3};
  const double truth = oracle_truth(spec, 0.2, kOracleDraws, kSeed + 30).regret;
  const auto data = gen_sim61(spec.n, spec.seed).table;
  bool all = true;

  CrossfitConfig a;
  a.folds = 2;
  a.seed = kSeed + 31;
  a.outcome_kind = RegressorKind::mean;
  const auto fit_a = fit_single(data, a);
  const double ra = estimate_metric(fit_a.eval, bundle_at(fit_a, 0.2), Metric::regret).point;
  const bool ok_a = std::abs(ra - truth) <= kRobustTol;
  std::printf("  %s logistic propensity, mean-only outcome models: R(0.2) %+.5f vs oracle %+.5f\n", mark(ok_a), ra,
              truth);

  CrossfitConfig b;
  b.folds = 2;
  b.seed = kSeed + 32;
  auto fit_b = fit_single(data, b);
  fit_b.e.assign(fit_b.e.size(), 0.5);
  const double rb = estimate_metric(fit_b.eval, bundle_at(fit_b, 0.2), Metric::regret).point;
  const bool ok_b = std::abs(rb - truth) <= kRobustTol;
  std::printf("  %s logistic outcome models, propensity fixed at 0.5: R(0.2) %+.5f vs oracle %+.5f\n", mark(ok_b), rb,
              truth);
  all = ok_a && ok_b;
  return all;
}

bool criterion4() {
  Rng rng(kSeed + 4, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ConditionalLaw law;
    NuisanceBundle truth, est;
    for (int k = 0; k < 3; ++k) {
      law.e.push_back(0.1 + 0.8 * rng.uniform());
      law.mu0.push_back(rng.uniform());
      law.mu1.push_back(rng.uniform());
    }
    truth.e = law.e;
    truth.mu0 = law.mu0;
    truth.mu1 = law.mu1;
    for (int k = 0; k < 3; ++k) {
      truth.tau_y.push_back(law.mu1[k] - law.mu0[k]);
      truth.pi_y.push_back(rng.bernoulli(0.5) ? 1 : 0);
      truth.pi_s.push_back(rng.bernoulli(0.5) ? 1 : 0);
      est.e.push_back(std::clamp(law.e[k] + 0.2 * (rng.uniform() - 0.5), 0.05, 0.95));
      est.mu0.push_back(std::clamp(law.mu0[k] + 0.4 * (rng.uniform() - 0.5), 0.0, 1.0));
      est.mu1.push_back(std::clamp(law.mu1[k] + 0.4 * (rng.uniform() - 0.5), 0.0, 1.0));
      est.tau_y.push_back(est.mu1[k] - est.mu0[k]);
      est.pi_y.push_back(rng.bernoulli(0.5) ? 1 : 0);
      est.pi_s.push_back(rng.bernoulli(0.5) ? 1 : 0);
    }
    truth.tau_s = est.tau_s = {0, 0, 0};
    truth.threshold_y = truth.threshold_s = est.threshold_y = est.threshold_s = {0, 0, 0};
    for (const auto& p : product_bias(est, truth, law)) worst = std::max(worst, std::abs(p.exact - p.closed_form));
  }
  std::printf("  largest gap between exact bias and product-of-errors form over 100 perturbations: %.3g\n", worst);
  return worst <= kBiasIdentityTol;
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0, sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

bool criterion5() {
  bool all = true;
  auto report = [&](bool ok, const std::string& what) {
    all = all && ok;
    std::printf("  %s %s\n", mark(ok), what.c_str());
  };
  char buf[256];

  const DgpSpec e1{DgpKind::example1, 3.0, 1.0, 1000000, kSeed + 51};
  const auto g1 = gen_example(e1);
  const double r1 = corr(*g1.table.surrogate, *g1.table.outcome);
  std::snprintf(buf, sizeof buf, "example1 alpha=3: corr(S,Y) %.4f vs %.4f", r1, 2.0 / 3.5);
  report(std::abs(r1 - 2.0 / 3.5) <= kCorrTol, buf);
  const auto t1 = oracle_truth(e1, 1.0, 100000, kSeed);
  std::snprintf(buf, sizeof buf, "example1 alpha=3: tau_S=%g tau_Y=%g, R=%g G=%g (opposite rules)",
                t1.analytic.at("tau_s"), t1.analytic.at("tau_y"), t1.regret, t1.gain);
  report(t1.analytic.at("tau_s") == 1.0 && t1.analytic.at("tau_y") == -1.0 && t1.regret == 1.0 && t1.gain == -1.0, buf);

  const DgpSpec e1b{DgpKind::example1, 1.0, 1.0, 1000000, kSeed + 52};
  const auto g1b = gen_example(e1b);
  const double r1b = corr(*g1b.table.surrogate, *g1b.table.outcome);
  std::snprintf(buf, sizeof buf, "example1 alpha=1: corr(S,Y) %.4f vs 0", r1b);
  report(std::abs(r1b) <= kCorrTol, buf);

  const DgpSpec e2{DgpKind::example2, 1.0, 6.0, 1000000, kSeed + 53};
  const auto g2 = gen_example(e2);
  const double r21 = corr(g2.potentials.s1, g2.potentials.y1);
  const double r20 = corr(g2.potentials.s0, g2.potentials.y0);
  std::snprintf(buf, sizeof buf, "example2 beta=6: corr(S(1),Y(1)) %.4f, corr(S(0),Y(0)) %.4f vs 0.75", r21, r20);
  report(std::abs(r21 - 0.75) <= kCorrTol && std::abs(r20 - 0.75) <= kCorrTol, buf);

  const DgpSpec e3{DgpKind::example3, 2.0, 1.0, 100000, kSeed + 54};
  const auto p3 = paradox_summary(e3, 0.5, 100000);
  const double agreement = p3["policy"]["agreement"].get<double>();
  std::snprintf(buf, sizeof buf, "example3 alpha=2 beta=1 lambda=0.5: agreement %g", agreement);
  report(agreement == 0.0, buf);
  const double lambdas[] = {0.25, 0.5, 0.75, 1.0};
  bool closed = true;
  for (const auto& t : oracle_truth(e3, lambdas, kOracleDraws, kSeed + 55)) {
    closed = closed && std::abs(t.regret - t.analytic.at("regret")) <= kOracleSeTol * t.regret_se + 1e-9 &&
             std::abs(t.gain - t.analytic.at("gain")) <= kOracleSeTol * t.gain_se + 1e-9 &&
             std::abs(t.efficiency - t.analytic.at("efficiency")) <= kOracleSeTol * t.efficiency_se + 1e-9;
  }
  report(closed, "example3 oracle R, G, V match the closed forms within 4 Monte Carlo SEs");

  const AppendixS1 s1;
  std::snprintf(buf, sizeof buf, "three-point example: outcome rule %.6f, surrogate rule %.6f, random rule %.6f",
                s1.outcome_itr_value(), s1.surrogate_itr_value(), s1.random_itr_value(0.5));
  report(std::abs(s1.outcome_itr_value() - 8.0 / 3.0) <= 1e-12 && std::abs(s1.surrogate_itr_value() - 2.0) <= 1e-12 &&
             std::abs(s1.random_itr_value(0.5) - 7.0 / 3.0) <= 1e-12 &&
             s1.surrogate_itr_value() < s1.random_itr_value(0.5),
         buf);
  return all;
}

bool criterion6() {
  bool all = true;
  auto report = [&](bool ok, const std::string& what) {
    all = all && ok;
    std::printf("  %s %s\n", mark(ok), what.c_str());
  };
  const double lambdas[] = {0.05, 0.1, 0.2, 0.3, 0.4, 0.7, 1.0};
  const auto data = gen_sim61(2000, kSeed + 6).table;
  CrossfitConfig cfg;
  cfg.folds = 2;
  cfg.seed = kSeed + 60;
  const auto fit = fit_single(data, cfg);

  double gap = 0.0;
  for (double l : lambdas) {
    const auto b = bundle_at(fit, l);
    double ate = 0.0;
    for (std::size_t i = 0; i < fit.eval.rows(); ++i)
      ate += dr_ate_term(b, i, fit.eval.treatment[i], (*fit.eval.outcome)[i]);
    ate /= static_cast<double>(fit.eval.rows());
    const double v = estimate_metric(fit.eval, b, Metric::efficiency).point;
    const double g = estimate_metric(fit.eval, b, Metric::gain).point;
    gap = std::max(gap, std::abs(v - (g - l * ate)));
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "V = G - lambda * DR-ATE on fitted nuisances: largest gap %.3g", gap);
  report(gap <= kIdentityTol, buf);

  bool same = true;
  const auto b1 = bundle_at(fit, 1.0);
  const auto bp = plugin_bundle(fit);
  for (Metric m : {Metric::regret, Metric::gain, Metric::efficiency}) {
    const auto x = estimate_metric(fit.eval, b1, m);
    const auto y = estimate_metric(fit.eval, bp, m);
    same = same && x.point == y.point && x.analytic_se == y.analytic_se && b1.pi_y == bp.pi_y && b1.pi_s == bp.pi_s;
  }
  report(same, "lambda = 1 budget path equals the unconstrained sign rule bitwise");

  auto sy = data;
  sy.surrogate = sy.outcome;
  CrossfitConfig shared = cfg;
  shared.partition = NuisancePartition::shared;
  const auto fit_sy = fit_single(sy, shared);
  bool zero = true;
  for (double l : lambdas) zero = zero && estimate_metric(fit_sy.eval, bundle_at(fit_sy, l), Metric::regret).point == 0.0;
  report(zero, "S = Y gives R = 0 exactly at every lambda (shared nuisance partition)");

  bool feasible = true;
  std::size_t policies = 0;
  const auto d1 = gen_sim61(1000, kSeed + 61).table.without(Endpoint::surrogate);
  const auto d2 = gen_sim61(1000, kSeed + 62).table.without(Endpoint::outcome);
  CrossfitConfig one = cfg, three = cfg;
  one.folds = 1;
  three.folds = 3;
  const NuisanceFit fits[] = {fit, fit_sy, fit_split(d1, d2, one), fit_split(d1, d2, three)};
  for (const auto& f : fits) {
    for (const auto& rec : f.folds) {
      for (const auto* sample : {&rec.quantile_sample_y, &rec.quantile_sample_s}) {
        for (double l : lambdas) {
          const double n = static_cast<double>(sample->size());
          feasible = feasible && budget_policy(*sample, l).treated_fraction() <= l + 1.0 / n;
          ++policies;
        }
      }
    }
  }
  std::snprintf(buf, sizeof buf, "treated fraction <= lambda + 1/n on the sample defining each of %zu fitted policies",
                policies);
  report(feasible, buf);
  return all;
}

bool criterion7() {
  ReplicationConfig cfg;
  cfg.dgp.seed = kSeed + 7;
  cfg.dgp.n = 500;
  cfg.reps = 40;
  cfg.oracle_draws = 1000000;
  cfg.threads = 1;
  const auto a = run_replications(cfg);
  const auto b = run_replications(cfg);
  cfg.threads = 4;
  const auto c = run_replications(cfg);
  const bool rerun = report_csv(a) == report_csv(b) && report_json(a).dump() == report_json(b).dump();
  const bool threads = report_csv(a) == report_csv(c) && report_json(a).dump() == report_json(c).dump();
  std::printf("  %s same seed twice gives byte-identical reports\n", mark(rerun));
  std::printf("  %s 1 and 4 worker threads give byte-identical reports\n", mark(threads));

  const auto d = gen_sim61(800, kSeed + 70).table;
  CrossfitConfig cf;
  cf.folds = 3;
  cf.seed = kSeed + 71;
  const double lambdas[] = {0.2, 1.0};
  const Metric metrics[] = {Metric::regret, Metric::gain, Metric::efficiency};
  const nlohmann::json x = crossfit_single(d, lambdas, metrics, cf);
  const nlohmann::json y = crossfit_single(d, lambdas, metrics, cf);
  const std::vector<ObservationTable> data{d};
  const auto pipe = crossfit_pipeline({0.2}, {Metric::gain}, cf);
  const auto b1 = bootstrap_ci(data, pipe, 100, 0.95, kSeed + 72, 1);
  const auto b3 = bootstrap_ci(data, pipe, 100, 0.95, kSeed + 72, 3);
  const bool est = x.dump() == y.dump() && b1.ci[0].lo == b3.ci[0].lo && b1.ci[0].hi == b3.ci[0].hi && b1.se == b3.se;
  std::printf("  %s estimates and bootstrap intervals repeat exactly across runs and thread counts\n", mark(est));
  return rerun && threads && est;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<bool()>>> criteria{
      {"simulation table reproduction (n = 1000, K = 2)", criterion1},
      {"oracle-nuisance means agree with the brute-force truth", criterion2},
      {"double robustness at n = 1e5", criterion3},
      {"exact bias equals the product-of-errors form", criterion4},
      {"surrogate paradox fixtures", criterion5},
      {"structural identities", criterion6},
      {"determinism", criterion7},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only != 0 && static_cast<std::size_t>(only) != k + 1) continue;
    bool ok = false;
    try {
      ok = criteria[k].second();
    } catch (const std::exception& e) {
      std::printf("  error: %s\n", e.what());
    }
    std::printf("criterion %zu %s: %s\n", k + 1, ok ? "PASS" : "FAIL", criteria[k].first);
    std::fflush(stdout);
    failed += ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
