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

#include "surreval/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <stdexcept>

#include "surreval/nuisance.hpp"
#include "surreval/parallel.hpp"
#include "surreval/policy.hpp"
#include "surreval/rng.hpp"

namespace surreval {

const char* to_string(DgpKind kind) {
  switch (kind) {
    case DgpKind::sim61:
      return "sim61";
    case DgpKind::example1:
      return "example1";
    case DgpKind::example2:
      return "example2";
    case DgpKind::example3:
      return "example3";
    case DgpKind::appendix_s1:
      return "appendixS1";
  }
  return "?";
}

DgpKind dgp_kind_from_string(const std::string& name) {
  if (name == "sim61") return DgpKind::sim61;
  if (name == "example1") return DgpKind::example1;
  if (name == "example2") return DgpKind::example2;
  if (name == "example3") return DgpKind::example3;
  if (name == "appendixS1" || name == "appendix_s1") return DgpKind::appendix_s1;
  throw std::invalid_argument("unknown DGP kind '" + name + "' (expected sim61|example1|example2|example3|appendixS1)");
}

void DgpSpec::validate() const {
  if (n < 1) throw std::invalid_argument("DGP needs n >= 1");
  if (!std::isfinite(alpha) || !std::isfinite(beta)) throw std::invalid_argument("DGP parameters must be finite");
  if (kind == DgpKind::example3 && !(alpha > 0.0 && beta > 0.0)) {
    throw std::invalid_argument("example3 requires alpha > 0 and beta > 0");
  }
}

namespace {

constexpr double kSim61Sd = 0.2;

struct Sim61Means {
  double e, y1, y0, s1, s0;
};

Sim61Means sim61_means(double x1, double x2) {
  return {expit(0.1 * x1 + 0.1 * x2), expit(0.3 * x1 + 0.1 * x2), expit(0.5 * x1 + 0.3 * x2),
          expit(0.1 * x1 + 0.1 * x2), expit(0.5 * x1 + 0.2 * x2)};
}

GeneratedData allocate(std::size_t n, std::size_t d) {
  GeneratedData g;
  g.table.covariates.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  g.table.treatment.resize(n);
  g.table.outcome.emplace(n);
  g.table.surrogate.emplace(n);
  for (auto* v : {&g.potentials.y0, &g.potentials.y1, &g.potentials.s0, &g.potentials.s1}) v->resize(n);
  return g;
}

void realize(GeneratedData& g, std::size_t i, int a) {
  g.table.treatment[i] = a;
  (*g.table.outcome)[i] = a == 1 ? g.potentials.y1[i] : g.potentials.y0[i];
  (*g.table.surrogate)[i] = a == 1 ? g.potentials.s1[i] : g.potentials.s0[i];
}

double draw_x(DgpKind kind, Rng& rng) {
  switch (kind) {
    case DgpKind::example1:
      return rng.bernoulli(0.5) ? 1.0 : 0.0;
    case DgpKind::appendix_s1:
      return static_cast<double>(rng.below(3)) - 1.0;
    default:
      return rng.uniform();
  }
}

}  // namespace

GeneratedData gen_sim61(std::size_t n, std::uint64_t seed) {
  GeneratedData g = allocate(n, 2);
  Rng rng(seed, 61);
  auto& pot = g.potentials;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = rng.normal(0.0, kSim61Sd);
    const double x2 = rng.normal(0.0, kSim61Sd);
    const auto m = sim61_means(x1, x2);
    const int a = rng.bernoulli(m.e) ? 1 : 0;
    pot.y1[i] = rng.bernoulli(m.y1) ? 1.0 : 0.0;
    pot.y0[i] = rng.bernoulli(m.y0) ? 1.0 : 0.0;
    pot.s1[i] = rng.bernoulli(m.s1) ? 1.0 : 0.0;
    pot.s0[i] = rng.bernoulli(m.s0) ? 1.0 : 0.0;
    g.table.covariates(static_cast<Eigen::Index>(i), 0) = x1;
    g.table.covariates(static_cast<Eigen::Index>(i), 1) = x2;
    realize(g, i, a);
  }
  return g;
}

GeneratedData gen_example(const DgpSpec& spec) {
  spec.validate();
  if (spec.kind == DgpKind::sim61) return gen_sim61(spec.n, spec.seed);
  GeneratedData g = allocate(spec.n, 1);
  Rng rng(spec.seed, 3);
  const AppendixS1 s1_table;
  const double alpha = spec.alpha;
  const double beta = spec.beta;
  auto& pot = g.potentials;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int a = rng.bernoulli(0.5) ? 1 : 0;
    const double x = draw_x(spec.kind, rng);
    g.table.covariates(static_cast<Eigen::Index>(i), 0) = x;
    if (spec.kind == DgpKind::appendix_s1) {
      const auto k = static_cast<std::size_t>(x + 1.0);
      pot.s0[i] = s1_table.s0[k];
      pot.s1[i] = s1_table.s1[k];
      pot.y0[i] = s1_table.y0[k];
      pot.y1[i] = s1_table.y1[k];
      realize(g, i, a);
      continue;
    }
    const double eps_s = rng.normal();
    const double eps_y = rng.normal();
    switch (spec.kind) {
      case DgpKind::example1:
        pot.s1[i] = 1.0 + alpha * x + eps_s;
        pot.s0[i] = alpha * x + eps_s;
        pot.y1[i] = -1.0 + alpha * x + eps_y;
        pot.y0[i] = alpha * x + eps_y;
        break;
      case DgpKind::example2:
        pot.s1[i] = beta * x + eps_s;
        pot.s0[i] = alpha + beta * x + eps_s;
        pot.y1[i] = beta * x + eps_y;
        pot.y0[i] = -alpha + beta * x + eps_y;
        break;
      case DgpKind::example3:
        pot.s1[i] = eps_s;
        pot.s0[i] = -alpha - beta * x + eps_s;
        pot.y1[i] = eps_y;
        pot.y0[i] = -alpha + beta * x + eps_y;
        break;
      default:
        break;
    }
    realize(g, i, a);
  }
  return g;
}

TrueNuisance true_nuisance(const DgpSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& xr) {
  const double x = xr[0];
  const double alpha = spec.alpha;
  const double beta = spec.beta;
  switch (spec.kind) {
    case DgpKind::sim61: {
      const auto m = sim61_means(xr[0], xr[1]);
      return {m.e, m.y0, m.y1, m.s0, m.s1};
    }
    case DgpKind::example1:
      return {0.5, alpha * x, -1.0 + alpha * x, alpha * x, 1.0 + alpha * x};
    case DgpKind::example2:
      return {0.5, -alpha + beta * x, beta * x, alpha + beta * x, beta * x};
    case DgpKind::example3:
      return {0.5, -alpha + beta * x, 0.0, -alpha - beta * x, 0.0};
    case DgpKind::appendix_s1: {
      const AppendixS1 t;
      const auto k = static_cast<std::size_t>(std::lround(x + 1.0));
      return {0.5, t.y0[k], t.y1[k], t.s0[k], t.s1[k]};
    }
  }
  throw std::logic_error("true_nuisance: unknown kind");
}

NuisanceBundle oracle_bundle(const DgpSpec& spec, const ObservationTable& table, double lambda, double threshold_y,
                             double threshold_s) {
  check_budget(lambda);
  const std::size_t n = table.rows();
  NuisanceBundle b;
  b.lambda = lambda;
  for (auto* v : {&b.mu0, &b.mu1, &b.e, &b.tau_y, &b.tau_s, &b.threshold_y, &b.threshold_s}) v->resize(n);
  b.pi_y.resize(n);
  b.pi_s.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = true_nuisance(spec, table.covariates.row(static_cast<Eigen::Index>(i)));
    b.mu0[i] = t.mu0;
    b.mu1[i] = t.mu1;
    b.e[i] = t.e;
    b.tau_y[i] = t.tau_y();
    b.tau_s[i] = t.tau_s();
    b.threshold_y[i] = threshold_y;
    b.threshold_s[i] = threshold_s;
    b.pi_y[i] = assign_treatment(b.tau_y[i], threshold_y);
    b.pi_s[i] = assign_treatment(b.tau_s[i], threshold_s);
  }
  return b;
}

// ---- oracle ----

double OracleTruth::value(Metric metric) const {
  switch (metric) {
    case Metric::regret:
      return regret;
    case Metric::gain:
      return gain;
    case Metric::efficiency:
      return efficiency;
  }
  return 0.0;
}

double OracleTruth::se(Metric metric) const {
  switch (metric) {
    case Metric::regret:
      return regret_se;
    case Metric::gain:
      return gain_se;
    case Metric::efficiency:
      return efficiency_se;
  }
  return 0.0;
}

namespace {

// Welford mean/variance that stays exact for constant streams.
class MeanSe {
 public:
  void add(double v) {
    if (count_ == 0) first_ = v;
    constant_ = constant_ && v == first_;
    ++count_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (v - mean_);
  }
  double mean() const { return (constant_ ? first_ : mean_) + 0.0; }
  double se() const {
    if (constant_ || count_ < 2) return 0.0;
    return std::sqrt(m2_ / static_cast<double>(count_ - 1) / static_cast<double>(count_));
  }

 private:
  std::size_t count_ = 0;
  double first_ = 0.0, mean_ = 0.0, m2_ = 0.0;
  bool constant_ = true;
};

OracleTruth integrate(std::span<const double> tau_y, std::span<const double> tau_s, double lambda, double thr_y,
                      double thr_s) {
  MeanSe r, g, v, ate;
  for (std::size_t i = 0; i < tau_y.size(); ++i) {
    const double py = assign_treatment(tau_y[i], thr_y);
    const double ps = assign_treatment(tau_s[i], thr_s);
    r.add(tau_y[i] * (py - ps));
    g.add(tau_y[i] * ps);
    v.add(tau_y[i] * (ps - lambda));
    ate.add(tau_y[i]);
  }
  OracleTruth t;
  t.lambda = lambda;
  t.threshold_y = thr_y;
  t.threshold_s = thr_s;
  t.regret = r.mean();
  t.gain = g.mean();
  t.efficiency = v.mean();
  t.ate = ate.mean();
  t.regret_se = r.se();
  t.gain_se = g.se();
  t.efficiency_se = v.se();
  t.ate_se = ate.se();
  t.mc_se = std::max({t.regret_se, t.gain_se, t.efficiency_se});
  t.draws = tau_y.size();
  return t;
}

void add_analytic(const DgpSpec& spec, OracleTruth& t) {
  const double a = spec.alpha;
  const double b = spec.beta;
  const double lambda = t.lambda;
  switch (spec.kind) {
    case DgpKind::sim61:
      // Both arms' mean outcome is 1/2 by symmetry of the covariate law.
      t.analytic["ate"] = 0.0;
      break;
    case DgpKind::example1:
      t.analytic["corr_s_y"] = 0.25 * (a * a - 1.0) / (1.25 + 0.25 * a * a);
      t.analytic["tau_s"] = 1.0;
      t.analytic["tau_y"] = -1.0;
      break;
    case DgpKind::example2:
      t.analytic["corr_potential"] = b * b / (b * b + 12.0);
      t.analytic["tau_s"] = -a;
      t.analytic["tau_y"] = a;
      break;
    case DgpKind::example3: {
      // Surrogate treats X > 1 - lambda, outcome treats X < min(lambda, alpha / beta).
      const double m = std::min({lambda, a / b, 1.0});
      const double outcome_part = a * m - 0.5 * b * m * m;
      const double gain = lambda < 1.0 ? a * lambda - 0.5 * b * (1.0 - (1.0 - lambda) * (1.0 - lambda)) : a - 0.5 * b;
      t.analytic["regret"] = outcome_part - gain;
      t.analytic["gain"] = gain;
      t.analytic["efficiency"] = gain - lambda * (a - 0.5 * b);
      t.analytic["ate"] = a - 0.5 * b;
      break;
    }
    case DgpKind::appendix_s1: {
      const AppendixS1 s1;
      t.analytic["outcome_itr_value"] = s1.outcome_itr_value();
      t.analytic["surrogate_itr_value"] = s1.surrogate_itr_value();
      t.analytic["random_itr_value"] = s1.random_itr_value(lambda);
      break;
    }
  }
}

}  // namespace

std::vector<OracleTruth> oracle_truth(const DgpSpec& spec, std::span<const double> lambdas, std::size_t draws,
                                      std::uint64_t seed) {
  spec.validate();
  for (double l : lambdas) check_budget(l);
  std::vector<double> tau_y, tau_s;
  bool exact = false;
  if (spec.kind == DgpKind::appendix_s1) {
    const AppendixS1 s1;
    for (std::size_t k = 0; k < 3; ++k) {
      tau_y.push_back(s1.y1[k] - s1.y0[k]);
      tau_s.push_back(s1.s1[k] - s1.s0[k]);
    }
    exact = true;
  } else {
    if (draws < 2) throw std::invalid_argument("oracle needs at least 2 draws");
    tau_y.resize(draws);
    tau_s.resize(draws);
    Rng rng(seed, 0x0AC1E);
    Eigen::RowVectorXd x(static_cast<Eigen::Index>(spec.dims()));
    for (std::size_t i = 0; i < draws; ++i) {
      if (spec.kind == DgpKind::sim61) {
        x[0] = rng.normal(0.0, kSim61Sd);
        x[1] = rng.normal(0.0, kSim61Sd);
      } else {
        x[0] = draw_x(spec.kind, rng);
      }
      const auto t = true_nuisance(spec, x);
      tau_y[i] = t.tau_y();
      tau_s[i] = t.tau_s();
    }
  }
  std::vector<double> thr_y(lambdas.size()), thr_s(lambdas.size());
  {
    std::vector<double> sorted = tau_y;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t l = 0; l < lambdas.size(); ++l) thr_y[l] = empirical_quantile_sorted(sorted, lambdas[l]);
    sorted = tau_s;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t l = 0; l < lambdas.size(); ++l) thr_s[l] = empirical_quantile_sorted(sorted, lambdas[l]);
  }
  std::vector<OracleTruth> out;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    OracleTruth t = integrate(tau_y, tau_s, lambdas[l], thr_y[l], thr_s[l]);
    if (exact) {
      t.exact = true;
      t.regret_se = t.gain_se = t.efficiency_se = t.ate_se = t.mc_se = 0.0;
    }
    add_analytic(spec, t);
    out.push_back(std::move(t));
  }
  return out;
}

OracleTruth oracle_truth(const DgpSpec& spec, double lambda, std::size_t draws, std::uint64_t seed) {
  const double l[] = {lambda};
  return oracle_truth(spec, l, draws, seed).front();
}

namespace {
nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
}  // namespace

void to_json(nlohmann::json& j, const OracleTruth& t) {
  j = nlohmann::json{{"lambda", t.lambda},
                     {"R", t.regret},
                     {"G", t.gain},
                     {"V", t.efficiency},
                     {"ate", t.ate},
                     {"R_mc_se", t.regret_se},
                     {"G_mc_se", t.gain_se},
                     {"V_mc_se", t.efficiency_se},
                     {"ate_mc_se", t.ate_se},
                     {"mc_se", t.mc_se},
                     {"threshold_y", finite_or_null(t.threshold_y)},
                     {"threshold_s", finite_or_null(t.threshold_s)},
                     {"draws", t.draws},
                     {"exact", t.exact},
                     {"analytic", t.analytic}};
}

double AppendixS1::outcome_itr_value() const {
  double v = 0.0;
  for (std::size_t k = 0; k < 3; ++k) v += (y1[k] - y0[k] > 0.0 ? y1[k] : y0[k]) / 3.0;
  return v;
}

double AppendixS1::surrogate_itr_value() const {
  double v = 0.0;
  for (std::size_t k = 0; k < 3; ++k) v += (s1[k] - s0[k] > 0.0 ? y1[k] : y0[k]) / 3.0;
  return v;
}

double AppendixS1::random_itr_value(double lambda) const {
  double v = 0.0;
  for (std::size_t k = 0; k < 3; ++k) v += (lambda * y1[k] + (1.0 - lambda) * y0[k]) / 3.0;
  return v;
}

// ---- replications ----

const char* to_string(Layout layout) { return layout == Layout::single ? "single" : "split"; }
const char* to_string(CiKind kind) { return kind == CiKind::analytic ? "analytic" : "bootstrap"; }

const ReplicationRow& ReplicationReport::row(Metric metric, double lambda) const {
  for (const auto& r : rows)
    if (r.metric == metric && r.lambda == lambda) return r;
  throw std::out_of_range("no report row for " + std::string(to_string(metric)) + " at lambda " +
                          std::to_string(lambda));
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json config_json(const ReplicationConfig& c) {
  const auto& cf = c.crossfit;
  return nlohmann::json{
      {"dgp", {{"kind", to_string(c.dgp.kind)}, {"alpha", c.dgp.alpha}, {"beta", c.dgp.beta}, {"n", c.dgp.n}}},
      {"lambdas", c.lambdas},
      {"include_unconstrained", c.include_unconstrained},
      {"reps", c.reps},
      {"layout", to_string(c.layout)},
      {"folds", cf.folds},
      {"partition", cf.partition == NuisancePartition::shared ? "shared" : "disjoint"},
      {"main_fraction", cf.main_fraction},
      {"nuisance",
       {{"outcome", to_string(cf.outcome_kind)},
        {"surrogate", to_string(cf.surrogate_kind)},
        {"propensity", to_string(cf.propensity_kind)},
        {"clip", cf.clip},
        {"logistic", {{"max_iter", cf.nuisance.logistic.max_iter}, {"tol", cf.nuisance.logistic.tol}, {"ridge", cf.nuisance.logistic.ridge}}},
        {"stumps", {{"rounds", cf.nuisance.stumps.rounds}, {"rate", cf.nuisance.stumps.rate}, {"min_leaf", cf.nuisance.stumps.min_leaf}}}}},
      {"level", cf.level},
      {"ci", to_string(c.ci)},
      {"bootstrap_replicates", c.bootstrap_replicates},
      {"oracle_nuisances", c.oracle_nuisances},
      {"oracle_draws", c.oracle_draws}};
}

namespace {

struct Cell {
  Metric metric;
  double lambda;
};

struct RepOutcome {
  bool ok = false;
  std::vector<double> point, lo, hi, se;
};

}  // namespace

ReplicationReport run_replications(const ReplicationConfig& config) {
  config.dgp.validate();
  if (config.reps < 2) throw std::invalid_argument("replications need reps >= 2");
  if (config.lambdas.empty() && !config.include_unconstrained) throw std::invalid_argument("no lambda requested");
  for (double l : config.lambdas) check_budget(l);

  std::vector<Cell> cells;
  if (config.include_unconstrained) cells.push_back({Metric::regret, 1.0});
  for (Metric m : {Metric::regret, Metric::efficiency, Metric::gain})
    for (double l : config.lambdas) cells.push_back({m, l});

  std::vector<double> oracle_lambdas;
  for (const auto& c : cells)
    if (std::find(oracle_lambdas.begin(), oracle_lambdas.end(), c.lambda) == oracle_lambdas.end())
      oracle_lambdas.push_back(c.lambda);
  const auto truths = oracle_truth(config.dgp, oracle_lambdas, config.oracle_draws, derive_seed(config.dgp.seed, ~0ULL));
  auto truth_for = [&](double lambda) -> const OracleTruth& {
    for (const auto& t : truths)
      if (t.lambda == lambda) return t;
    throw std::logic_error("missing oracle lambda");
  };

  std::vector<RepOutcome> outcomes(config.reps);
  parallel_for(config.reps, config.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(config.dgp.seed, r);
    DgpSpec spec = config.dgp;
    spec.seed = derive_seed(rep_seed, 0);
    std::vector<ObservationTable> data;
    const GeneratedData first = gen_example(spec);
    if (config.layout == Layout::single) {
      data.push_back(first.table);
    } else {
      spec.seed = derive_seed(rep_seed, 1);
      data.push_back(first.table.without(Endpoint::surrogate));
      data.push_back(gen_example(spec).table.without(Endpoint::outcome));
    }
    CrossfitConfig cf = config.crossfit;
    cf.seed = derive_seed(rep_seed, 2);

    RepOutcome out;
    try {
      std::vector<MetricEstimate> est;
      if (config.oracle_nuisances) {
        const ObservationTable& eval = data.front();
        for (const auto& c : cells) {
          const auto& t = truth_for(c.lambda);
          est.push_back(estimate_metric(eval, oracle_bundle(config.dgp, eval, c.lambda, t.threshold_y, t.threshold_s),
                                        c.metric, cf.level));
        }
      } else {
        const NuisanceFit fit = config.layout == Layout::single ? fit_single(data[0], cf) : fit_split(data[0], data[1], cf);
        for (const auto& c : cells) est.push_back(estimate_metric(fit.eval, bundle_at(fit, c.lambda), c.metric, cf.level));
      }
      for (const auto& e : est) {
        out.point.push_back(e.point);
        out.lo.push_back(e.ci.lo);
        out.hi.push_back(e.ci.hi);
        out.se.push_back(e.analytic_se);
      }
      if (config.ci == CiKind::bootstrap) {
        if (config.oracle_nuisances) throw std::invalid_argument("bootstrap intervals need fitted nuisances");
        // One pipeline call per cell keeps statistic order aligned with cells.
        auto pipeline = [&](std::span<const ObservationTable> tables) {
          const NuisanceFit fit = tables.size() == 1 ? fit_single(tables[0], cf) : fit_split(tables[0], tables[1], cf);
          std::vector<double> points;
          for (const auto& c : cells) points.push_back(estimate_metric(fit.eval, bundle_at(fit, c.lambda), c.metric).point);
          return points;
        };
        const auto boot = bootstrap_ci(data, pipeline, config.bootstrap_replicates, cf.level, derive_seed(rep_seed, 3), 1);
        for (std::size_t k = 0; k < cells.size(); ++k) {
          out.lo[k] = boot.ci[k].lo;
          out.hi[k] = boot.ci[k].hi;
        }
      }
      out.ok = true;
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      out.ok = false;
    }
    outcomes[r] = std::move(out);
  });

  ReplicationReport report;
  report.master_seed = config.dgp.seed;
  report.config_hash = fnv1a_hex(config_json(config).dump());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    ReplicationRow row;
    row.metric = cells[k].metric;
    row.lambda = cells[k].lambda;
    row.n = config.dgp.n;
    const auto& t = truth_for(cells[k].lambda);
    row.truth = t.value(cells[k].metric);
    row.truth_se = t.se(cells[k].metric);
    double sum = 0.0, se_sum = 0.0;
    std::size_t covered = 0, ok = 0;
    for (const auto& o : outcomes) {
      if (!o.ok) {
        ++row.failures;
        continue;
      }
      ++ok;
      sum += o.point[k];
      se_sum += o.se[k];
      covered += (o.lo[k] <= row.truth && row.truth <= o.hi[k]) ? 1 : 0;
    }
    row.reps = ok;
    if (ok > 0) {
      row.mean = sum / static_cast<double>(ok);
      row.bias = row.mean - row.truth;
      row.mean_se = se_sum / static_cast<double>(ok);
      row.cp95 = static_cast<double>(covered) / static_cast<double>(ok);
      double ss = 0.0;
      for (const auto& o : outcomes)
        if (o.ok) ss += (o.point[k] - row.mean) * (o.point[k] - row.mean);
      row.sd = ok > 1 ? std::sqrt(ss / static_cast<double>(ok - 1)) : 0.0;
    }
    report.rows.push_back(row);
  }
  return report;
}

namespace {
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
}  // namespace

std::string report_csv(const ReplicationReport& report) {
  std::string out = "metric,lambda,n,reps,bias,sd,cp95,failures,truth,mean\n";
  for (const auto& r : report.rows) {
    out += std::string(to_string(r.metric)) + "," + num(r.lambda) + "," + std::to_string(r.n) + "," +
           std::to_string(r.reps) + "," + num(r.bias) + "," + num(r.sd) + "," + num(r.cp95) + "," +
           std::to_string(r.failures) + "," + num(r.truth) + "," + num(r.mean) + "\n";
  }
  return out;
}

nlohmann::json report_json(const ReplicationReport& report) {
  auto rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"metric", to_string(r.metric)},
                    {"lambda", r.lambda},
                    {"n", r.n},
                    {"reps", r.reps},
                    {"bias", r.bias},
                    {"sd", r.sd},
                    {"cp95", r.cp95},
                    {"failures", r.failures},
                    {"truth", r.truth},
                    {"truth_mc_se", r.truth_se},
                    {"mean", r.mean},
                    {"mean_analytic_se", r.mean_se}});
  }
  return {{"rows", rows}, {"master_seed", report.master_seed}, {"config_hash", report.config_hash}};
}

// ---- paradox demos ----

namespace {
double correlation(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}
}  // namespace

nlohmann::json paradox_summary(const DgpSpec& spec, double lambda, std::size_t draws) {
  spec.validate();
  check_budget(lambda);
  nlohmann::json j;
  j["kind"] = to_string(spec.kind);
  j["alpha"] = spec.alpha;
  j["beta"] = spec.beta;
  j["lambda"] = lambda;
  j["n"] = spec.n;
  j["seed"] = spec.seed;

  const double lambdas[] = {lambda, 1.0};
  const auto truths = oracle_truth(spec, std::span<const double>(lambdas, lambda == 1.0 ? 1 : 2), draws,
                                   derive_seed(spec.seed, 1));
  j["analytic"] = truths.front().analytic;
  j["oracle"] = truths;

  const GeneratedData g = gen_example(spec);
  const auto& pot = g.potentials;
  nlohmann::json sample;
  sample["corr_s_y"] = correlation(*g.table.surrogate, *g.table.outcome);
  sample["corr_s1_y1"] = correlation(pot.s1, pot.y1);
  sample["corr_s0_y0"] = correlation(pot.s0, pot.y0);
  j["sample"] = sample;

  std::vector<double> tau_y(g.table.rows()), tau_s(g.table.rows());
  for (std::size_t i = 0; i < tau_y.size(); ++i) {
    const auto t = true_nuisance(spec, g.table.covariates.row(static_cast<Eigen::Index>(i)));
    tau_y[i] = t.tau_y();
    tau_s[i] = t.tau_s();
  }
  const auto pi_y = budget_policy(tau_y, lambda);
  const auto pi_s = budget_policy(tau_s, lambda);
  j["policy"] = {{"agreement", policy_agreement(pi_s, pi_y)},
                 {"treated_fraction_surrogate_rule", pi_s.treated_fraction()},
                 {"treated_fraction_outcome_rule", pi_y.treated_fraction()}};
  const auto full_y = budget_policy(tau_y, 1.0);
  const auto full_s = budget_policy(tau_s, 1.0);
  j["unconstrained_policy"] = {{"agreement", policy_agreement(full_s, full_y)},
                               {"treated_fraction_surrogate_rule", full_s.treated_fraction()},
                               {"treated_fraction_outcome_rule", full_y.treated_fraction()}};
  if (spec.kind == DgpKind::appendix_s1) {
    const AppendixS1 s1;
    const double surrogate = s1.surrogate_itr_value();
    const double outcome = s1.outcome_itr_value();
    const double random = s1.random_itr_value(lambda);
    j["itr_values"] = {{"outcome_rule", outcome},
                       {"transformed_surrogate_rule", surrogate},
                       {"random_rule", random},
                       {"surrogate_worse_than_outcome", surrogate < outcome},
                       {"surrogate_worse_than_random", surrogate < random}};
  }
  return j;
}

}  // namespace surreval
