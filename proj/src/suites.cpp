/*
 * Copyright 2026 The ILE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "ile/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>

#include "ile/decoder.hpp"
#include "ile/estimator.hpp"
#include "ile/rng.hpp"

namespace ile {
namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int uniform_int(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1))); }

LossSpec random_table(Rng& rng, int p, int T) {
  nlohmann::json outs = nlohmann::json::array(), labs = nlohmann::json::array(), V = nlohmann::json::array();
  for (int i = 1; i <= p; ++i) outs.push_back(i);
  for (int j = 1; j <= T; ++j) labs.push_back(j);
  for (int i = 0; i < p; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < T; ++j) row.push_back(rng.uniform());
    V.push_back(row);
  }
  return make_loss({{"id", "table"}, {"outputs", outs}, {"labels", labs}, {"V", V}});
}

// Random finite problem: zero_one on even draws, a random table otherwise.
struct FiniteProblem {
  SyntheticDistribution dist;
  LossSpec loss;
};

FiniteProblem random_problem(Rng& rng, int max_labels, int max_support, bool table) {
  const int T = uniform_int(rng, 2, max_labels);
  const int m = uniform_int(rng, 2, max_support);
  FiniteProblem p;
  p.dist = gen_finite_classification(rng.next_u64(), 2, T, m, std::pow(10.0, rng.uniform(-1.5, 0.5)));
  p.loss = table ? random_table(rng, uniform_int(rng, 2, 5), T) : make_loss({{"id", "zero_one"}, {"T", T}});
  return p;
}

Label angle(double t) {
  Label z(2);
  z << std::cos(t), std::sin(t);
  return z;
}

}  // namespace

nlohmann::json SuiteResult::to_json() const {
  return {{"name", name}, {"passed", passed}, {"cases", cases}, {"failures", failures},
          {"worst", worst},  {"seconds", seconds}, {"details", details}};
}

SuiteResult comparison_suite(int cases, std::uint64_t seed, double slack, int max_labels, int max_support) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "comparison_inequality";
  r.worst = -INFINITY;
  Rng rng(seed);
  double max_lhs = 0.0;
  for (int c = 0; c < cases; ++c) {
    const FiniteProblem p = random_problem(rng, max_labels, max_support, c % 2 == 1);
    const FiniteEmbedding fe = finite_embedding(p.loss);
    Matrix g = exact_gstar(p.dist, fe);
    // Perturbation sizes spread over four decades.
    const double scale = std::pow(10.0, rng.uniform(-3.0, 1.0));
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] += scale * rng.normal();
    const ComparisonCheck chk = check_comparison(g, p.dist, p.loss, fe, slack);
    r.worst = std::max(r.worst, chk.lhs - chk.rhs);
    max_lhs = std::max(max_lhs, chk.lhs);
    r.failures += !chk.satisfied;
    ++r.cases;
  }
  r.passed = r.failures == 0;
  r.details = {{"violations", r.failures}, {"max_lhs", max_lhs}, {"slack", slack}};
  r.seconds = sw.seconds();
  return r;
}

SuiteResult fisher_suite(int cases, std::uint64_t seed, double tol) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "fisher_consistency";
  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const FiniteProblem p = random_problem(rng, 5, 10, c % 2 == 1);
    const FiniteEmbedding fe = finite_embedding(p.loss);
    const LabelList f = decode_table(exact_gstar(p.dist, fe), fe);
    const double gap = std::abs(structured_risk(f, p.dist, p.loss) - exact_fstar(p.dist, p.loss).risk);
    r.worst = std::max(r.worst, gap);
    r.failures += !(gap <= tol);
    ++r.cases;
  }
  r.passed = r.failures == 0;
  r.details = {{"tolerance", tol}};
  r.seconds = sw.seconds();
  return r;
}

SuiteResult loss_trick_suite(std::uint64_t seed, int max_outputs, int max_n, int test_points) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "loss_trick";
  Rng rng(seed);
  std::size_t fits = 0;
  const std::vector<int> sizes{std::max(2, max_n / 10), std::max(2, max_n / 2), max_n};
  for (int p = 2; p <= max_outputs; ++p) {
    for (int n : sizes) {
      const int T = uniform_int(rng, 2, max_outputs);
      const LossSpec loss = p % 3 == 0 ? make_loss({{"id", "zero_one"}, {"T", p}}) : random_table(rng, p, T);
      const FiniteEmbedding fe = finite_embedding(loss);
      Matrix X(n, 2);
      for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1.0, 1.0);
      LabelList Y;
      for (int i = 0; i < n; ++i) Y.push_back(fe.labels[rng.uniform_index(fe.labels.size())]);
      const std::vector<WeightAlgorithm> learners{
          Ridge{0.01}, L2Boost{0.5, 10}, Pcr{0.05},
          RandomFeatures{200, 0.01, rng.next_u64()}, Nystrom{std::max(1, n / 2), 0.01, rng.next_u64()},
          NadarayaWatson{}, NearestNeighbors{std::min(3, n)}};
      for (const auto& a : learners) {
        PredictorConfig cfg;
        cfg.kernel = KernelSpec::gaussian(0.7);
        cfg.algorithm = a;
        const StructuredPredictor f = fit(cfg, loss, X, Y);
        ++fits;
        for (int t = 0; t < test_points; ++t) {
          Point x(2);
          // Every fifth test point is a training input, where scores tie more often.
          if (t % 5 == 0)
            x = X.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)))).transpose();
          else
            x << rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2);
          r.failures += !same_label(f.predict(x), f.predict_explicit_finite(x, fe));
          ++r.cases;
        }
      }
    }
  }
  r.worst = static_cast<double>(r.failures);
  r.passed = r.failures == 0;
  r.details = {{"fits", fits}, {"mismatches", r.failures}, {"max_outputs", max_outputs}, {"max_n", max_n}};
  r.seconds = sw.seconds();
  return r;
}

SuiteResult filter_suite(int grid, double slack, double nu) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "spectral_filters";
  r.worst = -INFINITY;
  const auto sig = sigma_grid(1.0, grid);
  for (const FilterSpec f : {FilterSpec{FilterKind::Ridge, nu}, FilterSpec{FilterKind::Pcr, nu},
                             FilterSpec{FilterKind::L2Boost, nu}}) {
    const FilterConstants q = check_filter(f, sig, lambda_grid(f, grid));
    const FilterConstants s = stated_filter_constants(f);
    const bool ok = q.q1 <= s.q1 + slack && q.q2 <= s.q2 + slack;
    r.worst = std::max({r.worst, q.q1 - s.q1, q.q2 - s.q2});
    r.failures += !ok;
    ++r.cases;
    r.details[to_string(f.kind)] = {{"q1", q.q1}, {"q2", q.q2}, {"stated_q1", s.q1}, {"stated_q2", s.q2}, {"ok", ok}};
  }
  r.details["grid"] = {grid, grid};
  r.passed = r.failures == 0;
  r.seconds = sw.seconds();
  return r;
}

RateConfig default_rate_config() {
  RateConfig c;
  c.dist = gen_finite_classification(4, 2, 2, 500, 1.0);
  c.loss = {{"id", "zero_one"}, {"T", 2}};
  c.kernel = KernelSpec::gaussian(0.5);
  c.algorithm = "ridge";
  c.r = 0.0;
  c.gamma = 1.0;
  c.n_grid = {50, 100, 200, 400, 800, 1600};
  c.repetitions = 20;
  c.seed = 1;
  return c;
}

SuiteResult rate_suite(const RateConfig& config, double threshold) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "rate_slope";
  const RateResult res = rate_experiment(config);
  r.cases = res.cells.size();
  r.worst = res.slope ? *res.slope : NAN;
  r.passed = res.slope.has_value() && *res.slope <= threshold;
  r.failures = r.passed ? 0 : 1;
  r.details = rate_summary_json(res, config);
  r.details["threshold"] = threshold;
  r.seconds = sw.seconds();
  return r;
}

SuiteResult effective_dimension_suite(int matrices, int max_n, std::uint64_t seed, double slack) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "effective_dimension";
  r.worst = -INFINITY;
  Rng rng(seed);
  std::vector<double> lambdas;
  for (int i = 0; i < 60; ++i) lambdas.push_back(std::pow(10.0, -5.0 + 6.0 * i / 59.0));
  std::size_t monotone_breaks = 0;
  for (int t = 0; t < matrices; ++t) {
    const int n = uniform_int(rng, 2, max_n);
    const int d = uniform_int(rng, 1, 5);
    Matrix X(n, d);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1.0, 1.0);
    KernelSpec k;
    switch (t % 3) {
      case 0: k = KernelSpec::gaussian(std::pow(10.0, rng.uniform(-1.0, 1.0))); break;
      case 1: k = KernelSpec::laplacian(std::pow(10.0, rng.uniform(-1.0, 1.0))); break;
      default:
        // Rows scaled into the unit ball so that kappa^2 = 1 holds.
        for (Eigen::Index i = 0; i < n; ++i) X.row(i) /= std::max(1.0, X.row(i).norm());
        k = KernelSpec::linear(1.0);
    }
    const Vector curve = effective_dimension_curve(gram_matrix(k, X), lambdas);
    bool ok = true;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const double excess = curve(static_cast<Eigen::Index>(i)) - k.kappa_sq() / lambdas[i];
      r.worst = std::max(r.worst, excess);
      ok = ok && excess <= slack;
      if (i > 0 && curve(static_cast<Eigen::Index>(i)) > curve(static_cast<Eigen::Index>(i - 1))) {
        ok = false;
        ++monotone_breaks;
      }
    }
    r.failures += !ok;
    ++r.cases;
  }
  r.passed = r.failures == 0;
  r.details = {{"monotonicity_breaks", monotone_breaks}, {"slack", slack}, {"lambdas", lambdas.size()}};
  r.seconds = sw.seconds();
  return r;
}

SuiteResult nystrom_suite(int cases, std::uint64_t seed, double tol) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "nystrom_full_rank";
  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const int n = uniform_int(rng, 5, 60);
    const int d = uniform_int(rng, 1, 4);
    Matrix X(n, d);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1.0, 1.0);
    const KernelSpec k = KernelSpec::gaussian(rng.uniform(0.5, 2.0));
    // lambda >= 1e-2 keeps K + n lambda I well conditioned.
    const double lambda = std::pow(10.0, rng.uniform(-2.0, 0.0));
    const WeightModel ridge = fit_weights(X, k, Ridge{lambda});
    const WeightModel ny = fit_weights(X, k, Nystrom{n, lambda, rng.next_u64()});
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      Point x(d);
      for (int j = 0; j < d; ++j) x(j) = rng.uniform(-1.0, 1.0);
      const Vector a = ridge.alpha(x);
      worst = std::max(worst, (ny.alpha(x) - a).norm() / a.norm());
    }
    r.worst = std::max(r.worst, worst);
    r.failures += !(worst <= tol);
    ++r.cases;
  }
  r.passed = r.failures == 0;
  r.details = {{"tolerance", tol}};
  r.seconds = sw.seconds();
  return r;
}

SuiteResult random_feature_suite(int seeds, int features, int pairs, double tol, double min_share,
                                 std::uint64_t seed) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "random_features";
  Rng rng(seed);
  const int d = 3;
  Matrix X(4, d);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1.0, 1.0);
  const KernelSpec k = KernelSpec::gaussian(1.0);
  std::vector<double> sups;
  for (int s = 0; s < seeds; ++s) {
    const WeightModel m = fit_weights(X, k, RandomFeatures{features, 0.1, rng.next_u64()});
    double sup = 0.0;
    for (int p = 0; p < pairs; ++p) {
      Point a(d), b(d);
      for (int j = 0; j < d; ++j) {
        a(j) = rng.uniform(-1.0, 1.0);
        b(j) = rng.uniform(-1.0, 1.0);
      }
      sup = std::max(sup, std::abs(m.random_features(a).dot(m.random_features(b)) - eval_kernel(k, a, b)));
    }
    sups.push_back(sup);
    r.worst = std::max(r.worst, sup);
    r.failures += !(sup < tol);
    ++r.cases;
  }
  const double share = 1.0 - static_cast<double>(r.failures) / std::max<std::size_t>(1, r.cases);
  std::sort(sups.begin(), sups.end());
  r.passed = share >= min_share;
  r.details = {{"features", features}, {"pairs", pairs}, {"tolerance", tol}, {"passing_share", share},
               {"median_sup", sups.empty() ? 0.0 : sups[sups.size() / 2]}};
  r.seconds = sw.seconds();
  return r;
}

SuiteResult sphere_decoding_suite(int problems, int grid, double tol, std::uint64_t seed) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "sphere_decoding";
  const LossSpec loss = make_loss({{"id", "geodesic_sphere_sq"}, {"d", 2}});
  Rng rng(seed);
  double worst_sphere = 0.0, worst_sgd = 0.0;
  for (int c = 0; c < problems; ++c) {
    const int n = uniform_int(rng, 2, 30);
    const LabelList y = loss.label_space.sample(static_cast<std::size_t>(n), rng);
    Vector a(n);
    for (int i = 0; i < n; ++i) a(i) = rng.normal();
    a /= a.cwiseAbs().sum();
    const DecodeProblem p(a, y, loss);
    double best = INFINITY;
    for (int g = 0; g < grid; ++g) best = std::min(best, objective_unchecked(p, angle(2.0 * M_PI * g / grid)));
    const DecodeResult rs = decode_sphere(p);
    SgdOptions so;
    so.seed = rng.next_u64();
    const DecodeResult rg = decode_sgd(p, so);
    const double gs = std::abs(rs.objective - best), gg = std::abs(rg.objective - best);
    worst_sphere = std::max(worst_sphere, gs);
    worst_sgd = std::max(worst_sgd, gg);
    r.failures += !(gs <= tol) + !(gg <= tol);
    r.cases += 2;
  }
  r.worst = std::max(worst_sphere, worst_sgd);
  r.passed = r.failures == 0;
  r.details = {{"worst_sphere", worst_sphere}, {"worst_sgd", worst_sgd}, {"grid", grid}, {"tolerance", tol}};
  r.seconds = sw.seconds();
  return r;
}

SuiteResult embedding_suite(double tol, std::uint64_t seed) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "finite_embeddings";
  Rng rng(seed);
  std::vector<LossSpec> losses;
  for (int T = 2; T <= 8; ++T) losses.push_back(make_loss({{"id", "zero_one"}, {"T", T}}));
  losses.push_back(make_loss({{"id", "constant"}, {"value", 0.4}, {"T", 3}}));
  losses.push_back(random_table(rng, 4, 6));
  losses.push_back(random_table(rng, 7, 3));
  losses.push_back(combine(losses[0], losses[1], CombineMode::Sum));
  losses.push_back(combine(losses[0], losses[2], CombineMode::Product));
  // Continuous catalog losses restricted to sampled finite sets.
  const std::vector<nlohmann::json> continuous{
      {{"id", "squared_euclidean"}, {"d", 2}, {"radius", 1.0}},
      {{"id", "hellinger"}, {"bins", 3}},
      {{"id", "geodesic_sphere_sq"}, {"d", 3}},
      {{"id", "absolute"}, {"lo", -1.0}, {"hi", 1.0}},
      {{"id", "huber"}, {"delta", 0.3}, {"lo", -1.0}, {"hi", 1.0}},
      {{"id", "hinge"}},
      {{"id", "kde"}, {"kernel", KernelSpec::gaussian(0.8)}, {"dim", 2}},
      {{"id", "kde"}, {"kernel", KernelSpec::linear(1.0)}, {"dim", 3}}};
  for (const auto& cfg : continuous) {
    const LossSpec base = make_loss(cfg);
    const Space outs = base.output_space.is_finite() ? base.output_space
                                                     : Space::finite(base.output_space.sample(6, rng));
    const Space labs = Space::finite(base.label_space.sample(5, rng));
    losses.push_back(restrict(base, outs, labs));
  }
  for (const auto& l : losses) {
    const FiniteEmbedding fe = finite_embedding(l);
    const double rec = fe.reconstruction_error();
    const double phi = fe.max_phi_norm();
    const double psi = fe.max_psi_norm();
    const bool ok = rec <= tol && phi <= 1.0 && psi <= fe.closs_bound;
    r.worst = std::max(r.worst, rec);
    r.failures += !ok;
    ++r.cases;
    r.details[l.id + "#" + std::to_string(r.cases)] = {
        {"reconstruction_error", rec}, {"max_phi_norm", phi}, {"max_psi_norm", psi}, {"closs_bound", fe.closs_bound}};
  }
  r.passed = r.failures == 0;
  r.seconds = sw.seconds();
  return r;
}

SuiteResult fourier_suite(double tol) {
  Stopwatch sw;
  SuiteResult r;
  r.name = "fourier_truncation";
  // Periodic profile sum_{k != 0} cos(k u) / (2 k^4), in closed form.
  const auto v = [](double u) {
    const double x = std::abs(std::remainder(u, 2.0 * M_PI));
    const double p = M_PI;
    return p * p * p * p / 90.0 - p * p * x * x / 12.0 + p * x * x * x / 12.0 - x * x * x * x / 48.0;
  };
  FourierOptions o;
  o.box = M_PI / 2.0;
  o.period = 2.0 * M_PI;
  double prev = INFINITY;
  nlohmann::json errors = nlohmann::json::object();
  for (int Q : {1, 2, 4, 8, 16, 32, 64, 128, 200}) {
    o.truncation = Q;
    const FourierEmbedding fe = fourier_embedding(v, o);
    errors[std::to_string(Q)] = fe.reconstruction_error;
    r.failures += !(fe.reconstruction_error < prev);
    prev = fe.reconstruction_error;
    ++r.cases;
  }
  r.worst = prev;
  r.failures += !(prev < tol);
  r.passed = r.failures == 0;
  r.details = {{"errors", errors}, {"tolerance", tol}};
  r.seconds = sw.seconds();
  return r;
}

std::vector<SuiteResult> run_verify_suites(bool include_rates, std::uint64_t seed) {
  std::vector<SuiteResult> out;
  out.push_back(comparison_suite(1000, derive_seed(seed, {1})));
  out.push_back(fisher_suite(200, derive_seed(seed, {2})));
  out.push_back(loss_trick_suite(derive_seed(seed, {3})));
  out.push_back(filter_suite());
  out.push_back(effective_dimension_suite(1000, 100, derive_seed(seed, {4})));
  out.push_back(nystrom_suite(100, derive_seed(seed, {5})));
  out.push_back(random_feature_suite(100, 10000, 100, 0.05, 0.95, derive_seed(seed, {6})));
  out.push_back(sphere_decoding_suite(100, 10000, 1e-2, derive_seed(seed, {7})));
  out.push_back(embedding_suite(1e-12, derive_seed(seed, {8})));
  out.push_back(fourier_suite());
  if (include_rates) out.push_back(rate_suite(default_rate_config()));
  return out;
}

}  // namespace ile
