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


#include "ile/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include "ile/estimator.hpp"
#include "ile/io.hpp"
#include "ile/json_util.hpp"
#include "ile/rng.hpp"

namespace ile {
namespace {

Eigen::Index find_label(const LabelList& list, const Label& y) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if (same_label(list[i], y)) return static_cast<Eigen::Index>(i);
  return -1;
}

// Column j of the result is the embedding position of dist.labels[j].
std::vector<Eigen::Index> label_map(const SyntheticDistribution& dist, const FiniteEmbedding& fe) {
  if (dist.labels.size() != fe.labels.size())
    throw InputError("embedding label set differs from the distribution's label set");
  std::vector<Eigen::Index> map;
  for (const auto& y : dist.labels) {
    const Eigen::Index j = find_label(fe.labels, y);
    if (j < 0) throw InputError("label " + format_label(y) + " is missing from the embedding");
    map.push_back(j);
  }
  return map;
}

double conditional_loss(const SyntheticDistribution& dist, Eigen::Index k, const LossSpec& loss, const Label& z) {
  double acc = 0.0;
  for (Eigen::Index t = 0; t < dist.label_count(); ++t) {
    const double w = dist.conditional(k, t);
    if (w != 0.0) acc += w * loss(z, dist.labels[static_cast<std::size_t>(t)]);
  }
  return acc;
}

// Two-sided 95% quantiles of Student's t, df = 1..30.
constexpr double kT975[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                            2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                            2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};

double t975(int df) { return df <= 30 ? kT975[df - 1] : 1.96; }

}  // namespace

Matrix exact_gstar(const SyntheticDistribution& dist, const FiniteEmbedding& fe) {
  dist.validate();
  const auto map = label_map(dist, fe);
  Matrix g = Matrix::Zero(dist.support_size(), fe.phi.cols());
  for (Eigen::Index k = 0; k < dist.support_size(); ++k)
    for (Eigen::Index t = 0; t < dist.label_count(); ++t)
      g.row(k) += dist.conditional(k, t) * fe.phi.row(map[static_cast<std::size_t>(t)]);
  return g;
}

BayesPredictor exact_fstar(const SyntheticDistribution& dist, const LossSpec& loss,
                           const std::optional<LabelList>& outputs) {
  dist.validate();
  const LabelList Z = outputs ? *outputs : loss.output_space.elements();
  if (Z.empty()) throw InputError("exact_fstar: empty output list");
  BayesPredictor b;
  b.pointwise.resize(dist.support_size());
  for (Eigen::Index k = 0; k < dist.support_size(); ++k) {
    std::size_t best = 0;
    double best_value = conditional_loss(dist, k, loss, Z[0]);
    for (std::size_t c = 1; c < Z.size(); ++c) {
      const double v = conditional_loss(dist, k, loss, Z[c]);
      if (v < best_value) {
        best_value = v;
        best = c;
      }
    }
    b.outputs.push_back(Z[best]);
    b.pointwise(k) = best_value;
  }
  b.risk = dist.marginal.dot(b.pointwise);
  return b;
}

double structured_risk(const LabelList& f, const SyntheticDistribution& dist, const LossSpec& loss) {
  dist.validate();
  if (static_cast<Eigen::Index>(f.size()) != dist.support_size())
    throw InputError("structured_risk: table has " + std::to_string(f.size()) + " entries, support has " +
                     std::to_string(dist.support_size()));
  double r = 0.0;
  for (Eigen::Index k = 0; k < dist.support_size(); ++k)
    r += dist.marginal(k) * conditional_loss(dist, k, loss, f[static_cast<std::size_t>(k)]);
  return r;
}

double structured_excess_risk(const LabelList& f, const SyntheticDistribution& dist, const LossSpec& loss) {
  return structured_risk(f, dist, loss) - exact_fstar(dist, loss).risk;
}

double surrogate_excess_risk(const Matrix& g, const SyntheticDistribution& dist, const FiniteEmbedding& fe) {
  const Matrix gs = exact_gstar(dist, fe);
  if (g.rows() != gs.rows() || g.cols() != gs.cols())
    throw InputError("surrogate_excess_risk: g table has the wrong shape");
  return dist.marginal.dot((g - gs).rowwise().squaredNorm());
}

LabelList decode_table(const Matrix& g, const FiniteEmbedding& fe) {
  if (g.cols() != fe.psi.cols()) throw InputError("decode_table: g has the wrong number of columns");
  const Matrix scores = g * fe.psi.transpose();  // m x p
  LabelList out;
  for (Eigen::Index k = 0; k < scores.rows(); ++k) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c)
      if (scores(k, c) < scores(k, best)) best = c;
    out.push_back(fe.outputs[static_cast<std::size_t>(best)]);
  }
  return out;
}

ComparisonCheck check_comparison(const Matrix& g, const SyntheticDistribution& dist, const LossSpec& loss,
                                 const FiniteEmbedding& fe, double slack) {
  ComparisonCheck c;
  const LabelList f = decode_table(g, fe);
  c.lhs = structured_risk(f, dist, loss) - exact_fstar(dist, loss, fe.outputs).risk;
  c.closs = fe.closs_bound;
  c.rhs = 2.0 * c.closs * std::sqrt(std::max(0.0, surrogate_excess_risk(g, dist, fe)));
  c.satisfied = c.lhs <= c.rhs + slack;
  return c;
}

Vector effective_dimension_curve(const GramMatrix& K, const std::vector<double>& lambdas) {
  for (double l : lambdas)
    if (!(l > 0.0)) throw ParameterError("effective_dimension: lambda must be positive");
  const auto n = static_cast<double>(K.size());
  Eigen::SelfAdjointEigenSolver<Matrix> es(K.entries / n, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("effective_dimension: eigendecomposition failed");
  const Vector s = es.eigenvalues().cwiseMax(0.0);
  Vector out(static_cast<Eigen::Index>(lambdas.size()));
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = (s.array() / (s.array() + lambdas[i])).sum();
  return out;
}

double effective_dimension(const GramMatrix& K, double lambda) { return effective_dimension_curve(K, {lambda})(0); }

std::string to_string(FilterKind k) {
  switch (k) {
    case FilterKind::Ridge: return "ridge";
    case FilterKind::L2Boost: return "l2boost";
    case FilterKind::Pcr: return "pcr";
  }
  return "?";
}

FilterKind filter_kind_from_string(const std::string& s) {
  if (s == "ridge") return FilterKind::Ridge;
  if (s == "l2boost") return FilterKind::L2Boost;
  if (s == "pcr") return FilterKind::Pcr;
  throw ParameterError("unknown filter '" + s + "' (expected ridge, l2boost or pcr)");
}

double filter_value(const FilterSpec& f, double sigma, double lambda) {
  if (!(sigma > 0.0) || !(lambda > 0.0)) throw ParameterError("filter_value: sigma and lambda must be positive");
  switch (f.kind) {
    case FilterKind::Ridge:
      return 1.0 / (sigma + lambda);
    case FilterKind::Pcr:
      return sigma >= lambda ? 1.0 / sigma : 0.0;
    case FilterKind::L2Boost: {
      if (!(f.nu > 0.0) || !(f.nu * sigma < 1.0)) throw ParameterError("filter_value: l2boost needs 0 < nu sigma < 1");
      const double t = std::max(1.0, std::round(1.0 / lambda));
      // nu sum_{j=0}^{t} (1 - nu s)^j = (1 - (1 - nu s)^{t+1}) / s
      return -std::expm1((t + 1.0) * std::log1p(-f.nu * sigma)) / sigma;
    }
  }
  return 0.0;
}

double filter_residual(const FilterSpec& f, double sigma, double lambda) {
  const double eta = filter_value(f, sigma, lambda);  // validates arguments
  switch (f.kind) {
    case FilterKind::Ridge:
      return lambda / (sigma + lambda);
    case FilterKind::Pcr:
      return sigma >= lambda ? 0.0 : 1.0;
    case FilterKind::L2Boost: {
      const double t = std::max(1.0, std::round(1.0 / lambda));
      return std::exp((t + 1.0) * std::log1p(-f.nu * sigma));
    }
  }
  return 1.0 - sigma * eta;
}

FilterConstants check_filter(const FilterSpec& f, const std::vector<double>& sigmas,
                             const std::vector<double>& lambdas) {
  FilterConstants q;
  for (double l : lambdas)
    for (double s : sigmas) {
      q.q1 = std::max(q.q1, (s + l) * filter_value(f, s, l));
      q.q2 = std::max(q.q2, filter_residual(f, s, l) * (s + l) / l);
    }
  return q;
}

FilterConstants stated_filter_constants(const FilterSpec& f) {
  switch (f.kind) {
    case FilterKind::Ridge: return {1.0, 1.0};
    case FilterKind::Pcr: return {2.0, 2.0};
    case FilterKind::L2Boost: return {1.0 + 2.0 * f.nu, std::exp(f.nu - 1.0) / f.nu};
  }
  return {};
}

std::vector<double> sigma_grid(double kappa_sq, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] = kappa_sq * std::pow(1e-6, 1.0 - static_cast<double>(i) / std::max(1, count - 1));
  return g;
}

std::vector<double> lambda_grid(const FilterSpec& f, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double u = static_cast<double>(i) / std::max(1, count - 1);
    g[static_cast<std::size_t>(i)] = f.kind == FilterKind::L2Boost ? 1.0 / (i + 1.0) : 1e-6 * std::pow(1e7, u);
  }
  return g;
}

double schedule_lambda(double n, double r, double gamma) {
  if (!(r >= 0.0)) throw ParameterError("schedule: r must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("schedule: gamma must lie in [0, 1]");
  if (!(n >= 1.0)) throw ParameterError("schedule: n must be >= 1");
  return std::pow(n, -1.0 / (2.0 * r + gamma + 1.0));
}

void RateConfig::validate() const {
  dist.validate();
  (void)schedule_lambda(1.0, r, gamma);
  static const std::vector<std::string> kAlgorithms{"ridge", "pcr", "l2boost", "nystrom", "randfeat", "nw", "nn"};
  if (std::find(kAlgorithms.begin(), kAlgorithms.end(), algorithm) == kAlgorithms.end())
    throw ParameterError("algorithm: unknown learner '" + algorithm + "'");
  if (n_grid.size() < 4) throw ParameterError("n_grid: needs at least 4 sample sizes");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ParameterError("n_grid: sizes must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ParameterError("n_grid: sizes must be strictly increasing");
  }
  if (repetitions < 10) throw ParameterError("repetitions: needs at least 10");
  if (!(lambda_scale > 0.0)) throw ParameterError("lambda_scale: must be positive");
  if (algorithm == "l2boost" && !(nu > 0.0 && nu * kernel.kappa_sq() < 1.0))
    throw ParameterError("nu: l2boost needs 0 < nu < 1/kappa^2");
  if (algorithm == "nn" && q < 1) throw ParameterError("q: must be >= 1");
  kernel.validate();
  const LossSpec l = make_loss(loss);
  if (!l.output_space.is_finite()) throw ParameterError("loss: rate experiments need a finite output set");
  for (const auto& y : dist.labels)
    if (!l.label_space.contains(y)) throw ParameterError("loss: label " + format_label(y) + " is outside its domain");
}

void to_json(nlohmann::json& j, const RateConfig& c) {
  j = {{"distribution", c.dist.to_json()}, {"loss", c.loss}, {"kernel", c.kernel},
       {"algorithm", c.algorithm}, {"r", c.r}, {"gamma", c.gamma},
       {"lambda_scale", c.lambda_scale}, {"nu", c.nu}, {"q", c.q},
       {"n_grid", c.n_grid}, {"repetitions", c.repetitions}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, RateConfig& c) {
  c = RateConfig{};
  c.dist = SyntheticDistribution::from_json(j.at("distribution"));
  if (j.contains("loss")) c.loss = j.at("loss");
  if (j.contains("kernel")) c.kernel = j.at("kernel").get<KernelSpec>();
  c.algorithm = j.value("algorithm", c.algorithm);
  c.r = j.value("r", c.r);
  c.gamma = j.value("gamma", c.gamma);
  c.lambda_scale = j.value("lambda_scale", c.lambda_scale);
  c.nu = j.value("nu", c.nu);
  c.q = j.value("q", c.q);
  if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<int>>();
  c.repetitions = j.value("repetitions", c.repetitions);
  c.seed = j.value("seed", c.seed);
}

WeightAlgorithm scheduled_algorithm(const RateConfig& c, int n, std::uint64_t seed) {
  const double lambda = c.lambda_scale * schedule_lambda(n, c.r, c.gamma);
  // Approximate learners use sqrt(n) log n features or landmarks, capped at n.
  const int budget = std::clamp(static_cast<int>(std::ceil(std::sqrt(n) * std::log(std::max(n, 3)))), 1, n);
  if (c.algorithm == "ridge") return Ridge{lambda};
  if (c.algorithm == "pcr") return Pcr{lambda};
  if (c.algorithm == "l2boost") return L2Boost{c.nu, std::max(1, static_cast<int>(std::ceil(1.0 / lambda)))};
  if (c.algorithm == "nystrom") return Nystrom{budget, lambda, seed};
  if (c.algorithm == "randfeat") return RandomFeatures{budget, lambda, seed};
  if (c.algorithm == "nw") return NadarayaWatson{};
  if (c.algorithm == "nn") return NearestNeighbors{c.q};
  throw ParameterError("algorithm: unknown learner '" + c.algorithm + "'");
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("fit_line: needs at least two (x, y) pairs");
  const auto k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / k;
    my += y[i] / k;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InputError("fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - f.intercept - f.slope * x[i];
      rss += e * e;
    }
    f.slope_stderr = std::sqrt(rss / (k - 2.0) / sxx);
  }
  const double t = x.size() > 2 ? t975(static_cast<int>(x.size()) - 2) : 0.0;
  f.ci_low = f.slope - t * f.slope_stderr;
  f.ci_high = f.slope + t * f.slope_stderr;
  return f;
}

RateResult rate_experiment(const RateConfig& config, Exec exec) {
  config.validate();
  const LossSpec loss = make_loss(config.loss);
  const double bayes = exact_fstar(config.dist, loss).risk;
  const int reps = config.repetitions;
  const auto cells = static_cast<int>(config.n_grid.size()) * reps;
  RateResult out;
  out.cells.resize(static_cast<std::size_t>(cells));
  std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
  for (int c = 0; c < cells; ++c) {
    try {
      RateCell& cell = out.cells[static_cast<std::size_t>(c)];
      cell.n = config.n_grid[static_cast<std::size_t>(c / reps)];
      cell.rep = c % reps;
      cell.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(cell.n), static_cast<std::uint64_t>(cell.rep)});
      cell.lambda = config.lambda_scale * schedule_lambda(cell.n, config.r, config.gamma);
      const Dataset data = sample(config.dist, cell.n, cell.seed);
      PredictorConfig pc;
      pc.kernel = config.kernel;
      pc.algorithm = scheduled_algorithm(config, cell.n, derive_seed(cell.seed, {1}));
      pc.seed = cell.seed;
      const StructuredPredictor f = fit(pc, loss, data.X, data.Y);
      const LabelList table = f.predict_batch(config.dist.support, Exec::Serial);
      cell.excess = structured_risk(table, config.dist, loss) - bayes;
    } catch (...) {
#pragma omp critical(ile_rate_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    RateRow row;
    row.n = config.n_grid[i];
    row.lambda = out.cells[i * static_cast<std::size_t>(reps)].lambda;
    double sum = 0.0, sq = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double e = out.cells[i * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)].excess;
      sum += e;
      sq += e * e;
    }
    row.mean = sum / reps;
    const double var = std::max(0.0, (sq - reps * row.mean * row.mean) / (reps - 1));
    row.stderr_ = std::sqrt(var / reps);
    out.rows.push_back(row);
    // Means at rounding level count as zero excess.
    if (row.mean <= 1e-14) out.saturated = true;
    lx.push_back(std::log(row.n));
    ly.push_back(std::log(std::max(row.mean, 1e-300)));
  }
  if (!out.saturated) {
    const LineFit lf = fit_line(lx, ly);
    out.slope = lf.slope;
    out.intercept = lf.intercept;
    out.ci_low = lf.ci_low;
    out.ci_high = lf.ci_high;
  }
  return out;
}

void write_rate_csv(std::ostream& os, const RateResult& r) {
  CsvTable t;
  t.header = {"n", "rep", "excess", "lambda", "seed"};
  for (const auto& c : r.cells)
    t.rows.push_back({std::to_string(c.n), std::to_string(c.rep), format_double(c.excess), format_double(c.lambda),
                      std::to_string(c.seed)});
  write_csv(os, t);
}

nlohmann::json rate_summary_json(const RateResult& r, const RateConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n}, {"mean", row.mean}, {"stderr", row.stderr_}, {"lambda", row.lambda}});
  const double expo = 1.0 / (2.0 * c.r + c.gamma + 1.0);
  return {{"format", "ile.rates"},
          {"schema_version", kSchemaVersion},
          {"schedule", {{"r", c.r}, {"gamma", c.gamma}, {"exponent", expo}, {"lambda_scale", c.lambda_scale},
                        {"formula", "lambda_n = " + format_double(c.lambda_scale) + " * n^(-" + format_double(expo) + ")"}}},
          {"algorithm", c.algorithm},
          {"repetitions", c.repetitions},
          {"seed", c.seed},
          {"rows", rows},
          {"slope", opt(r.slope)},
          {"intercept", opt(r.intercept)},
          {"ci95", {opt(r.ci_low), opt(r.ci_high)}},
          {"saturated", r.saturated}};
}

}  // namespace ile
