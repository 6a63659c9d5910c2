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


#ifndef ILE_DIAGNOSTICS_HPP
#define ILE_DIAGNOSTICS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ile/data.hpp"
#include "ile/kernels.hpp"
#include "ile/losses.hpp"
#include "ile/parallel.hpp"
#include "ile/weights.hpp"

namespace ile {

// Exact risk calculus on finite synthetic distributions. Every quantity is a
// finite sum over the support, never a Monte Carlo estimate.

/// Row k is g*(x_k) = sum_y rho(y|x_k) phi(y), in the embedding's label
/// coordinates (m x q). Throws InputError if the label sets differ.
Matrix exact_gstar(const SyntheticDistribution& dist, const FiniteEmbedding& fe);

struct BayesPredictor {
  LabelList outputs;        // f*(x_k)
  Vector pointwise;         // min_z sum_y rho(y|x_k) loss(z, y)
  double risk = 0.0;        // sum_k p(x_k) pointwise(k)
};

/// Brute-force argmin over `outputs` (default: the loss's finite output list).
/// Ties go to the first output in list order.
BayesPredictor exact_fstar(const SyntheticDistribution& dist, const LossSpec& loss,
                           const std::optional<LabelList>& outputs = std::nullopt);

/// E(f) for a table f(x_k).
double structured_risk(const LabelList& f, const SyntheticDistribution& dist, const LossSpec& loss);
/// E(f) - E(f*), with f* over the loss's output list.
double structured_excess_risk(const LabelList& f, const SyntheticDistribution& dist, const LossSpec& loss);
/// sum_k p(x_k) |g(x_k) - g*(x_k)|^2.
double surrogate_excess_risk(const Matrix& g, const SyntheticDistribution& dist, const FiniteEmbedding& fe);

/// Row-wise argmin_z <psi(z), g_k> over the table outputs, first index on ties.
LabelList decode_table(const Matrix& g, const FiniteEmbedding& fe);

struct ComparisonCheck {
  double lhs = 0.0;    // E(d o g) - E(f*)
  double rhs = 0.0;    // 2 c sqrt(R(g) - R(g*))
  double closs = 0.0;  // c = fe.closs_bound
  bool satisfied = false;
};

ComparisonCheck check_comparison(const Matrix& g, const SyntheticDistribution& dist, const LossSpec& loss,
                                 const FiniteEmbedding& fe, double slack = 1e-9);

/// sum_i s_i / (s_i + lambda) over the eigenvalues s_i of K/n (clamped at 0).
double effective_dimension(const GramMatrix& K, double lambda);
/// Same for several lambdas with one eigendecomposition.
Vector effective_dimension_curve(const GramMatrix& K, const std::vector<double>& lambdas);

enum class FilterKind { Ridge, L2Boost, Pcr };
std::string to_string(FilterKind k);
FilterKind filter_kind_from_string(const std::string& s);

/// Spectral filter eta_lambda on (0, kappa^2].
///   ridge    1 / (sigma + lambda)
///   l2boost  nu sum_{j=0}^{t} (1 - nu sigma)^j with t = 1/lambda (rounded)
///   pcr      1/sigma if sigma >= lambda, else 0
/// An L2Boost model after s steps applies the l2boost filter with t = s - 1
/// to the spectrum of K/n, scaled by 1/n.
struct FilterSpec {
  FilterKind kind = FilterKind::Ridge;
  double nu = 0.5;
};

double filter_value(const FilterSpec& f, double sigma, double lambda);
/// 1 - sigma eta_lambda(sigma) in closed form (no cancellation for small lambda).
double filter_residual(const FilterSpec& f, double sigma, double lambda);

struct FilterConstants {
  double q1 = 0.0;
  double q2 = 0.0;
};

/// Grid maxima of (sigma + lambda) eta and (1 - sigma eta)(sigma + lambda) / lambda.
FilterConstants check_filter(const FilterSpec& f, const std::vector<double>& sigmas,
                             const std::vector<double>& lambdas);
/// Known constants: ridge (1, 1), pcr (2, 2), l2boost (1 + 2 nu, e^{nu-1}/nu).
FilterConstants stated_filter_constants(const FilterSpec& f);
/// `count` geometric points on [kappa^2 1e-6, kappa^2].
std::vector<double> sigma_grid(double kappa_sq, int count);
/// ridge / pcr: `count` geometric points on [1e-6, 10]; l2boost: 1/t for t = 1..count.
std::vector<double> lambda_grid(const FilterSpec& f, int count);

/// lambda_n = n^{-1/(2r + gamma + 1)}; r >= 0, gamma in [0, 1].
double schedule_lambda(double n, double r, double gamma);

struct RateConfig {
  SyntheticDistribution dist;
  nlohmann::json loss = {{"id", "zero_one"}, {"T", 2}};
  KernelSpec kernel = KernelSpec::gaussian(1.0);
  /// ridge | pcr | l2boost | nystrom | randfeat | nw | nn
  std::string algorithm = "ridge";
  double r = 0.0;
  double gamma = 1.0;
  double lambda_scale = 1.0;  // lambda_n multiplied by this
  double nu = 0.5;            // l2boost step size
  int q = 1;                  // nn neighbours
  std::vector<int> n_grid = {50, 100, 200, 400, 800, 1600};
  int repetitions = 20;
  std::uint64_t seed = 0;

  /// Throws ParameterError with the offending field name.
  void validate() const;
};

void to_json(nlohmann::json& j, const RateConfig& c);
void from_json(const nlohmann::json& j, RateConfig& c);

/// Learner used at sample size n; `seed` feeds the randomized learners.
WeightAlgorithm scheduled_algorithm(const RateConfig& c, int n, std::uint64_t seed);

struct RateCell {
  int n = 0;
  int rep = 0;
  double excess = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

struct RateRow {
  int n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double lambda = 0.0;
};

struct RateResult {
  std::vector<RateCell> cells;  // ordered by (n, rep)
  std::vector<RateRow> rows;    // one per n
  /// Least squares fit of log(mean excess) on log(n). Unset when any mean is
  /// zero (saturated) or fewer than two points are available.
  std::optional<double> slope;
  std::optional<double> intercept;
  std::optional<double> ci_low;   // 95% t interval
  std::optional<double> ci_high;
  bool saturated = false;
};

/// Cells (n, rep) run in parallel; each samples with derive_seed(seed, {n, rep}).
RateResult rate_experiment(const RateConfig& config, Exec exec = Exec::Parallel);

/// Columns n, rep, excess, lambda, seed.
void write_rate_csv(std::ostream& os, const RateResult& r);
nlohmann::json rate_summary_json(const RateResult& r, const RateConfig& c);

/// Ordinary least squares y = a + b x with a 95% t interval on b.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ile

#endif  // ILE_DIAGNOSTICS_HPP
