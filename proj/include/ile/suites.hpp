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


#ifndef ILE_SUITES_HPP
#define ILE_SUITES_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ile/diagnostics.hpp"

namespace ile {

// Randomized verification suites. Each returns counts, the worst observed
// value and its wall time; the caller decides what tolerance to apply
// through the options, which default to the values the tools use.

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0.0;  // suite-specific: largest violation, error or ratio
  double seconds = 0.0;
  nlohmann::json details = nlohmann::json::object();
  nlohmann::json to_json() const;
};

/// Random finite distributions (T <= max_labels, m <= max_support) with
/// perturbed g*; fails on lhs > rhs + slack. worst = max(lhs - rhs).
SuiteResult comparison_suite(int cases = 1000, std::uint64_t seed = 1, double slack = 1e-9, int max_labels = 5,
                             int max_support = 10);

/// Decoding exact g* versus f*: worst = max |E(d o g*) - E(f*)|.
SuiteResult fisher_suite(int cases = 200, std::uint64_t seed = 2, double tol = 1e-12);

/// Implicit versus explicit decoding on random tables with 2..max_outputs
/// outputs, training sizes up to max_n, every weight learner.
SuiteResult loss_trick_suite(std::uint64_t seed = 3, int max_outputs = 10, int max_n = 50, int test_points = 25);

/// Grid maxima against the known constants for ridge, pcr, l2boost(nu).
SuiteResult filter_suite(int grid = 1000, double slack = 1e-6, double nu = 0.5);

/// Rate slope of a configured experiment; passes when slope <= threshold.
SuiteResult rate_suite(const RateConfig& config, double threshold = -0.20);
/// Smooth binary task used by default: 500 support points in [-1,1]^2,
/// temperature 1, gaussian kernel sigma 0.5, ridge lambda_n = n^{-1/2}.
RateConfig default_rate_config();

/// d_eff <= kappa^2 / lambda + slack and non-increasing in lambda.
SuiteResult effective_dimension_suite(int matrices = 1000, int max_n = 100, std::uint64_t seed = 4,
                                      double slack = 1e-9);

/// Nystrom with M = n against ridge: worst relative alpha error.
SuiteResult nystrom_suite(int cases = 100, std::uint64_t seed = 5, double tol = 1e-8);

/// Random Fourier features: per seed, sup over `pairs` of |khat - k|; a seed
/// passes below tol; the suite passes when the passing share >= min_share.
SuiteResult random_feature_suite(int seeds = 100, int features = 10000, int pairs = 100, double tol = 0.05,
                                 double min_share = 0.95, std::uint64_t seed = 6);

/// Sphere and SGD decoders on S^1 versus a grid argmin: worst gap.
SuiteResult sphere_decoding_suite(int problems = 100, int grid = 10000, double tol = 1e-2, std::uint64_t seed = 7);

/// Finite embeddings of every catalog loss on finite domains.
SuiteResult embedding_suite(double tol = 1e-12, std::uint64_t seed = 8);

/// Truncated Fourier embedding of sum_k cos(ku)/k^4 for increasing Q.
SuiteResult fourier_suite(double tol = 1e-2);

/// The suites run by `ile verify`, seeded from `seed`; the rate experiment
/// is skipped unless include_rates.
std::vector<SuiteResult> run_verify_suites(bool include_rates, std::uint64_t seed);

}  // namespace ile

#endif  // ILE_SUITES_HPP
