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


#ifndef ILE_DATA_HPP
#define ILE_DATA_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ile/common.hpp"
#include "ile/rng.hpp"

namespace ile {

/// Training sample plus a description of where it came from.
struct Dataset {
  Matrix X;     // n x d
  LabelList Y;  // n labels
  nlohmann::json task = nlohmann::json::object();
  Eigen::Index size() const { return X.rows(); }
};

/// Distribution with finitely many inputs and labels, given by tables.
struct SyntheticDistribution {
  Matrix support;       // m x d, row k is x_k
  Vector marginal;      // p(x_k)
  LabelList labels;     // the label set, size T
  Matrix conditional;   // m x T, row k is rho(. | x_k)
  nlohmann::json task = nlohmann::json::object();

  Eigen::Index support_size() const { return support.rows(); }
  Eigen::Index label_count() const { return conditional.cols(); }
  /// Throws InputError unless p and every conditional row are probability
  /// vectors (sums within 1e-12).
  void validate() const;
  nlohmann::json to_json() const;
  static SyntheticDistribution from_json(const nlohmann::json& j);
};

/// I.i.d. draws: support point by the marginal, label by its conditional.
/// Chunks of 4096 draws use derived seeds, so the result does not depend on
/// the thread count.
Dataset sample(const SyntheticDistribution& dist, Eigen::Index n, std::uint64_t seed);

/// Support points uniform on [-1,1]^d, random marginal, labels 1..T with
/// rho(.|x) = softmax(s(x) / temperature) for a smooth random score field s.
SyntheticDistribution gen_finite_classification(std::uint64_t seed, int d, int T, int m, double temperature);

/// Smooth random map R^d -> R^k: sum of `terms` sinusoids.
struct SmoothField {
  Matrix freq;      // terms x d
  Vector phase;     // terms
  Matrix amp;       // k x terms
  Vector offset;    // k
  Vector operator()(const Point& x) const;
  static SmoothField random(Rng& rng, int d, int k, int terms, double amp_scale);
};

/// Unit-vector field mu(x) on S^{dim-1} with von Mises-Fisher noise of
/// concentration kappa (infinite kappa: noise free). The Frechet mean of the
/// geodesic-squared loss at x is mu(x) by rotational symmetry.
class SphereRegressionTask {
 public:
  SphereRegressionTask(std::uint64_t seed, int dim, double kappa, int input_dim = 2);
  int dim() const { return dim_; }
  int input_dim() const { return input_dim_; }
  double kappa() const { return kappa_; }
  Label mean(const Point& x) const;
  Label fstar(const Point& x) const { return mean(x); }
  Dataset sample(Eigen::Index n, std::uint64_t seed) const;
  nlohmann::json describe() const;

 private:
  std::uint64_t seed_;
  int dim_;
  double kappa_;
  int input_dim_;
  SmoothField field_;
};

/// vMF(mu, kappa) draw by Wood's rejection sampler.
Label sample_vmf(const Label& mu, double kappa, Rng& rng);

SphereRegressionTask gen_sphere_regression(std::uint64_t seed, int dim, double kappa, int input_dim = 2);

/// Histogram labels: y ~ Dirichlet(concentration * p(x)) with p(x) the
/// softmax of a smooth field, so E[y | x] = p(x).
class HistogramTask {
 public:
  HistogramTask(std::uint64_t seed, int bins, int input_dim, double concentration = 20.0);
  int bins() const { return bins_; }
  int input_dim() const { return input_dim_; }
  double concentration() const { return concentration_; }
  Vector mean(const Point& x) const;
  Dataset sample(Eigen::Index n, std::uint64_t seed) const;
  nlohmann::json describe() const;

 private:
  std::uint64_t seed_;
  int bins_;
  int input_dim_;
  double concentration_;
  SmoothField field_;
};

HistogramTask gen_histogram_task(std::uint64_t seed, int bins, int input_dim, double concentration = 20.0);

/// Inputs to <prefix>.csv (columns x1..xd), labels and task to <prefix>.json.
void save_dataset(const Dataset& data, const std::string& prefix);
Dataset load_dataset(const std::string& prefix);

}  // namespace ile

#endif  // ILE_DATA_HPP
