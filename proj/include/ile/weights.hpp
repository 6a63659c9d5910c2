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

#ifndef ILE_WEIGHTS_HPP
#define ILE_WEIGHTS_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ile/common.hpp"
#include "ile/kernels.hpp"
#include "ile/parallel.hpp"

namespace ile {

// Score function learners. Every learner produces alpha : X -> R^n, and the
// structured estimator is argmin_z sum_i alpha_i(x) loss(z, y_i).

/// alpha(x) = (K + n lambda I)^{-1} v(x)
struct Ridge {
  double lambda = 0.0;
};

/// alpha(x) = C_t v(x),  C_t = (I - nu/n K) C_{t-1} + nu/n I,  C_0 = 0.
struct L2Boost {
  double nu = 0.5;
  int steps = 1;
};

/// alpha(x) = U S_lambda^+ U^T v(x); eigenvalues of K below lambda dropped.
struct Pcr {
  double lambda = 0.0;
};

/// Random Fourier features for the gaussian kernel:
/// alpha(x) = Q (Q^T Q + n lambda I)^{-1} vhat(x).
struct RandomFeatures {
  int features = 100;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

/// alpha(x) = K_nM (K_nM^T K_nM + n lambda K_MM)^+ v_M(x), with M landmarks
/// drawn uniformly without replacement.
struct Nystrom {
  int landmarks = 10;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

/// alpha(x) = v(x) / (1^T v(x))
struct NadarayaWatson {};

/// alpha_i(x) = 1 for the q nearest training inputs in the kernel metric.
struct NearestNeighbors {
  int q = 1;
};

using ExactAlgorithm = std::variant<Ridge, L2Boost, Pcr>;
using ApproxAlgorithm = std::variant<RandomFeatures, Nystrom>;
using LocalAlgorithm = std::variant<NadarayaWatson, NearestNeighbors>;
using WeightAlgorithm =
    std::variant<Ridge, L2Boost, Pcr, RandomFeatures, Nystrom, NadarayaWatson, NearestNeighbors>;

/// Short identifier: ridge, l2boost, pcr, randfeat, nystrom, nw, nn.
std::string algorithm_name(const WeightAlgorithm& a);

void to_json(nlohmann::json& j, const WeightAlgorithm& a);
void from_json(const nlohmann::json& j, WeightAlgorithm& a);

/// Fitted state of a score learner. Immutable once built; alpha() is pure
/// and safe to call from many threads.
class WeightModel {
 public:
  WeightModel() = default;

  const WeightAlgorithm& algorithm() const { return algorithm_; }
  std::string name() const { return algorithm_name(algorithm_); }
  const KernelSpec& kernel() const { return kernel_; }
  const Matrix& inputs() const { return inputs_; }
  Eigen::Index n() const { return inputs_.rows(); }
  Eigen::Index dim() const { return inputs_.cols(); }

  /// Score vector of length n for one test input.
  Vector alpha(const Point& x) const;

  /// Columns are alpha of the rows of X_test; n x m. Points are independent,
  /// so the parallel and serial paths agree bit for bit.
  Matrix alpha_batch(const Matrix& X_test, Exec exec = Exec::Parallel) const;

  /// Random feature map vhat_M(x) = sqrt(2/M) cos(Omega^T x + b).
  /// Only valid for RandomFeatures models.
  Vector random_features(const Point& x) const;

  // Dense state, exposed for diagnostics and tests.
  const Matrix& boost_matrix() const { return dense_; }         // L2Boost: C_t
  const Vector& spectrum() const { return eigenvalues_; }       // Pcr: eigenvalues of K
  const std::vector<int>& landmark_indices() const { return landmarks_; }  // Nystrom
  const Matrix& projection() const { return dense_; }           // RF / Nystrom: W
  bool used_cholesky() const { return cholesky_; }              // Ridge

  nlohmann::json to_json() const;
  static WeightModel from_json(const nlohmann::json& j);

 private:
  friend WeightModel fit_weights(const Matrix&, const KernelSpec&, const WeightAlgorithm&);

  Vector apply(const Point& x) const;

  WeightAlgorithm algorithm_;
  KernelSpec kernel_;
  Matrix inputs_;
  Vector train_diag_;  // k(x_i, x_i), used by nearest neighbours

  // Ridge: lower Cholesky factor of K + n lambda I, or the eigenbasis and
  // inverted spectrum when Cholesky fails. Pcr: eigenbasis and filtered
  // inverse spectrum. L2Boost: C_t. RF / Nystrom: W.
  bool cholesky_ = false;
  Matrix dense_;
  Matrix basis_;
  Vector eigenvalues_;
  Vector inverse_spectrum_;

  // Random features: frequencies (d x M) and phases (M).
  Matrix omega_;
  Vector phase_;

  std::vector<int> landmarks_;
  Matrix landmark_points_;  // M x d
};

WeightModel fit_weights(const Matrix& X, const KernelSpec& kernel, const WeightAlgorithm& algorithm);

WeightModel fit_weights_exact(const Matrix& X, const KernelSpec& kernel, const ExactAlgorithm& algorithm);
WeightModel fit_weights_approx(const Matrix& X, const KernelSpec& kernel, const ApproxAlgorithm& algorithm);
WeightModel fit_weights_local(const Matrix& X, const KernelSpec& kernel, const LocalAlgorithm& algorithm);

/// Free-function form of WeightModel::alpha.
inline Vector alpha(const WeightModel& model, const Point& x) { return model.alpha(x); }

}  // namespace ile

#endif  // ILE_WEIGHTS_HPP
