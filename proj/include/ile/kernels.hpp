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

#ifndef ILE_KERNELS_HPP
#define ILE_KERNELS_HPP

#include <string>

#include <json.hpp>

#include "ile/common.hpp"
#include "ile/parallel.hpp"

namespace ile {

enum class KernelFamily { Gaussian, Laplacian, Linear };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);

/// Scalar positive definite kernel on R^d.
///
///   gaussian   k(x,x') = exp(-|x-x'|^2 / sigma^2)
///   laplacian  k(x,x') = exp(-|x-x'| / sigma)
///   linear     k(x,x') = <x,x'>
///
/// The linear kernel is unbounded on R^d, so it carries the radius of the
/// input domain the caller promises to stay in; kappa^2 = radius^2.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double sigma = 1.0;
  double domain_radius = 1.0;

  static KernelSpec gaussian(double sigma) { return {KernelFamily::Gaussian, sigma, 1.0}; }
  static KernelSpec laplacian(double sigma) { return {KernelFamily::Laplacian, sigma, 1.0}; }
  static KernelSpec linear(double radius) { return {KernelFamily::Linear, 1.0, radius}; }

  /// sup_x k(x,x) over the declared domain.
  double kappa_sq() const;

  /// Throws ParameterError on a non-positive bandwidth or radius.
  void validate() const;
};

void to_json(nlohmann::json& j, const KernelSpec& k);
void from_json(const nlohmann::json& j, KernelSpec& k);

double eval_kernel(const KernelSpec& spec, const Point& x, const Point& xp);

/// Symmetric Gram matrix of a point set, with its source inputs.
struct GramMatrix {
  Matrix entries;  // n x n
  Matrix inputs;   // n x d

  Eigen::Index size() const { return entries.rows(); }
};

/// K_ij = k(x_i, x_j) over the rows of X, returned as (K + K^T) / 2.
/// Rows are computed in parallel unless exec == Exec::Serial.
GramMatrix gram_matrix(const KernelSpec& spec, const Matrix& X, Exec exec = Exec::Parallel);

/// v(x)_i = k(x, x_i).
Vector eval_vector(const KernelSpec& spec, const Matrix& X_train, const Point& x);

/// Column j is eval_vector(X_train, row j of X_test); n x m.
Matrix eval_matrix(const KernelSpec& spec, const Matrix& X_train, const Matrix& X_test,
                   Exec exec = Exec::Parallel);

}  // namespace ile

#endif  // ILE_KERNELS_HPP
