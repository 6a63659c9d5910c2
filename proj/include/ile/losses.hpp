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


#ifndef ILE_LOSSES_HPP
#define ILE_LOSSES_HPP

#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "ile/common.hpp"
#include "ile/kernels.hpp"
#include "ile/spaces.hpp"

namespace ile {

/// Finite-dimensional maps with loss(z, y) = <psi(z), phi(y)> and |phi| <= 1.
struct ExplicitEmbedding {
  int dim = 0;
  std::function<Vector(const Label&)> psi;
  std::function<Vector(const Label&)> phi;
};

using LossFn = std::function<double(const Label& z, const Label& y)>;
/// Gradient (or a subgradient) of the loss in its first argument.
using SubgradientFn = std::function<Vector(const Label& z, const Label& y)>;

struct LossSpec {
  std::string id;
  nlohmann::json params = nlohmann::json::object();
  LossFn eval;
  SubgradientFn subgradient;         // empty when not available
  std::optional<double> closs_bound;  // nullopt reads "unknown"
  Space output_space;
  Space label_space;
  std::optional<ExplicitEmbedding> embedding;

  double operator()(const Label& z, const Label& y) const { return eval(z, y); }
  bool has_subgradient() const { return static_cast<bool>(subgradient); }
  /// Bound as JSON: a number or the string "unknown".
  nlohmann::json bound_json() const;
  /// {"id": ..., params...}; make_loss(config()) rebuilds the loss.
  nlohmann::json config() const;
};

/// Loss catalog. `config` holds "id" plus parameters:
///   zero_one           T
///   squared_euclidean  d, radius
///   hellinger          bins
///   geodesic_sphere_sq d
///   absolute           lo, hi
///   huber              delta, lo, hi
///   hinge              (none)
///   table              outputs, labels, V (rows = outputs)
///   constant           value, T
///   kde                kernel, dim, optional space
///   sum, product       first, second (loss configs)
///   restrict           base (loss config), outputs, labels (spaces)
LossSpec make_loss(const nlohmann::json& config);

/// Largest singular value by power iteration on V^T V.
double operator_norm(const Matrix& V, double rel_tol = 1e-10, int max_iter = 100000);

/// Loss table of finite sets with psi(z_i) = row i of V and phi(y_j) = e_j.
struct FiniteEmbedding {
  LabelList outputs;
  LabelList labels;
  Matrix V;    // p x q
  Matrix psi;  // p x q, row i is psi(z_i)
  Matrix phi;  // q x q, row j is phi(y_j)
  double scale = 1.0;  // sup |phi_bar| used for normalization
  double closs_bound = 0.0;

  double reconstruction_error() const;
  double max_phi_norm() const;
  double max_psi_norm() const;
  /// V with an index column of outputs and a header of labels.
  void write_csv(std::ostream& os) const;
};

FiniteEmbedding finite_embedding(const LossSpec& loss, const LabelList& Z, const LabelList& Y);
FiniteEmbedding finite_embedding(const LossSpec& loss);

/// One side finite, the other compact.
struct SemiFiniteEmbedding {
  enum class Side { Outputs, Labels };
  Side finite_side = Side::Outputs;
  LabelList finite_elements;
  LossFn loss;
  double raw_sup = 0.0;     // sup over the grid or sample
  double bound = 0.0;       // raw_sup * inflation, used as c
  double inflation = 1.05;
  std::size_t evaluated_points = 0;

  Vector psi(const Label& z) const;
  Vector phi(const Label& y) const;
  int dim() const { return static_cast<int>(finite_elements.size()); }
};

struct SemiFiniteOptions {
  double inflation = 1.05;
  std::size_t grid_points = 10000;     // 1-D and 2-D domains
  std::size_t sample_points = 100000;  // otherwise
  std::uint64_t seed = 0x5eed;
};

/// The finite side is taken from whichever of the two spaces is finite
/// (outputs first). The sup of sqrt(sum_i loss_i^2) over the other side is
/// estimated on a grid or a uniform sample.
SemiFiniteEmbedding semi_finite_embedding(const LossSpec& loss, const SemiFiniteOptions& opts = {});

/// Translation-invariant loss v(z - y) on [-B, B] through a truncated
/// Fourier series of period P.
struct FourierEmbedding {
  double box = 1.0;     // B
  double period = 4.0;  // P
  int truncation = 1;   // Q
  std::vector<std::complex<double>> coeffs;  // c_k for k = -Q..Q
  double closs_estimate = 0.0;               // sum_k |c_k|
  double reconstruction_error = 0.0;         // sup over the test grid
  std::optional<std::string> warning;

  double omega(int k) const;
  const std::complex<double>& coeff(int k) const { return coeffs[static_cast<std::size_t>(k + truncation)]; }
  Vector psi(double z) const;
  Vector phi(double y) const;
  /// Truncated series at u.
  double series(double u) const;
};

struct FourierOptions {
  double box = 1.0;
  double period = 0.0;  // <= 0 selects 4B, which avoids wrap-around
  int truncation = 1;
  int quadrature_points = 8192;
  int test_points = 2001;
};

using ProfileFn = std::function<double(double)>;
using CoefficientFn = std::function<std::complex<double>(int)>;

/// Coefficients by trapezoid quadrature over one period.
FourierEmbedding fourier_embedding(const ProfileFn& v, const FourierOptions& opts);
/// Coefficients given in closed form.
FourierEmbedding fourier_embedding(const ProfileFn& v, const CoefficientFn& coeff, const FourierOptions& opts);

enum class CombineMode { Sum, Product };

/// Loss on product spaces; labels are concatenations (first part, second part).
LossSpec combine(const LossSpec& a, const LossSpec& b, CombineMode mode);

/// Same loss on sub-domains; throws InputError if an element lies outside.
LossSpec restrict(const LossSpec& loss, const Space& outputs, const Space& labels);

/// h(z,z) + h(y,y) - 2 h(z,y) for an output kernel h on `space`.
LossSpec kde_loss_from_kernel(const KernelSpec& kernel, const Space& space);

/// Explicit embedding of a finite table (used for finite catalog losses).
ExplicitEmbedding explicit_from_finite(std::shared_ptr<const FiniteEmbedding> fe);

}  // namespace ile

#endif  // ILE_LOSSES_HPP
