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

#ifndef ILE_COMMON_HPP
#define ILE_COMMON_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ile {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Inputs are rows of an n x d matrix; a single point is a d-vector.
using Point = Eigen::VectorXd;

/// Structured outputs and labels share one representation: a real vector.
/// Finite spaces store the class value in a 1-vector, spheres a unit vector,
/// histograms a point of the simplex, product spaces the concatenation.
using Label = Eigen::VectorXd;
using LabelList = std::vector<Label>;

/// Malformed inputs: dimension mismatches, empty sets, domain violations.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Hyperparameters outside their admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failed factorizations, degenerate denominators, NaNs.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation needs something the loss or space does not provide
/// (a subgradient, a projection, a finite output list).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Label scalar_label(double v) {
  Label l(1);
  l(0) = v;
  return l;
}

inline bool same_label(const Label& a, const Label& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace ile

#endif  // ILE_COMMON_HPP
