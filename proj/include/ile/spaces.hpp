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

#ifndef ILE_SPACES_HPP
#define ILE_SPACES_HPP

#include <memory>
#include <string>
#include <variant>

#include <json.hpp>

#include "ile/common.hpp"
#include "ile/rng.hpp"

namespace ile {

class Space;

struct FiniteSet {
  LabelList elements;
};

/// Unit vectors of R^dim.
struct Sphere {
  int dim = 2;
};

/// Histograms with `bins` nonnegative entries summing to one.
struct Simplex {
  int bins = 2;
};

/// Axis-aligned box; infinite bounds are allowed (then the box is unbounded).
struct Box {
  Vector lo;
  Vector hi;
};

/// Cartesian product; labels are the concatenation of the two parts.
struct Product {
  std::shared_ptr<const Space> first;
  std::shared_ptr<const Space> second;
};

/// Output or label domain of a loss.
class Space {
 public:
  using Kind = std::variant<FiniteSet, Sphere, Simplex, Box, Product>;

  Space() : kind_(FiniteSet{}) {}
  Space(Kind k) : kind_(std::move(k)) {}  // NOLINT(google-explicit-constructor)

  static Space finite(LabelList elements) { return Space(FiniteSet{std::move(elements)}); }
  /// Classes 1..T as scalar labels.
  static Space classes(int T);
  static Space sphere(int dim) { return Space(Sphere{dim}); }
  static Space simplex(int bins) { return Space(Simplex{bins}); }
  static Space box(Vector lo, Vector hi) { return Space(Box{std::move(lo), std::move(hi)}); }
  static Space cube(int dim, double radius);
  static Space interval(double lo, double hi);
  static Space product(Space a, Space b);

  const Kind& kind() const { return kind_; }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(kind_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(kind_);
  }

  /// Length of a label vector in this space.
  int label_dim() const;

  /// True when the space has a finite element list (products of finite sets too).
  bool is_finite() const;

  /// Element list of a finite space; products are enumerated lexicographically.
  LabelList elements() const;

  /// Position of a label in elements(), or -1.
  int index_of(const Label& y) const;

  bool contains(const Label& y, double tol = 1e-9) const;

  /// Nearest point / retraction, used by projected descent. Throws
  /// CapabilityError for finite spaces.
  Label project(const Label& z) const;

  /// Whether every coordinate is bounded (required for sampling).
  bool is_bounded() const;

  /// Deterministic grid of roughly `count` points; only for 1-D or 2-D boxes,
  /// the circle and the 2-bin simplex. Returns an empty list otherwise.
  LabelList grid(std::size_t count) const;

  /// Uniform-ish random points for sup estimation.
  LabelList sample(std::size_t count, Rng& rng) const;

  std::string describe() const;

  nlohmann::json to_json() const;
  static Space from_json(const nlohmann::json& j);

 private:
  Kind kind_;
};

}  // namespace ile

#endif  // ILE_SPACES_HPP
