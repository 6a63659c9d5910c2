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

#include "ile/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ile/json_util.hpp"

namespace ile {

Space Space::classes(int T) {
  if (T < 1) throw ParameterError("classes: need at least one class");
  LabelList e;
  for (int t = 1; t <= T; ++t) e.push_back(scalar_label(t));
  return finite(std::move(e));
}

Space Space::cube(int dim, double radius) {
  return box(Vector::Constant(dim, -radius), Vector::Constant(dim, radius));
}

Space Space::interval(double lo, double hi) { return box(Vector::Constant(1, lo), Vector::Constant(1, hi)); }

Space Space::product(Space a, Space b) {
  return Space(Product{std::make_shared<const Space>(std::move(a)), std::make_shared<const Space>(std::move(b))});
}

int Space::label_dim() const {
  if (is<FiniteSet>()) {
    const auto& f = as<FiniteSet>();
    return f.elements.empty() ? 1 : static_cast<int>(f.elements.front().size());
  }
  if (is<Sphere>()) return as<Sphere>().dim;
  if (is<Simplex>()) return as<Simplex>().bins;
  if (is<Box>()) return static_cast<int>(as<Box>().lo.size());
  const auto& p = as<Product>();
  return p.first->label_dim() + p.second->label_dim();
}

bool Space::is_finite() const {
  if (is<FiniteSet>()) return true;
  if (is<Product>()) return as<Product>().first->is_finite() && as<Product>().second->is_finite();
  return false;
}

LabelList Space::elements() const {
  if (is<FiniteSet>()) return as<FiniteSet>().elements;
  if (is<Product>()) {
    const auto& p = as<Product>();
    const LabelList a = p.first->elements();
    const LabelList b = p.second->elements();
    LabelList out;
    out.reserve(a.size() * b.size());
    for (const auto& u : a)
      for (const auto& v : b) {
        Label l(u.size() + v.size());
        l << u, v;
        out.push_back(std::move(l));
      }
    return out;
  }
  throw CapabilityError("elements: " + describe() + " is not a finite space");
}

int Space::index_of(const Label& y) const {
  const LabelList e = elements();
  for (std::size_t i = 0; i < e.size(); ++i)
    if (same_label(e[i], y)) return static_cast<int>(i);
  return -1;
}

bool Space::contains(const Label& y, double tol) const {
  if (y.size() != label_dim()) return false;
  if (!y.allFinite()) return false;
  if (is<FiniteSet>()) {
    for (const auto& e : as<FiniteSet>().elements)
      if (same_label(e, y)) return true;
    return false;
  }
  if (is<Sphere>()) return std::abs(y.norm() - 1.0) <= tol;
  if (is<Simplex>()) return (y.array() >= -tol).all() && std::abs(y.sum() - 1.0) <= tol;
  if (is<Box>()) {
    const auto& b = as<Box>();
    return ((y - b.lo).array() >= -tol).all() && ((b.hi - y).array() >= -tol).all();
  }
  const auto& p = as<Product>();
  const int d1 = p.first->label_dim();
  return p.first->contains(y.head(d1), tol) && p.second->contains(y.tail(y.size() - d1), tol);
}

namespace {

Vector project_simplex(const Vector& u) {
  // Sort-based Euclidean projection onto {w >= 0, sum w = 1}.
  std::vector<double> s(u.data(), u.data() + u.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    cum += s[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (s[j] - t > 0.0) theta = t;
  }
  return (u.array() - theta).max(0.0).matrix();
}

}  // namespace

Label Space::project(const Label& z) const {
  if (z.size() != label_dim()) throw InputError("project: label has the wrong dimension");
  if (is<FiniteSet>()) throw CapabilityError("project: finite spaces have no projection");
  if (is<Sphere>()) {
    const double nrm = z.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericError("project: cannot normalize a zero vector onto the sphere");
    return z / nrm;
  }
  if (is<Simplex>()) return project_simplex(z);
  if (is<Box>()) {
    const auto& b = as<Box>();
    return z.cwiseMax(b.lo).cwiseMin(b.hi);
  }
  const auto& p = as<Product>();
  const int d1 = p.first->label_dim();
  Label out(z.size());
  out << p.first->project(z.head(d1)), p.second->project(z.tail(z.size() - d1));
  return out;
}

bool Space::is_bounded() const {
  if (is<Box>()) return as<Box>().lo.allFinite() && as<Box>().hi.allFinite();
  if (is<Product>()) return as<Product>().first->is_bounded() && as<Product>().second->is_bounded();
  return true;
}

LabelList Space::grid(std::size_t count) const {
  LabelList out;
  if (count < 2) return out;
  if (is<Box>() && is_bounded()) {
    const auto& b = as<Box>();
    if (b.lo.size() == 1) {
      for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(scalar_label(b.lo(0) + t * (b.hi(0) - b.lo(0))));
      }
    } else if (b.lo.size() == 2) {
      const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
      for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
          const double s = static_cast<double>(i) / static_cast<double>(side - 1);
          const double t = static_cast<double>(j) / static_cast<double>(side - 1);
          Label l(2);
          l << b.lo(0) + s * (b.hi(0) - b.lo(0)), b.lo(1) + t * (b.hi(1) - b.lo(1));
          out.push_back(std::move(l));
        }
    }
  } else if (is<Sphere>() && as<Sphere>().dim == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
      Label l(2);
      l << std::cos(a), std::sin(a);
      out.push_back(std::move(l));
    }
  } else if (is<Simplex>() && as<Simplex>().bins == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(count - 1);
      Label l(2);
      l << t, 1.0 - t;
      out.push_back(std::move(l));
    }
  } else if (is_finite()) {
    out = elements();
  }
  return out;
}

LabelList Space::sample(std::size_t count, Rng& rng) const {
  if (is_finite()) return elements();
  if (!is_bounded()) throw ParameterError("sample: cannot sample the unbounded space " + describe());
  LabelList out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (is<Box>()) {
      const auto& b = as<Box>();
      Label l(b.lo.size());
      for (Eigen::Index t = 0; t < l.size(); ++t) l(t) = rng.uniform(b.lo(t), b.hi(t));
      out.push_back(std::move(l));
    } else if (is<Sphere>()) {
      Label l(as<Sphere>().dim);
      do {
        for (Eigen::Index t = 0; t < l.size(); ++t) l(t) = rng.normal();
      } while (l.norm() == 0.0);
      out.push_back(l / l.norm());
    } else if (is<Simplex>()) {
      Label l(as<Simplex>().bins);
      for (Eigen::Index t = 0; t < l.size(); ++t) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        l(t) = -std::log(u);
      }
      out.push_back(l / l.sum());
    } else {
      const auto& p = as<Product>();
      const Label a = p.first->sample(1, rng).front();
      const Label b = p.second->sample(1, rng).front();
      Label l(a.size() + b.size());
      l << a, b;
      out.push_back(std::move(l));
    }
  }
  return out;
}

std::string Space::describe() const {
  std::ostringstream os;
  if (is<FiniteSet>())
    os << "finite(" << as<FiniteSet>().elements.size() << ")";
  else if (is<Sphere>())
    os << "sphere(" << as<Sphere>().dim << ")";
  else if (is<Simplex>())
    os << "simplex(" << as<Simplex>().bins << ")";
  else if (is<Box>())
    os << "box(" << as<Box>().lo.size() << ")";
  else
    os << "product(" << as<Product>().first->describe() << ", " << as<Product>().second->describe() << ")";
  return os.str();
}

nlohmann::json Space::to_json() const {
  if (is<FiniteSet>()) return {{"type", "finite"}, {"elements", labels_to_json(as<FiniteSet>().elements)}};
  if (is<Sphere>()) return {{"type", "sphere"}, {"dim", as<Sphere>().dim}};
  if (is<Simplex>()) return {{"type", "simplex"}, {"bins", as<Simplex>().bins}};
  if (is<Box>()) {
    // JSON has no infinity; unbounded sides are written as null.
    auto side = [](const Vector& v) {
      nlohmann::json a = nlohmann::json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(std::isfinite(v(i)) ? nlohmann::json(v(i)) : nlohmann::json());
      return a;
    };
    return {{"type", "box"}, {"lo", side(as<Box>().lo)}, {"hi", side(as<Box>().hi)}};
  }
  return {{"type", "product"}, {"first", as<Product>().first->to_json()}, {"second", as<Product>().second->to_json()}};
}

Space Space::from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "finite") return finite(labels_from_json(j.at("elements")));
  if (type == "classes") return classes(j.at("T").get<int>());
  if (type == "sphere") return sphere(j.at("dim").get<int>());
  if (type == "simplex") return simplex(j.at("bins").get<int>());
  if (type == "box") {
    auto side = [](const nlohmann::json& a, double inf) {
      Vector v(static_cast<Eigen::Index>(a.size()));
      for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].is_null() ? inf : a[i].get<double>();
      return v;
    };
    const double inf = std::numeric_limits<double>::infinity();
    return box(side(j.at("lo"), -inf), side(j.at("hi"), inf));
  }
  if (type == "product") return product(from_json(j.at("first")), from_json(j.at("second")));
  throw ParameterError("unknown space type '" + type + "'");
}

}  // namespace ile
