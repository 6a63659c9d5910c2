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


#include <cmath>

#include <gtest/gtest.h>

#include "ile/spaces.hpp"

namespace ile {
namespace {

Label vec(std::initializer_list<double> v) {
  Label p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

TEST(Spaces, ClassesAreOneToT) {
  const Space s = Space::classes(4);
  ASSERT_TRUE(s.is_finite());
  const auto e = s.elements();
  ASSERT_EQ(e.size(), 4u);
  for (int t = 0; t < 4; ++t) EXPECT_EQ(e[static_cast<std::size_t>(t)](0), t + 1.0);
  EXPECT_EQ(s.index_of(scalar_label(3)), 2);
  EXPECT_EQ(s.index_of(scalar_label(5)), -1);
  EXPECT_THROW(Space::classes(0), ParameterError);
}

TEST(Spaces, ProductEnumeratesLexicographically) {
  const Space p = Space::product(Space::classes(2), Space::classes(3));
  ASSERT_TRUE(p.is_finite());
  EXPECT_EQ(p.label_dim(), 2);
  const auto e = p.elements();
  ASSERT_EQ(e.size(), 6u);
  EXPECT_TRUE(same_label(e[0], vec({1, 1})));
  EXPECT_TRUE(same_label(e[1], vec({1, 2})));
  EXPECT_TRUE(same_label(e[5], vec({2, 3})));
  EXPECT_TRUE(p.contains(vec({2, 1})));
  EXPECT_FALSE(p.contains(vec({3, 1})));
}

TEST(Spaces, ContainsChecksDomain) {
  EXPECT_TRUE(Space::sphere(2).contains(vec({0.6, 0.8})));
  EXPECT_FALSE(Space::sphere(2).contains(vec({0.6, 0.6})));
  EXPECT_FALSE(Space::sphere(3).contains(vec({1, 0})));
  EXPECT_TRUE(Space::simplex(3).contains(vec({0.2, 0.3, 0.5})));
  EXPECT_FALSE(Space::simplex(3).contains(vec({-0.2, 0.7, 0.5})));
  EXPECT_TRUE(Space::interval(-1, 1).contains(scalar_label(1.0)));
  EXPECT_FALSE(Space::interval(-1, 1).contains(scalar_label(1.1)));
  EXPECT_FALSE(Space::interval(-1, 1).contains(scalar_label(std::nan(""))));
}

TEST(Spaces, ProjectSphereAndBox) {
  const Label z = Space::sphere(2).project(vec({3, 4}));
  EXPECT_NEAR(z(0), 0.6, 1e-15);
  EXPECT_NEAR(z(1), 0.8, 1e-15);
  EXPECT_THROW(Space::sphere(2).project(vec({0, 0})), NumericError);
  EXPECT_TRUE(same_label(Space::cube(2, 1.0).project(vec({2, -0.5})), vec({1, -0.5})));
  EXPECT_THROW(Space::classes(3).project(scalar_label(1)), CapabilityError);
}

TEST(Spaces, SimplexProjectionIsNearestPoint) {
  Rng rng(3);
  const Space s = Space::simplex(4);
  for (int trial = 0; trial < 200; ++trial) {
    Label u(4);
    for (int j = 0; j < 4; ++j) u(j) = 2.0 * rng.normal();
    const Label p = s.project(u);
    ASSERT_TRUE(s.contains(p, 1e-12));
    // Optimality: u - p equals a constant on the support and is below it elsewhere.
    double theta = 0.0;
    bool set = false;
    for (int j = 0; j < 4; ++j)
      if (p(j) > 0) {
        if (!set) theta = u(j) - p(j);
        set = true;
        EXPECT_NEAR(u(j) - p(j), theta, 1e-12);
      }
    for (int j = 0; j < 4; ++j)
      if (p(j) == 0) EXPECT_LE(u(j), theta + 1e-12);
    // No sampled simplex point is closer.
    for (const auto& q : s.sample(20, rng)) EXPECT_LE((p - u).norm(), (q - u).norm() + 1e-12);
  }
}

TEST(Spaces, GridShapes) {
  EXPECT_EQ(Space::interval(-1, 1).grid(101).size(), 101u);
  EXPECT_EQ(Space::interval(-1, 1).grid(101).front()(0), -1.0);
  EXPECT_EQ(Space::interval(-1, 1).grid(101).back()(0), 1.0);
  EXPECT_EQ(Space::cube(2, 1.0).grid(10000).size(), 10000u);
  const auto circle = Space::sphere(2).grid(360);
  ASSERT_EQ(circle.size(), 360u);
  for (const auto& z : circle) EXPECT_NEAR(z.norm(), 1.0, 1e-15);
  EXPECT_EQ(Space::simplex(2).grid(11).size(), 11u);
  EXPECT_TRUE(Space::sphere(3).grid(100).empty());
  EXPECT_TRUE(Space::cube(3, 1.0).grid(100).empty());
}

TEST(Spaces, SamplesStayInside) {
  Rng rng(4);
  const Space spaces[] = {Space::sphere(4), Space::simplex(5), Space::cube(3, 2.0),
                          Space::product(Space::sphere(2), Space::interval(0, 1))};
  for (const auto& s : spaces)
    for (const auto& y : s.sample(500, rng)) EXPECT_TRUE(s.contains(y, 1e-12)) << s.describe();
  const Space unbounded = Space::box(Vector::Constant(1, -INFINITY), Vector::Constant(1, 0.0));
  EXPECT_FALSE(unbounded.is_bounded());
  EXPECT_THROW(unbounded.sample(3, rng), ParameterError);
}

TEST(Spaces, JsonRoundTrip) {
  const Space spaces[] = {Space::classes(3), Space::sphere(3), Space::simplex(4), Space::interval(-2, 5),
                          Space::box(Vector::Constant(1, -INFINITY), Vector::Constant(1, 1.0)),
                          Space::product(Space::classes(2), Space::sphere(2))};
  for (const auto& s : spaces) {
    const Space back = Space::from_json(nlohmann::json::parse(s.to_json().dump()));
    EXPECT_EQ(back.to_json(), s.to_json());
    EXPECT_EQ(back.describe(), s.describe());
  }
  EXPECT_EQ(Space::from_json({{"type", "classes"}, {"T", 3}}).elements().size(), 3u);
  EXPECT_THROW(Space::from_json({{"type", "torus"}}), ParameterError);
}

}  // namespace
}  // namespace ile
