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
#include <filesystem>

#include <gtest/gtest.h>

#include "ile/data.hpp"
#include "ile/losses.hpp"
#include "ile/spaces.hpp"

namespace ile {
namespace {

double bayes_zero_one(const SyntheticDistribution& d) {
  double r = 0.0;
  for (Eigen::Index k = 0; k < d.support_size(); ++k) r += d.marginal(k) * (1.0 - d.conditional.row(k).maxCoeff());
  return r;
}

TEST(FiniteClassification, ValidAndDeterministic) {
  const auto a = gen_finite_classification(7, 2, 4, 30, 0.5);
  const auto b = gen_finite_classification(7, 2, 4, 30, 0.5);
  a.validate();
  EXPECT_EQ(a.support, b.support);
  EXPECT_EQ(a.marginal, b.marginal);
  EXPECT_EQ(a.conditional, b.conditional);
  EXPECT_LE(a.support.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_NE(gen_finite_classification(8, 2, 4, 30, 0.5).support, a.support);
}

TEST(FiniteClassification, TemperatureLimits) {
  for (int T : {2, 3, 5}) {
    EXPECT_LT(bayes_zero_one(gen_finite_classification(1, 2, T, 40, 1e-4)), 1e-6);
    EXPECT_NEAR(bayes_zero_one(gen_finite_classification(1, 2, T, 40, 1e6)), (T - 1.0) / T, 1e-5);
  }
}

TEST(FiniteClassification, Errors) {
  EXPECT_THROW(gen_finite_classification(1, 0, 2, 2, 1.0), ParameterError);
  EXPECT_THROW(gen_finite_classification(1, 1, 1, 2, 1.0), ParameterError);
  EXPECT_THROW(gen_finite_classification(1, 1, 2, 1, 1.0), ParameterError);
  EXPECT_THROW(gen_finite_classification(1, 1, 2, 2, 0.0), ParameterError);
}

TEST(Sample, EmpiricalMarginalWithinTotalVariation) {
  const auto d = gen_finite_classification(3, 1, 3, 20, 1.0);
  const Dataset s = sample(d, 100000, 11);
  Vector counts = Vector::Zero(20);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    for (Eigen::Index k = 0; k < 20; ++k)
      if (s.X(i, 0) == d.support(k, 0)) counts(k) += 1.0;
  EXPECT_DOUBLE_EQ(counts.sum(), 100000.0);
  EXPECT_LT(0.5 * (counts / 1e5 - d.marginal).cwiseAbs().sum(), 0.01);
}

TEST(Sample, SingleDrawAndSeeds) {
  const auto d = gen_finite_classification(3, 2, 3, 5, 1.0);
  const Dataset one = sample(d, 1, 1);
  EXPECT_EQ(one.size(), 1);
  EXPECT_TRUE(Space::classes(3).contains(one.Y[0]));
  const Dataset a = sample(d, 9000, 5), b = sample(d, 9000, 5), c = sample(d, 9000, 6);
  EXPECT_EQ(a.X, b.X);
  for (std::size_t i = 0; i < a.Y.size(); ++i) EXPECT_TRUE(same_label(a.Y[i], b.Y[i]));
  EXPECT_NE(a.X, c.X);
  EXPECT_THROW(sample(d, 0, 1), ParameterError);
}

TEST(Sample, IndependentOfThreadCount) {
  const auto d = gen_finite_classification(3, 2, 3, 50, 1.0);
  set_num_threads(1);
  const Dataset a = sample(d, 20000, 5);
  set_num_threads(4);
  const Dataset b = sample(d, 20000, 5);
  set_num_threads(0);
  EXPECT_EQ(a.X, b.X);
}

TEST(Sample, ConditionalFrequencies) {
  SyntheticDistribution d;
  d.support = Matrix::Zero(1, 1);
  d.marginal = Vector::Ones(1);
  d.labels = {scalar_label(1), scalar_label(2)};
  d.conditional.resize(1, 2);
  d.conditional << 0.3, 0.7;
  const Dataset s = sample(d, 100000, 2);
  double ones = 0;
  for (const auto& y : s.Y) ones += y(0) == 1.0;
  EXPECT_NEAR(ones / 1e5, 0.3, 0.01);
}

TEST(Distribution, ValidationAndJson) {
  auto d = gen_finite_classification(4, 2, 3, 6, 0.7);
  const auto back = SyntheticDistribution::from_json(nlohmann::json::parse(d.to_json().dump()));
  EXPECT_EQ(back.conditional, d.conditional);
  EXPECT_EQ(back.support, d.support);
  d.conditional(0, 0) += 1e-9;
  EXPECT_THROW(d.validate(), InputError);
}

TEST(SphereTask, NoiseFreeIsTheField) {
  const auto task = gen_sphere_regression(5, 3, std::numeric_limits<double>::infinity());
  const Dataset s = task.sample(200, 1);
  const LossSpec geo = make_loss({{"id", "geodesic_sphere_sq"}, {"d", 3}});
  double risk = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) risk += geo(task.fstar(s.X.row(i).transpose()), s.Y[static_cast<std::size_t>(i)]);
  EXPECT_EQ(risk, 0.0);
}

TEST(SphereTask, UnitNormLabels) {
  for (int dim : {2, 3, 5}) {
    const Dataset s = gen_sphere_regression(6, dim, 2.0).sample(2000, 3);
    const Space sphere = Space::sphere(dim);
    for (const auto& y : s.Y) {
      EXPECT_NEAR(y.norm(), 1.0, 1e-12);
      EXPECT_TRUE(sphere.contains(y));
    }
  }
}

TEST(SphereTask, VmfMeanResultantLength) {
  // S^2: E<y, mu> = coth(kappa) - 1/kappa.
  Rng rng(9);
  Label mu(3);
  mu << 0.0, 0.6, 0.8;
  for (double kappa : {0.5, 3.0, 40.0}) {
    double acc = 0.0;
    const int N = 100000;
    for (int i = 0; i < N; ++i) acc += sample_vmf(mu, kappa, rng).dot(mu);
    EXPECT_NEAR(acc / N, 1.0 / std::tanh(kappa) - 1.0 / kappa, 0.01) << kappa;
  }
}

TEST(SphereTask, CircleIntrinsicMeanMatchesGridSearch) {
  // On S^1 the vMF density of the angle is proportional to exp(kappa cos t).
  // The Frechet mean of the squared geodesic loss is found by a 10^4-point
  // grid search against a 1024-point quadrature of that density.
  const auto task = gen_sphere_regression(12, 2, 2.5);
  const LossSpec geo = make_loss({{"id", "geodesic_sphere_sq"}, {"d", 2}});
  Rng rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    Point x(2);
    x << rng.uniform(-1, 1), rng.uniform(-1, 1);
    const Label mu = task.fstar(x);
    const double a0 = std::atan2(mu(1), mu(0));
    const int Q = 1024;
    std::vector<double> w(Q);
    LabelList ys(Q);
    for (int q = 0; q < Q; ++q) {
      const double t = -M_PI + 2.0 * M_PI * (q + 0.5) / Q;
      w[static_cast<std::size_t>(q)] = std::exp(task.kappa() * std::cos(t));
      ys[static_cast<std::size_t>(q)] = Label(2);
      ys[static_cast<std::size_t>(q)] << std::cos(a0 + t), std::sin(a0 + t);
    }
    double best = 1e300;
    Label arg;
    const int G = 10000;
    for (int g = 0; g < G; ++g) {
      const double a = 2.0 * M_PI * g / G;
      Label z(2);
      z << std::cos(a), std::sin(a);
      double obj = 0.0;
      for (int q = 0; q < Q; ++q) obj += w[static_cast<std::size_t>(q)] * geo(z, ys[static_cast<std::size_t>(q)]);
      if (obj < best) {
        best = obj;
        arg = z;
      }
    }
    EXPECT_LT(std::sqrt(geo(arg, mu)), 1e-3);
  }
}

TEST(SphereTask, Errors) {
  EXPECT_THROW(gen_sphere_regression(1, 1, 1.0), ParameterError);
  EXPECT_THROW(gen_sphere_regression(1, 3, -1.0), ParameterError);
}

TEST(Histogram, SimplexValidAndReproducible) {
  const auto task = gen_histogram_task(2, 4, 3);
  const Dataset a = task.sample(3000, 8), b = gen_histogram_task(2, 4, 3).sample(3000, 8);
  const Space simplex = Space::simplex(4);
  for (std::size_t i = 0; i < a.Y.size(); ++i) {
    EXPECT_TRUE(simplex.contains(a.Y[i]));
    EXPECT_GE(a.Y[i].minCoeff(), 0.0);
    EXPECT_NEAR(a.Y[i].sum(), 1.0, 1e-12);
    EXPECT_TRUE(same_label(a.Y[i], b.Y[i]));
  }
  EXPECT_THROW(gen_histogram_task(1, 1, 1), ParameterError);
}

TEST(Histogram, TwoBinMarginalMean) {
  // Oracle: E[y] = E_x[p(x)], integrated on a fine midpoint grid of [-1,1].
  const auto task = gen_histogram_task(21, 2, 1);
  double oracle = 0.0;
  const int G = 20000;
  for (int g = 0; g < G; ++g) {
    Point x(1);
    x << -1.0 + 2.0 * (g + 0.5) / G;
    oracle += task.mean(x)(0) / G;
  }
  const Dataset s = task.sample(100000, 3);
  double acc = 0.0;
  for (const auto& y : s.Y) acc += y(0);
  EXPECT_NEAR(acc / 1e5, oracle, 1e-2);
}

TEST(DatasetIo, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "ile_data_test";
  std::filesystem::remove_all(dir);
  const Dataset s = gen_sphere_regression(2, 3, 4.0).sample(50, 9);
  save_dataset(s, (dir / "sphere").string());
  const Dataset back = load_dataset((dir / "sphere").string());
  EXPECT_EQ(back.X, s.X);
  ASSERT_EQ(back.Y.size(), s.Y.size());
  for (std::size_t i = 0; i < s.Y.size(); ++i) EXPECT_TRUE(same_label(back.Y[i], s.Y[i]));
  EXPECT_EQ(back.task.at("generator"), "sphere_regression");
  EXPECT_THROW(load_dataset((dir / "missing").string()), InputError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace ile
