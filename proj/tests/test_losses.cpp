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
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "ile/io.hpp"
#include "ile/losses.hpp"

namespace ile {
namespace {

constexpr double kPi = std::numbers::pi;

Label vec(std::initializer_list<double> v) {
  Label p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

TEST(Catalog, ZeroOne) {
  const LossSpec l = make_loss({{"id", "zero_one"}, {"T", 3}});
  EXPECT_EQ(l(scalar_label(1), scalar_label(1)), 0.0);
  EXPECT_EQ(l(scalar_label(1), scalar_label(2)), 1.0);
}

TEST(Catalog, GeodesicSelfIsZero) {
  const LossSpec l = make_loss({{"id", "geodesic_sphere_sq"}, {"d", 3}});
  Rng rng(1);
  for (const auto& z : Space::sphere(3).sample(50, rng)) EXPECT_EQ(l(z, z), 0.0);
  EXPECT_NEAR(l(vec({1, 0, 0}), vec({-1, 0, 0})), kPi * kPi, 1e-12);
  EXPECT_NEAR(l(vec({1, 0, 0}), vec({0, 1, 0})), kPi * kPi / 4, 1e-12);
}

TEST(Catalog, HellingerOppositeVertices) {
  const LossSpec l = make_loss({{"id", "hellinger"}, {"bins", 2}});
  EXPECT_EQ(l(vec({1, 0}), vec({0, 1})), 2.0);
}

TEST(Catalog, AbsoluteAndHuber) {
  const LossSpec a = make_loss({{"id", "absolute"}, {"lo", -2}, {"hi", 2}});
  EXPECT_EQ(a(scalar_label(-1.5), scalar_label(0.5)), 2.0);
  const LossSpec h = make_loss({{"id", "huber"}, {"delta", 0.5}, {"lo", -2}, {"hi", 2}});
  EXPECT_DOUBLE_EQ(h(scalar_label(0.2), scalar_label(0.0)), 0.02);
  EXPECT_DOUBLE_EQ(h(scalar_label(1.5), scalar_label(0.0)), 0.5 * (1.5 - 0.25));
  EXPECT_FALSE(a.closs_bound.has_value());
  EXPECT_EQ(a.bound_json(), "unknown");
}

TEST(Catalog, InvalidParameters) {
  EXPECT_THROW(make_loss({{"id", "zero_one"}, {"T", 1}}), ParameterError);
  EXPECT_THROW(make_loss({{"id", "hellinger"}, {"bins", 1}}), ParameterError);
  EXPECT_THROW(make_loss({{"id", "geodesic_sphere_sq"}, {"d", 1}}), ParameterError);
  EXPECT_THROW(make_loss({{"id", "huber"}, {"delta", 0.0}}), ParameterError);
  EXPECT_THROW(make_loss({{"id", "zero_one"}}), ParameterError);
  EXPECT_THROW(make_loss({{"id", "wasserstein"}}), ParameterError);
  EXPECT_THROW(make_loss({{"T", 2}}), ParameterError);
  EXPECT_THROW(make_loss({{"id", "zero_one"}, {"T", "three"}}), ParameterError);
}

TEST(Catalog, DomainViolation) {
  const LossSpec l = make_loss({{"id", "geodesic_sphere_sq"}, {"d", 2}});
  EXPECT_THROW(l(vec({1, 0, 0}), vec({1, 0})), InputError);
  const LossSpec t = make_loss({{"id", "zero_one"}, {"T", 2}});
  EXPECT_THROW(t.embedding->psi(scalar_label(7)), InputError);
}

TEST(Catalog, ContinuityOnSequences) {
  Rng rng(2);
  const nlohmann::json ids[] = {{{"id", "squared_euclidean"}, {"d", 2}},
                                {{"id", "hellinger"}, {"bins", 3}},
                                {{"id", "geodesic_sphere_sq"}, {"d", 3}},
                                {{"id", "absolute"}},
                                {{"id", "huber"}, {"delta", 0.3}},
                                {{"id", "kde"}, {"kernel", {{"family", "gaussian"}, {"sigma", 0.5}}}, {"dim", 2}}};
  for (const auto& id : ids) {
    const LossSpec l = make_loss(id);
    for (int t = 0; t < 20; ++t) {
      const Label z = l.output_space.sample(1, rng).front();
      const Label y = l.label_space.sample(1, rng).front();
      const Label w = l.output_space.sample(1, rng).front();
      double prev = INFINITY;
      for (double h = 1e-1; h > 1e-9; h /= 10) {
        const Label zp = l.output_space.project(z + h * (w - z));
        const double d = std::abs(l(zp, y) - l(z, y));
        EXPECT_LE(d, std::max(prev, 1e-12)) << l.id;
        prev = d;
      }
      EXPECT_LT(prev, 1e-3) << l.id;
    }
  }
}

TEST(Catalog, SubgradientsMatchFiniteDifferences) {
  Rng rng(3);
  const nlohmann::json ids[] = {{{"id", "squared_euclidean"}, {"d", 3}, {"radius", 2.0}},
                                {{"id", "huber"}, {"delta", 0.4}},
                                {{"id", "kde"}, {"kernel", {{"family", "gaussian"}, {"sigma", 0.7}}}, {"dim", 2}},
                                {{"id", "kde"}, {"kernel", {{"family", "laplacian"}, {"sigma", 0.7}}}, {"dim", 2}}};
  for (const auto& id : ids) {
    const LossSpec l = make_loss(id);
    ASSERT_TRUE(l.has_subgradient());
    for (int t = 0; t < 10; ++t) {
      const Label z = 0.5 * l.output_space.sample(1, rng).front();
      const Label y = l.label_space.sample(1, rng).front();
      const Vector g = l.subgradient(z, y);
      for (Eigen::Index j = 0; j < z.size(); ++j) {
        const double h = 1e-6;
        Label zp = z, zm = z;
        zp(j) += h;
        zm(j) -= h;
        EXPECT_NEAR(g(j), (l(zp, y) - l(zm, y)) / (2 * h), 1e-5) << l.id;
      }
    }
  }
}

TEST(Catalog, GeodesicRiemannianGradient) {
  const LossSpec l = make_loss({{"id", "geodesic_sphere_sq"}, {"d", 3}});
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto pts = Space::sphere(3).sample(3, rng);
    const Label& z = pts[0];
    const Label& y = pts[1];
    Vector dir = pts[2] - pts[2].dot(z) * z;
    dir.normalize();
    const Vector g = l.subgradient(z, y);
    EXPECT_NEAR(g.dot(z), 0.0, 1e-12);
    const double h = 1e-6;
    auto along = [&](double s) { return Label(std::cos(s) * z + std::sin(s) * dir); };
    EXPECT_NEAR(g.dot(dir), (l(along(h), y) - l(along(-h), y)) / (2 * h), 1e-5);
  }
  // Antipodal labels still give a finite tangent direction.
  const Vector g = l.subgradient(vec({0, 0, 1}), vec({0, 0, -1}));
  EXPECT_NEAR(g.norm(), 2 * kPi, 1e-12);
  EXPECT_NEAR(g(2), 0.0, 1e-15);
}

TEST(OperatorNorm, MatchesSingularValues) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const int p = 1 + static_cast<int>(rng.uniform_index(8));
    const int q = 1 + static_cast<int>(rng.uniform_index(8));
    Matrix V(p, q);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < q; ++j) V(i, j) = rng.normal();
    const double s = Eigen::JacobiSVD<Matrix>(V).singularValues()(0);
    EXPECT_NEAR(operator_norm(V), s, 1e-8 * s);
  }
  EXPECT_EQ(operator_norm(Matrix::Zero(3, 3)), 0.0);
}

TEST(FiniteEmbedding, ZeroOneTwoClasses) {
  const FiniteEmbedding fe = finite_embedding(make_loss({{"id", "zero_one"}, {"T", 2}}));
  Matrix expect(2, 2);
  expect << 0, 1, 1, 0;
  EXPECT_EQ(fe.V, expect);
  EXPECT_NEAR(fe.closs_bound, 1.0, 1e-10);
}

TEST(FiniteEmbedding, ZeroOneIsOnesMinusIdentity) {
  for (int T = 2; T <= 7; ++T) {
    const FiniteEmbedding fe = finite_embedding(make_loss({{"id", "zero_one"}, {"T", T}}));
    EXPECT_EQ(fe.V, Matrix::Ones(T, T) - Matrix::Identity(T, T));
    // Eigenvalues of 11^T - I are T-1 (once) and -1.
    EXPECT_NEAR(fe.closs_bound, T - 1.0, 1e-9 * T);
    EXPECT_EQ(fe.reconstruction_error(), 0.0);
    EXPECT_LE(fe.max_phi_norm(), 1.0);
    EXPECT_LE(fe.max_psi_norm(), fe.closs_bound);
  }
}

TEST(FiniteEmbedding, ConstantZero) {
  const LossSpec l = make_loss({{"id", "constant"}, {"value", 0.0}, {"T", 3}});
  const FiniteEmbedding fe = finite_embedding(l);
  EXPECT_EQ(fe.V, Matrix::Zero(3, 3));
  EXPECT_EQ(fe.closs_bound, 0.0);
  EXPECT_EQ(*l.closs_bound, 0.0);
}

TEST(FiniteEmbedding, TableLoss) {
  const LossSpec l = make_loss({{"id", "table"},
                                {"outputs", {1, 2, 3}},
                                {"labels", {10, 20}},
                                {"V", {{0.0, 2.0}, {1.5, -1.0}, {3.0, 0.25}}}});
  EXPECT_EQ(l(scalar_label(2), scalar_label(20)), -1.0);
  const FiniteEmbedding fe = finite_embedding(l);
  EXPECT_EQ(fe.reconstruction_error(), 0.0);
  EXPECT_LE(fe.max_psi_norm(), fe.closs_bound);
  EXPECT_THROW(make_loss({{"id", "table"}, {"outputs", {1}}, {"labels", {1, 2}}, {"V", {{0.0}}}}), ParameterError);
}

TEST(FiniteEmbedding, ContinuousLossOnFiniteSets) {
  Rng rng(6);
  const LossSpec l = make_loss({{"id", "hellinger"}, {"bins", 3}});
  const FiniteEmbedding fe = finite_embedding(l, Space::simplex(3).sample(6, rng), Space::simplex(3).sample(9, rng));
  EXPECT_LE(fe.reconstruction_error(), 1e-12);
  EXPECT_LE(fe.max_phi_norm(), 1.0);
  EXPECT_LE(fe.max_psi_norm(), fe.closs_bound);
  EXPECT_THROW(finite_embedding(l, {}, fe.labels), InputError);
}

TEST(FiniteEmbedding, CsvExport) {
  const FiniteEmbedding fe = finite_embedding(make_loss({{"id", "zero_one"}, {"T", 2}}));
  std::ostringstream os;
  fe.write_csv(os);
  EXPECT_EQ(os.str(), "z\\y,1,2\n1,0,1\n2,1,0\n");
}

LossSpec one_point_constant(double c) {
  LossSpec l;
  l.id = "constant_line";
  l.output_space = Space::finite({scalar_label(0)});
  l.label_space = Space::interval(-1, 1);
  l.eval = [c](const Label&, const Label&) { return c; };
  return l;
}

TEST(SemiFinite, SingleConstantRow) {
  SemiFiniteOptions opts;
  opts.inflation = 1.0;
  for (double c : {0.5, 3.0}) {
    const SemiFiniteEmbedding sf = semi_finite_embedding(one_point_constant(c), opts);
    EXPECT_EQ(sf.raw_sup, c);
    EXPECT_EQ(sf.phi(scalar_label(0.3)), Vector::Ones(1));
  }
  const SemiFiniteEmbedding neg = semi_finite_embedding(one_point_constant(-2.0), opts);
  EXPECT_EQ(neg.raw_sup, 2.0);
}

TEST(SemiFinite, ZeroOneMatchesFiniteTable) {
  const LossSpec l = make_loss({{"id", "zero_one"}, {"T", 4}});
  const FiniteEmbedding fe = finite_embedding(l);
  const SemiFiniteEmbedding sf = semi_finite_embedding(l);
  for (std::size_t i = 0; i < fe.outputs.size(); ++i)
    for (std::size_t j = 0; j < fe.labels.size(); ++j)
      EXPECT_NEAR(sf.psi(fe.outputs[i]).dot(sf.phi(fe.labels[j])),
                  fe.psi.row(static_cast<Eigen::Index>(i)).dot(fe.phi.row(static_cast<Eigen::Index>(j))), 1e-12);
}

TEST(SemiFinite, HingeBound) {
  const LossSpec l = make_loss({{"id", "hinge"}});
  const SemiFiniteEmbedding sf = semi_finite_embedding(l);
  // sqrt(max(0,1+y)^2 + max(0,1-y)^2) peaks at y = +-1 with value 2.
  EXPECT_DOUBLE_EQ(sf.raw_sup, 2.0);
  EXPECT_DOUBLE_EQ(sf.bound, 2.0 * 1.05);
  EXPECT_DOUBLE_EQ(*l.closs_bound, sf.bound);
  for (const auto& y : Space::interval(-1, 1).grid(501)) {
    EXPECT_LE(sf.phi(y).norm(), 1.0);
    for (double z : {-1.0, 1.0}) EXPECT_NEAR(sf.psi(scalar_label(z)).dot(sf.phi(y)), l(scalar_label(z), y), 1e-12);
  }
}

TEST(SemiFinite, UnboundedLossIsReported) {
  LossSpec l = one_point_constant(1.0);
  l.eval = [](const Label&, const Label& y) { return 1.0 / (1.0 + y(0)); };
  EXPECT_THROW(semi_finite_embedding(l), NumericError);
  const LossSpec g = make_loss({{"id", "geodesic_sphere_sq"}, {"d", 2}});
  EXPECT_THROW(semi_finite_embedding(g), CapabilityError);
}

TEST(SemiFinite, FiniteLabelSide) {
  LossSpec l;
  l.id = "dist_to_points";
  l.output_space = Space::interval(-1, 1);
  l.label_space = Space::finite({scalar_label(-0.5), scalar_label(0.5)});
  l.eval = [](const Label& z, const Label& y) { return std::abs(z(0) - y(0)); };
  const SemiFiniteEmbedding sf = semi_finite_embedding(l);
  EXPECT_EQ(sf.finite_side, SemiFiniteEmbedding::Side::Labels);
  EXPECT_NEAR(sf.raw_sup, std::sqrt(1.5 * 1.5 + 0.5 * 0.5), 1e-12);
  EXPECT_NEAR(sf.psi(scalar_label(0.2)).dot(sf.phi(scalar_label(0.5))), 0.3, 1e-15);
}

FourierOptions fopts(double box, double period, int Q) {
  FourierOptions o;
  o.box = box;
  o.period = period;
  o.truncation = Q;
  return o;
}

TEST(Fourier, SingleFrequencyIsExact) {
  const auto v = [](double u) { return std::cos(u); };
  for (int Q : {1, 3, 10}) {
    const FourierEmbedding fe = fourier_embedding(v, fopts(kPi / 2, 2 * kPi, Q));
    EXPECT_LE(fe.reconstruction_error, 1e-12) << Q;
    EXPECT_NEAR(fe.closs_estimate, 1.0, 1e-12);
  }
}

TEST(Fourier, ZeroProfile) {
  const FourierEmbedding fe = fourier_embedding([](double) { return 0.0; }, fopts(1.0, 0.0, 4));
  EXPECT_EQ(fe.reconstruction_error, 0.0);
  EXPECT_EQ(fe.closs_estimate, 0.0);
  EXPECT_EQ(fe.psi(0.3).norm(), 0.0);
  EXPECT_EQ(fe.phi(0.3).norm(), 0.0);
  EXPECT_EQ(fe.period, 4.0);
}

double square_coeff_abs_tail(int Q) {
  // sum over |k| > Q of |c_k| for u^2 on [-pi, pi], with |c_k| = 2 / k^2.
  double s = 0.0;
  const int K = 2000000;
  for (int k = K; k > Q; --k) s += 4.0 / (static_cast<double>(k) * k);
  return s + 4.0 / K;
}

TEST(Fourier, SquareProfileErrorFollowsCoefficientTail) {
  const auto v = [](double u) { return u * u; };
  const auto c = [](int k) -> std::complex<double> {
    if (k == 0) return kPi * kPi / 3.0;
    return 2.0 * ((k % 2 == 0) ? 1.0 : -1.0) / (static_cast<double>(k) * k);
  };
  double prev = INFINITY;
  for (int Q : {1, 2, 4, 8, 16, 32, 64, 128, 200}) {
    const FourierEmbedding fe = fourier_embedding(v, c, fopts(kPi / 2, 2 * kPi, Q));
    EXPECT_LT(fe.reconstruction_error, prev) << Q;
    // The worst point is u = +-pi, where every omitted term has the same sign.
    EXPECT_NEAR(fe.reconstruction_error, square_coeff_abs_tail(Q), 1e-9) << Q;
    prev = fe.reconstruction_error;
  }
  // At Q = 200 the sup error is 4 * sum_{k>200} 1/k^2, just under 0.02.
  const FourierEmbedding fe = fourier_embedding(v, c, fopts(kPi / 2, 2 * kPi, 200));
  EXPECT_GT(fe.reconstruction_error, 0.0199);
  EXPECT_LT(fe.reconstruction_error, 0.0200);
}

TEST(Fourier, QuadratureMatchesClosedForm) {
  const auto v = [](double u) { return u * u; };
  const FourierEmbedding fe = fourier_embedding(v, fopts(kPi / 2, 2 * kPi, 50));
  for (int k = -50; k <= 50; ++k) {
    const double expect = k == 0 ? kPi * kPi / 3.0 : 2.0 * ((k % 2 == 0) ? 1.0 : -1.0) / (static_cast<double>(k) * k);
    EXPECT_NEAR(fe.coeff(k).real(), expect, 1e-6) << k;
    EXPECT_NEAR(fe.coeff(k).imag(), 0.0, 1e-12) << k;
  }
}

TEST(Fourier, SmoothProfileErrorDecreases) {
  // sum_k cos(k u) / k^4 has a closed form as a Bernoulli polynomial.
  const auto v = [](double u) {
    const double x = std::abs(u);
    return kPi * kPi * kPi * kPi / 90.0 - kPi * kPi * x * x / 12.0 + kPi * x * x * x / 12.0 - x * x * x * x / 48.0;
  };
  const auto c = [](int k) -> std::complex<double> {
    return k == 0 ? 0.0 : 0.5 / std::pow(static_cast<double>(std::abs(k)), 4);
  };
  double prev = INFINITY;
  for (int Q : {1, 2, 4, 8, 16, 32, 64, 128, 200}) {
    const FourierEmbedding fe = fourier_embedding(v, c, fopts(kPi / 2, 2 * kPi, Q));
    EXPECT_LT(fe.reconstruction_error, prev);
    EXPECT_FALSE(fe.warning.has_value());
    prev = fe.reconstruction_error;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(Fourier, NormsRespectEstimate) {
  const auto v = [](double u) { return std::exp(-u * u); };
  // A long period keeps the periodized profile smooth at the seam.
  const FourierEmbedding fe = fourier_embedding(v, fopts(1.0, 12.0, 30));
  for (double t = -1.0; t <= 1.0; t += 0.05) {
    EXPECT_LE(fe.phi(t).norm(), 1.0 + 1e-12);
    EXPECT_LE(fe.psi(t).norm(), fe.closs_estimate * (1 + 1e-12));
  }
  EXPECT_LE(fe.reconstruction_error, 1e-6);
}

TEST(Fourier, SlowDecayWarns) {
  const auto c = [](int k) -> std::complex<double> { return k == 0 ? 0.0 : 1.0 / std::abs(k); };
  const FourierEmbedding fe = fourier_embedding([](double) { return 0.0; }, c, fopts(1.0, 0.0, 64));
  EXPECT_TRUE(fe.warning.has_value());
  EXPECT_THROW(fourier_embedding([](double) { return 0.0; }, fopts(1.0, 0.0, 0)), ParameterError);
}

TEST(Combine, SumOfZeroOne) {
  const LossSpec a = make_loss({{"id", "zero_one"}, {"T", 2}});
  const LossSpec s = combine(a, a, CombineMode::Sum);
  EXPECT_EQ(s(vec({1, 2}), vec({1, 2})), 0.0);
  EXPECT_EQ(s(vec({1, 2}), vec({2, 1})), 2.0);
  EXPECT_EQ(s(vec({1, 2}), vec({1, 1})), 1.0);
  EXPECT_NEAR(*s.closs_bound, 2.0, 1e-9);
}

TEST(Combine, ProductWithUnitLoss) {
  const LossSpec a = make_loss({{"id", "zero_one"}, {"T", 3}});
  const LossSpec one = make_loss({{"id", "constant"}, {"value", 1.0}, {"T", 2}});
  const LossSpec p = combine(a, one, CombineMode::Product);
  for (const auto& z : a.output_space.elements())
    for (const auto& y : a.label_space.elements())
      for (const auto& w : one.output_space.elements()) {
        Label zz(2), yy(2);
        zz << z, w;
        yy << y, w;
        EXPECT_EQ(p(zz, yy), a(z, y));
      }
}

TEST(Combine, TablesAndBoundsOnFiniteProducts) {
  const LossSpec l1 = make_loss({{"id", "zero_one"}, {"T", 2}});
  const LossSpec l2 = make_loss({{"id", "table"},
                                 {"outputs", {1, 2}},
                                 {"labels", {1, 2, 3}},
                                 {"V", {{0.0, 0.5, 2.0}, {1.0, 0.0, -0.5}}}});
  for (auto mode : {CombineMode::Sum, CombineMode::Product}) {
    const LossSpec c = combine(l1, l2, mode);
    const FiniteEmbedding f1 = finite_embedding(l1), f2 = finite_embedding(l2), fc = finite_embedding(c);
    ASSERT_EQ(fc.V.rows(), 4);
    ASSERT_EQ(fc.V.cols(), 6);
    for (int i1 = 0; i1 < 2; ++i1)
      for (int i2 = 0; i2 < 2; ++i2)
        for (int j1 = 0; j1 < 2; ++j1)
          for (int j2 = 0; j2 < 3; ++j2) {
            const double expect =
                mode == CombineMode::Sum ? f1.V(i1, j1) + f2.V(i2, j2) : f1.V(i1, j1) * f2.V(i2, j2);
            EXPECT_EQ(fc.V(i1 * 2 + i2, j1 * 3 + j2), expect);
          }
    const double expect_bound = mode == CombineMode::Sum ? *l1.closs_bound + *l2.closs_bound
                                                         : *l1.closs_bound * *l2.closs_bound;
    EXPECT_DOUBLE_EQ(*c.closs_bound, expect_bound);
    ASSERT_TRUE(c.embedding.has_value());
    for (std::size_t i = 0; i < fc.outputs.size(); ++i) {
      EXPECT_LE(c.embedding->psi(fc.outputs[i]).norm(), *c.closs_bound * (1 + 1e-12));
      for (std::size_t j = 0; j < fc.labels.size(); ++j) {
        EXPECT_LE(c.embedding->phi(fc.labels[j]).norm(), 1.0 + 1e-12);
        EXPECT_NEAR(c.embedding->psi(fc.outputs[i]).dot(c.embedding->phi(fc.labels[j])),
                    fc.V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 1e-12);
      }
    }
  }
}

TEST(Combine, ZeroBoundOperandIsDropped) {
  const LossSpec a = make_loss({{"id", "zero_one"}, {"T", 2}});
  const LossSpec z = make_loss({{"id", "constant"}, {"value", 0.0}, {"T", 2}});
  const LossSpec s = combine(a, z, CombineMode::Sum);
  EXPECT_EQ(s.embedding->dim, a.embedding->dim);
  EXPECT_NEAR(s.embedding->psi(vec({1, 2})).dot(s.embedding->phi(vec({2, 1}))), 1.0, 1e-15);
}

TEST(Combine, UnknownBoundPropagates) {
  const LossSpec a = make_loss({{"id", "absolute"}});
  const LossSpec b = make_loss({{"id", "squared_euclidean"}, {"d", 1}});
  const LossSpec s = combine(a, b, CombineMode::Sum);
  EXPECT_FALSE(s.closs_bound.has_value());
  EXPECT_FALSE(s.embedding.has_value());
  EXPECT_TRUE(s.has_subgradient());
  // Product rule for the subgradient.
  const LossSpec p = combine(b, b, CombineMode::Product);
  const Vector g = p.subgradient(vec({0.5, 0.2}), vec({0.1, -0.3}));
  EXPECT_NEAR(g(0), 2 * 0.4 * 0.25, 1e-15);
  EXPECT_NEAR(g(1), 2 * 0.5 * 0.16, 1e-15);
}

TEST(Combine, ContinuousEmbeddingsCompose) {
  Rng rng(7);
  const LossSpec a = make_loss({{"id", "squared_euclidean"}, {"d", 2}});
  const LossSpec b = make_loss({{"id", "hellinger"}, {"bins", 3}});
  for (auto mode : {CombineMode::Sum, CombineMode::Product}) {
    const LossSpec c = combine(a, b, mode);
    for (int t = 0; t < 100; ++t) {
      const Label z = c.output_space.sample(1, rng).front();
      const Label y = c.label_space.sample(1, rng).front();
      EXPECT_NEAR(c.embedding->psi(z).dot(c.embedding->phi(y)), c(z, y), 1e-12);
      EXPECT_LE(c.embedding->phi(y).norm(), 1.0 + 1e-12);
      EXPECT_LE(c.embedding->psi(z).norm(), *c.closs_bound * (1 + 1e-12));
    }
  }
}

TEST(Restrict, ZeroOneToTwoClasses) {
  const LossSpec l3 = make_loss({{"id", "zero_one"}, {"T", 3}});
  const LossSpec r = restrict(l3, Space::classes(2), Space::classes(2));
  const FiniteEmbedding fr = finite_embedding(r);
  const FiniteEmbedding f2 = finite_embedding(make_loss({{"id", "zero_one"}, {"T", 2}}));
  EXPECT_EQ(fr.V, f2.V);
  EXPECT_EQ(fr.reconstruction_error(), 0.0);
  EXPECT_EQ(*r.closs_bound, *l3.closs_bound);
}

TEST(Restrict, SingletonGivesOneRow) {
  const LossSpec l3 = make_loss({{"id", "zero_one"}, {"T", 3}});
  const LossSpec r = restrict(l3, Space::finite({scalar_label(2)}), l3.label_space);
  const FiniteEmbedding fe = finite_embedding(r);
  ASSERT_EQ(fe.V.rows(), 1);
  EXPECT_EQ(fe.V, (Matrix(1, 3) << 1, 0, 1).finished());
}

TEST(Restrict, ContinuousToFinite) {
  Rng rng(8);
  const LossSpec g = make_loss({{"id", "geodesic_sphere_sq"}, {"d", 2}});
  const Space sub = Space::finite(Space::sphere(2).sample(5, rng));
  const LossSpec r = restrict(g, sub, sub);
  const FiniteEmbedding fe = finite_embedding(r);
  EXPECT_LE(fe.reconstruction_error(), 1e-12);
  EXPECT_THROW(restrict(g, Space::finite({vec({1, 1})}), sub), InputError);
  EXPECT_THROW(restrict(g, Space::classes(2), sub), InputError);
}

TEST(Kde, SelfLossIsZeroAndGaussianBound) {
  const KernelSpec h = KernelSpec::gaussian(0.8);
  const LossSpec l = kde_loss_from_kernel(h, Space::cube(2, 1.0));
  Rng rng(9);
  for (const auto& y : l.label_space.sample(20, rng)) EXPECT_EQ(l(y, y), 0.0);
  EXPECT_EQ(*l.closs_bound, 6.0);
}

TEST(Kde, LinearOrthogonalUnitVectors) {
  const LossSpec l = make_loss({{"id", "kde"}, {"kernel", {{"family", "linear"}, {"domain_radius", 1.0}}}, {"dim", 3}});
  EXPECT_EQ(l(vec({1, 0, 0}), vec({0, 1, 0})), 2.0);
  ASSERT_TRUE(l.embedding.has_value());
  Rng rng(10);
  for (int t = 0; t < 50; ++t) {
    const auto p = Space::sphere(3).sample(2, rng);
    EXPECT_NEAR(l.embedding->psi(p[0]).dot(l.embedding->phi(p[1])), l(p[0], p[1]), 1e-12);
    EXPECT_LE(l.embedding->phi(p[1]).norm(), 1.0 + 1e-12);
    EXPECT_LE(l.embedding->psi(p[0]).norm(), *l.closs_bound);
  }
}

TEST(Explicit, SquaredEuclideanAndHellinger) {
  Rng rng(11);
  const nlohmann::json ids[] = {{{"id", "squared_euclidean"}, {"d", 3}, {"radius", 1.5}},
                                {{"id", "hellinger"}, {"bins", 4}}};
  for (const auto& id : ids) {
    const LossSpec l = make_loss(id);
    ASSERT_TRUE(l.embedding.has_value());
    double worst_psi = 0.0;
    for (int t = 0; t < 500; ++t) {
      const Label z = l.output_space.sample(1, rng).front();
      const Label y = l.label_space.sample(1, rng).front();
      EXPECT_NEAR(l.embedding->psi(z).dot(l.embedding->phi(y)), l(z, y), 1e-12) << l.id;
      EXPECT_LE(l.embedding->phi(y).norm(), 1.0 + 1e-12) << l.id;
      worst_psi = std::max(worst_psi, l.embedding->psi(z).norm());
    }
    EXPECT_LE(worst_psi, *l.closs_bound * (1 + 1e-12)) << l.id;
  }
  EXPECT_EQ(*make_loss({{"id", "hellinger"}, {"bins", 3}}).closs_bound, 4.0);
}

TEST(Explicit, SquaredEuclideanCornerAttainsBound) {
  const LossSpec l = make_loss({{"id", "squared_euclidean"}, {"d", 2}, {"radius", 1.0}});
  const Label corner = vec({1, 1});
  EXPECT_NEAR(l.embedding->phi(corner).norm(), 1.0, 1e-15);
  EXPECT_NEAR(l.embedding->psi(corner).norm(), *l.closs_bound, 1e-12);
}

TEST(Catalog, ConfigRebuildsTheLoss) {
  Rng rng(12);
  const LossSpec zo = make_loss({{"id", "zero_one"}, {"T", 3}});
  const LossSpec tab = make_loss({{"id", "table"}, {"outputs", {1, 2}}, {"labels", {1, 2}}, {"V", {{0.0, 1.5}, {2.0, 0.0}}}});
  const std::vector<LossSpec> losses{
      zo,
      tab,
      make_loss({{"id", "squared_euclidean"}, {"d", 2}, {"radius", 0.5}}),
      make_loss({{"id", "hellinger"}, {"bins", 3}}),
      make_loss({{"id", "geodesic_sphere_sq"}, {"d", 3}}),
      make_loss({{"id", "absolute"}, {"lo", 0}, {"hi", 2}}),
      make_loss({{"id", "huber"}, {"delta", 0.2}}),
      make_loss({{"id", "hinge"}}),
      make_loss({{"id", "constant"}, {"value", 2.5}, {"T", 2}}),
      make_loss({{"id", "kde"}, {"kernel", {{"family", "laplacian"}, {"sigma", 2.0}}}, {"dim", 2}}),
      combine(zo, tab, CombineMode::Sum),
      combine(zo, tab, CombineMode::Product),
      restrict(zo, Space::classes(2), Space::classes(3))};
  for (const auto& l : losses) {
    const LossSpec back = make_loss(nlohmann::json::parse(l.config().dump()));
    EXPECT_EQ(back.id, l.id);
    EXPECT_EQ(back.output_space.to_json(), l.output_space.to_json()) << l.id;
    EXPECT_EQ(back.label_space.to_json(), l.label_space.to_json()) << l.id;
    EXPECT_EQ(back.bound_json(), l.bound_json()) << l.id;
    for (int t = 0; t < 20; ++t) {
      const Label z = l.output_space.is_finite() ? l.output_space.elements()[rng.uniform_index(l.output_space.elements().size())]
                                                 : l.output_space.sample(1, rng).front();
      const Label y = l.label_space.is_finite() ? l.label_space.elements()[rng.uniform_index(l.label_space.elements().size())]
                                                : l.label_space.sample(1, rng).front();
      EXPECT_EQ(back(z, y), l(z, y)) << l.id;
    }
  }
}

}  // namespace
}  // namespace ile
