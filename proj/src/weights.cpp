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

#include "ile/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "ile/json_util.hpp"
#include "ile/rng.hpp"

namespace ile {

namespace {

constexpr int kModelVersion = 1;
constexpr double kNwDenominatorFloor = 1e-300;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive_lambda(double lambda, const char* who) {
  if (!(lambda > 0.0)) throw ParameterError(std::string(who) + ": lambda must be positive");
}

// Pseudo-inverse spectrum: eigenvalues below a relative cutoff are dropped.
Vector pinv_spectrum(const Vector& eig) {
  const double scale = eig.cwiseAbs().maxCoeff();
  const double cutoff = scale * static_cast<double>(eig.size()) * 1e-14;
  Vector inv(eig.size());
  for (Eigen::Index i = 0; i < eig.size(); ++i) inv(i) = eig(i) > cutoff ? 1.0 / eig(i) : 0.0;
  return inv;
}

}  // namespace

std::string algorithm_name(const WeightAlgorithm& a) {
  return std::visit(overloaded{[](const Ridge&) { return std::string("ridge"); },
                               [](const L2Boost&) { return std::string("l2boost"); },
                               [](const Pcr&) { return std::string("pcr"); },
                               [](const RandomFeatures&) { return std::string("randfeat"); },
                               [](const Nystrom&) { return std::string("nystrom"); },
                               [](const NadarayaWatson&) { return std::string("nw"); },
                               [](const NearestNeighbors&) { return std::string("nn"); }},
                    a);
}

void to_json(nlohmann::json& j, const WeightAlgorithm& a) {
  j = std::visit(
      overloaded{
          [](const Ridge& r) { return nlohmann::json{{"name", "ridge"}, {"lambda", r.lambda}}; },
          [](const L2Boost& b) {
            return nlohmann::json{{"name", "l2boost"}, {"nu", b.nu}, {"steps", b.steps}};
          },
          [](const Pcr& p) { return nlohmann::json{{"name", "pcr"}, {"lambda", p.lambda}}; },
          [](const RandomFeatures& r) {
            return nlohmann::json{
                {"name", "randfeat"}, {"features", r.features}, {"lambda", r.lambda}, {"seed", r.seed}};
          },
          [](const Nystrom& y) {
            return nlohmann::json{
                {"name", "nystrom"}, {"landmarks", y.landmarks}, {"lambda", y.lambda}, {"seed", y.seed}};
          },
          [](const NadarayaWatson&) { return nlohmann::json{{"name", "nw"}}; },
          [](const NearestNeighbors& q) { return nlohmann::json{{"name", "nn"}, {"q", q.q}}; }},
      a);
}

void from_json(const nlohmann::json& j, WeightAlgorithm& a) {
  const auto name = j.at("name").get<std::string>();
  if (name == "ridge")
    a = Ridge{j.at("lambda").get<double>()};
  else if (name == "l2boost")
    a = L2Boost{j.at("nu").get<double>(), j.at("steps").get<int>()};
  else if (name == "pcr")
    a = Pcr{j.at("lambda").get<double>()};
  else if (name == "randfeat")
    a = RandomFeatures{j.at("features").get<int>(), j.at("lambda").get<double>(),
                       j.value("seed", std::uint64_t{0})};
  else if (name == "nystrom")
    a = Nystrom{j.at("landmarks").get<int>(), j.at("lambda").get<double>(),
                j.value("seed", std::uint64_t{0})};
  else if (name == "nw")
    a = NadarayaWatson{};
  else if (name == "nn")
    a = NearestNeighbors{j.at("q").get<int>()};
  else
    throw ParameterError("unknown weight algorithm '" + name + "'");
}

// ---------------------------------------------------------------------------
// Fitting

WeightModel fit_weights(const Matrix& X, const KernelSpec& kernel, const WeightAlgorithm& algorithm) {
  if (X.rows() < 1) throw InputError("fit_weights: empty training set");
  kernel.validate();

  WeightModel m;
  m.algorithm_ = algorithm;
  m.kernel_ = kernel;
  m.inputs_ = X;
  const Eigen::Index n = X.rows();
  const double nd = static_cast<double>(n);

  std::visit(
      overloaded{
          [&](const Ridge& r) {
            require_positive_lambda(r.lambda, "ridge");
            Matrix A = gram_matrix(kernel, X).entries;
            A.diagonal().array() += nd * r.lambda;
            Eigen::LLT<Matrix> llt(A);
            if (llt.info() == Eigen::Success) {
              m.cholesky_ = true;
              m.dense_ = llt.matrixL();
            } else {
              Eigen::SelfAdjointEigenSolver<Matrix> es(A);
              if (es.info() != Eigen::Success) throw NumericError("ridge: factorization failed");
              m.cholesky_ = false;
              m.basis_ = es.eigenvectors();
              m.eigenvalues_ = es.eigenvalues();
              m.inverse_spectrum_ = pinv_spectrum(es.eigenvalues());
            }
          },
          [&](const L2Boost& b) {
            if (b.steps < 1) throw ParameterError("l2boost: steps must be >= 1");
            if (!(b.nu > 0.0) || !(b.nu < 1.0 / kernel.kappa_sq()))
              throw ParameterError("l2boost: step size nu must lie in (0, 1/kappa^2)");
            const Matrix K = gram_matrix(kernel, X).entries;
            const double h = b.nu / nd;
            Matrix C = Matrix::Zero(n, n);
            for (int s = 0; s < b.steps; ++s) {
              Matrix next = C - h * (K * C);
              next.diagonal().array() += h;
              C = std::move(next);
            }
            m.dense_ = std::move(C);
          },
          [&](const Pcr& p) {
            require_positive_lambda(p.lambda, "pcr");
            const Matrix K = gram_matrix(kernel, X).entries;
            Eigen::SelfAdjointEigenSolver<Matrix> es(K);
            if (es.info() != Eigen::Success) throw NumericError("pcr: eigendecomposition failed");
            m.basis_ = es.eigenvectors();
            m.eigenvalues_ = es.eigenvalues();
            m.inverse_spectrum_.resize(n);
            for (Eigen::Index i = 0; i < n; ++i)
              m.inverse_spectrum_(i) = es.eigenvalues()(i) < p.lambda ? 0.0 : 1.0 / es.eigenvalues()(i);
          },
          [&](const RandomFeatures& rf) {
            require_positive_lambda(rf.lambda, "randfeat");
            if (rf.features < 1) throw ParameterError("randfeat: feature count must be >= 1");
            if (kernel.family != KernelFamily::Gaussian)
              throw ParameterError("randfeat: only the gaussian kernel has a random feature map here");
            const Eigen::Index d = X.cols();
            const Eigen::Index M = rf.features;
            Rng rng(rf.seed);
            // Spectral measure of exp(-|u|^2/sigma^2) is N(0, (2/sigma^2) I).
            const double scale = std::sqrt(2.0) / kernel.sigma;
            m.omega_.resize(d, M);
            m.phase_.resize(M);
            for (Eigen::Index j = 0; j < M; ++j) {
              for (Eigen::Index t = 0; t < d; ++t) m.omega_(t, j) = scale * rng.normal();
              m.phase_(j) = 2.0 * std::numbers::pi * rng.uniform();
            }
            Matrix Q(n, M);
            for (Eigen::Index i = 0; i < n; ++i) Q.row(i) = m.random_features(X.row(i).transpose()).transpose();
            // W = Q (Q^T Q + n lambda I)^{-1}. With more features than points the
            // equal form (Q Q^T + n lambda I)^{-1} Q needs only an n x n solve.
            const bool wide = M > n;
            Matrix A = wide ? Matrix(Q * Q.transpose()) : Matrix(Q.transpose() * Q);
            A = 0.5 * (A + A.transpose());
            A.diagonal().array() += nd * rf.lambda;
            Eigen::LLT<Matrix> llt(A);
            if (llt.info() != Eigen::Success) throw NumericError("randfeat: regularized feature Gram not positive definite");
            m.dense_ = wide ? Matrix(llt.solve(Q)) : Matrix(llt.solve(Q.transpose()).transpose());
          },
          [&](const Nystrom& ny) {
            require_positive_lambda(ny.lambda, "nystrom");
            if (ny.landmarks < 1 || ny.landmarks > n)
              throw ParameterError("nystrom: landmark count must lie in [1, n]");
            const Eigen::Index M = ny.landmarks;
            // Partial Fisher-Yates: uniform sample without replacement.
            std::vector<int> idx(static_cast<std::size_t>(n));
            std::iota(idx.begin(), idx.end(), 0);
            Rng rng(ny.seed);
            for (Eigen::Index j = 0; j < M; ++j) {
              const auto r = j + static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n - j)));
              std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(r)]);
            }
            m.landmarks_.assign(idx.begin(), idx.begin() + M);
            m.landmark_points_.resize(M, X.cols());
            for (Eigen::Index j = 0; j < M; ++j) m.landmark_points_.row(j) = X.row(m.landmarks_[static_cast<std::size_t>(j)]);

            const Matrix KnM = eval_matrix(kernel, X, m.landmark_points_);  // n x M
            const Matrix KMM = gram_matrix(kernel, m.landmark_points_).entries;
            // With K_MM = U S U^T and T = U S^{-1/2} on the numerical range,
            // (K_nM^T K_nM + n lambda K_MM)^+ = T (B^T B + n lambda I)^{-1} T^T,
            // B = K_nM T, since ker K_MM lies in ker K_nM. This avoids squaring
            // the condition number of K_MM.
            Eigen::SelfAdjointEigenSolver<Matrix> es(KMM);
            if (es.info() != Eigen::Success) throw NumericError("nystrom: eigendecomposition of K_MM failed");
            // Rank cutoff at machine epsilon: the dropped directions carry no
            // signal, while a looser cutoff biases alpha away from ridge at M = n.
            const Vector& s = es.eigenvalues();
            const double cutoff = s.maxCoeff() * std::numeric_limits<double>::epsilon();
            std::vector<Eigen::Index> keep;
            for (Eigen::Index i = 0; i < s.size(); ++i)
              if (s(i) > cutoff) keep.push_back(i);
            if (keep.empty()) throw NumericError("nystrom: landmark Gram matrix is numerically zero");
            Matrix T(M, static_cast<Eigen::Index>(keep.size()));
            for (std::size_t c = 0; c < keep.size(); ++c)
              T.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) / std::sqrt(s(keep[c]));
            const Matrix B = KnM * T;
            Matrix A = B.transpose() * B;
            A = 0.5 * (A + A.transpose());
            A.diagonal().array() += nd * ny.lambda;
            Eigen::LLT<Matrix> llt(A);
            if (llt.info() != Eigen::Success) throw NumericError("nystrom: regularized system not positive definite");
            m.dense_ = B * llt.solve(T.transpose());
          },
          [&](const NadarayaWatson&) {},
          [&](const NearestNeighbors& q) {
            if (q.q < 1 || q.q > n) throw ParameterError("nn: q must lie in [1, n]");
          }},
      algorithm);

  m.train_diag_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point xi = X.row(i).transpose();
    m.train_diag_(i) = eval_kernel(kernel, xi, xi);
  }
  return m;
}

WeightModel fit_weights_exact(const Matrix& X, const KernelSpec& kernel, const ExactAlgorithm& algorithm) {
  return std::visit([&](const auto& a) { return fit_weights(X, kernel, WeightAlgorithm{a}); }, algorithm);
}

WeightModel fit_weights_approx(const Matrix& X, const KernelSpec& kernel, const ApproxAlgorithm& algorithm) {
  return std::visit([&](const auto& a) { return fit_weights(X, kernel, WeightAlgorithm{a}); }, algorithm);
}

WeightModel fit_weights_local(const Matrix& X, const KernelSpec& kernel, const LocalAlgorithm& algorithm) {
  return std::visit([&](const auto& a) { return fit_weights(X, kernel, WeightAlgorithm{a}); }, algorithm);
}

// ---------------------------------------------------------------------------
// Evaluation

Vector WeightModel::random_features(const Point& x) const {
  if (!std::holds_alternative<RandomFeatures>(algorithm_))
    throw CapabilityError("random_features: model is not a random feature model");
  if (x.size() != omega_.rows()) throw InputError("random_features: dimension mismatch");
  const double c = std::sqrt(2.0 / static_cast<double>(omega_.cols()));
  Vector z = omega_.transpose() * x + phase_;
  return (c * z.array().cos()).matrix();
}

Vector WeightModel::apply(const Point& x) const {
  const Eigen::Index n = inputs_.rows();
  return std::visit(
      overloaded{
          [&](const Ridge&) -> Vector {
            const Vector v = eval_vector(kernel_, inputs_, x);
            if (cholesky_) {
              Vector w = dense_.triangularView<Eigen::Lower>().solve(v);
              return dense_.transpose().triangularView<Eigen::Upper>().solve(w);
            }
            return basis_ * (inverse_spectrum_.asDiagonal() * (basis_.transpose() * v));
          },
          [&](const L2Boost&) -> Vector { return dense_ * eval_vector(kernel_, inputs_, x); },
          [&](const Pcr&) -> Vector {
            const Vector v = eval_vector(kernel_, inputs_, x);
            return basis_ * (inverse_spectrum_.asDiagonal() * (basis_.transpose() * v));
          },
          [&](const RandomFeatures&) -> Vector { return dense_ * random_features(x); },
          [&](const Nystrom&) -> Vector { return dense_ * eval_vector(kernel_, landmark_points_, x); },
          [&](const NadarayaWatson&) -> Vector {
            const Vector v = eval_vector(kernel_, inputs_, x);
            const double s = v.sum();
            if (!(s > kNwDenominatorFloor))
              throw NumericError("nadaraya-watson: kernel mass at the test point is degenerate (sum = " +
                                 std::to_string(s) + ")");
            return v / s;
          },
          [&](const NearestNeighbors& q) -> Vector {
            const Vector v = eval_vector(kernel_, inputs_, x);
            const double kxx = eval_kernel(kernel_, x, x);
            std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) dist[static_cast<std::size_t>(i)] = {kxx + train_diag_(i) - 2.0 * v(i), i};
            // Lexicographic on (distance, index): ties go to the lowest index.
            std::partial_sort(dist.begin(), dist.begin() + q.q, dist.end());
            Vector a = Vector::Zero(n);
            for (int j = 0; j < q.q; ++j) a(dist[static_cast<std::size_t>(j)].second) = 1.0;
            return a;
          }},
      algorithm_);
}

Vector WeightModel::alpha(const Point& x) const {
  if (inputs_.rows() == 0) throw InputError("alpha: model is not fitted");
  if (x.size() != inputs_.cols())
    throw InputError("alpha: test point has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(inputs_.cols()));
  return apply(x);
}

Matrix WeightModel::alpha_batch(const Matrix& X_test, Exec exec) const {
  if (X_test.cols() != inputs_.cols()) throw InputError("alpha_batch: dimension mismatch");
  const Eigen::Index m = X_test.rows();
  Matrix out(inputs_.rows(), m);
  if (exec == Exec::Serial) {
    for (Eigen::Index j = 0; j < m; ++j) out.col(j) = apply(X_test.row(j).transpose());
    return out;
  }
  // Exceptions cannot cross the OpenMP region; capture the first one.
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index j = 0; j < m; ++j) {
    try {
      out.col(j) = apply(X_test.row(j).transpose());
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

nlohmann::json WeightModel::to_json() const {
  nlohmann::json j;
  j["format"] = "ile.weight_model";
  j["version"] = kModelVersion;
  nlohmann::json algo;
  ile::to_json(algo, algorithm_);
  j["algorithm"] = algo;
  j["kernel"] = kernel_;
  j["inputs"] = matrix_to_json(inputs_);
  nlohmann::json state;
  state["cholesky"] = cholesky_;
  state["dense"] = matrix_to_json(dense_);
  state["basis"] = matrix_to_json(basis_);
  state["eigenvalues"] = vector_to_json(eigenvalues_);
  state["inverse_spectrum"] = vector_to_json(inverse_spectrum_);
  state["omega"] = matrix_to_json(omega_);
  state["phase"] = vector_to_json(phase_);
  state["landmarks"] = landmarks_;
  j["state"] = state;
  return j;
}

WeightModel WeightModel::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "ile.weight_model")
    throw InputError("weight model record: wrong format tag");
  const int version = j.at("version").get<int>();
  if (version != kModelVersion)
    throw InputError("weight model record: unsupported version " + std::to_string(version));
  WeightModel m;
  ile::from_json(j.at("algorithm"), m.algorithm_);
  m.kernel_ = j.at("kernel").get<KernelSpec>();
  m.inputs_ = matrix_from_json(j.at("inputs"));
  const auto& s = j.at("state");
  m.cholesky_ = s.at("cholesky").get<bool>();
  m.dense_ = matrix_from_json(s.at("dense"));
  m.basis_ = matrix_from_json(s.at("basis"));
  m.eigenvalues_ = vector_from_json(s.at("eigenvalues"));
  m.inverse_spectrum_ = vector_from_json(s.at("inverse_spectrum"));
  m.omega_ = matrix_from_json(s.at("omega"));
  m.phase_ = vector_from_json(s.at("phase"));
  m.landmarks_ = s.at("landmarks").get<std::vector<int>>();
  m.landmark_points_.resize(static_cast<Eigen::Index>(m.landmarks_.size()), m.inputs_.cols());
  for (std::size_t j2 = 0; j2 < m.landmarks_.size(); ++j2)
    m.landmark_points_.row(static_cast<Eigen::Index>(j2)) = m.inputs_.row(m.landmarks_[j2]);
  m.train_diag_.resize(m.inputs_.rows());
  for (Eigen::Index i = 0; i < m.inputs_.rows(); ++i) {
    const Point xi = m.inputs_.row(i).transpose();
    m.train_diag_(i) = eval_kernel(m.kernel_, xi, xi);
  }
  return m;
}

}  // namespace ile
