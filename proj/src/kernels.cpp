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

#include "ile/kernels.hpp"

#include <cmath>

namespace ile {

namespace {

// Points are read through raw pointers so that k(a,b) and k(b,a) run the
// same floating point operations in the same order and agree bit for bit.
double kernel_raw(const KernelSpec& spec, const double* a, const double* b, Eigen::Index d) {
  switch (spec.family) {
    case KernelFamily::Linear: {
      double s = 0.0;
      for (Eigen::Index t = 0; t < d; ++t) s += a[t] * b[t];
      return s;
    }
    case KernelFamily::Gaussian: {
      double s = 0.0;
      for (Eigen::Index t = 0; t < d; ++t) {
        const double u = a[t] - b[t];
        s += u * u;
      }
      return std::exp(-s / (spec.sigma * spec.sigma));
    }
    case KernelFamily::Laplacian: {
      double s = 0.0;
      for (Eigen::Index t = 0; t < d; ++t) {
        const double u = a[t] - b[t];
        s += u * u;
      }
      return std::exp(-std::sqrt(s) / spec.sigma);
    }
  }
  return 0.0;
}

}  // namespace

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Laplacian: return "laplacian";
    case KernelFamily::Linear: return "linear";
  }
  return "?";
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "gaussian") return KernelFamily::Gaussian;
  if (s == "laplacian") return KernelFamily::Laplacian;
  if (s == "linear") return KernelFamily::Linear;
  throw ParameterError("unknown kernel family '" + s + "'");
}

double KernelSpec::kappa_sq() const {
  if (family == KernelFamily::Linear) return domain_radius * domain_radius;
  return 1.0;
}

void KernelSpec::validate() const {
  if (family != KernelFamily::Linear && !(sigma > 0.0))
    throw ParameterError("kernel bandwidth sigma must be positive");
  if (family == KernelFamily::Linear && !(domain_radius > 0.0))
    throw ParameterError("linear kernel domain_radius must be positive");
}

void to_json(nlohmann::json& j, const KernelSpec& k) {
  j = nlohmann::json{{"family", to_string(k.family)},
                     {"sigma", k.sigma},
                     {"domain_radius", k.domain_radius}};
}

void from_json(const nlohmann::json& j, KernelSpec& k) {
  k.family = kernel_family_from_string(j.at("family").get<std::string>());
  k.sigma = j.value("sigma", 1.0);
  k.domain_radius = j.value("domain_radius", 1.0);
  k.validate();
}

double eval_kernel(const KernelSpec& spec, const Point& x, const Point& xp) {
  if (x.size() != xp.size())
    throw InputError("eval_kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(xp.size()) + ")");
  return kernel_raw(spec, x.data(), xp.data(), x.size());
}

GramMatrix gram_matrix(const KernelSpec& spec, const Matrix& X, Exec exec) {
  const Eigen::Index n = X.rows();
  if (n < 1) throw InputError("gram_matrix: empty input set");
  const Eigen::Index d = X.cols();
  const Matrix Xt = X.transpose();  // points as contiguous columns
  Matrix K(n, n);

  if (exec == Exec::Serial) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        K(i, j) = kernel_raw(spec, Xt.col(i).data(), Xt.col(j).data(), d);
  } else {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        K(i, j) = kernel_raw(spec, Xt.col(i).data(), Xt.col(j).data(), d);
  }

  Matrix sym = 0.5 * (K + K.transpose());
  return GramMatrix{std::move(sym), X};
}

Vector eval_vector(const KernelSpec& spec, const Matrix& X_train, const Point& x) {
  if (x.size() != X_train.cols())
    throw InputError("eval_vector: point has dimension " + std::to_string(x.size()) +
                     ", training inputs have " + std::to_string(X_train.cols()));
  const Eigen::Index n = X_train.rows();
  const Matrix Xt = X_train.transpose();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = kernel_raw(spec, x.data(), Xt.col(i).data(), x.size());
  return v;
}

Matrix eval_matrix(const KernelSpec& spec, const Matrix& X_train, const Matrix& X_test, Exec exec) {
  if (X_test.cols() != X_train.cols())
    throw InputError("eval_matrix: test inputs have dimension " + std::to_string(X_test.cols()) +
                     ", training inputs have " + std::to_string(X_train.cols()));
  const Eigen::Index n = X_train.rows();
  const Eigen::Index m = X_test.rows();
  const Eigen::Index d = X_train.cols();
  const Matrix Xt = X_train.transpose();
  const Matrix Tt = X_test.transpose();
  Matrix V(n, m);
  if (exec == Exec::Serial) {
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < n; ++i) V(i, j) = kernel_raw(spec, Tt.col(j).data(), Xt.col(i).data(), d);
  } else {
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < n; ++i) V(i, j) = kernel_raw(spec, Tt.col(j).data(), Xt.col(i).data(), d);
  }
  return V;
}

}  // namespace ile
