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


#include "ile/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ile/io.hpp"
#include "ile/json_util.hpp"

namespace ile {
namespace {

constexpr Eigen::Index kChunk = 4096;

void check_row_sums(const Vector& p, const std::string& what) {
  if ((p.array() < 0.0).any() || !p.allFinite()) throw InputError(what + ": negative or non-finite probability");
  if (std::abs(p.sum() - 1.0) > 1e-12) throw InputError(what + ": probabilities sum to " + format_double(p.sum()));
}

Vector softmax(const Vector& s, double temperature) {
  const Vector e = ((s.array() - s.maxCoeff()) / temperature).exp();
  return e / e.sum();
}

Vector normal_vector(Rng& rng, int k) {
  Vector v(k);
  for (int i = 0; i < k; ++i) v(i) = rng.normal();
  return v;
}

Matrix uniform_inputs(Rng& rng, Eigen::Index n, int d) {
  Matrix X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = rng.uniform(-1.0, 1.0);
  return X;
}

// Runs body(first, last, rng) over fixed chunks of [0, n), each with its own
// derived stream.
template <class Body>
void for_chunks(Eigen::Index n, std::uint64_t seed, Body body) {
  const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
    body(c * kChunk, std::min(n, (c + 1) * kChunk), rng);
  }
}

}  // namespace

void SyntheticDistribution::validate() const {
  const Eigen::Index m = support.rows();
  if (m < 1) throw InputError("distribution: empty support");
  if (marginal.size() != m) throw InputError("distribution: marginal length differs from support size");
  if (conditional.rows() != m) throw InputError("distribution: conditional table has wrong row count");
  if (static_cast<std::size_t>(conditional.cols()) != labels.size())
    throw InputError("distribution: conditional table has wrong column count");
  check_row_sums(marginal, "distribution marginal");
  for (Eigen::Index k = 0; k < m; ++k)
    check_row_sums(conditional.row(k).transpose(), "conditional row " + std::to_string(k));
}

nlohmann::json SyntheticDistribution::to_json() const {
  return {{"format", "ile.distribution"},
          {"schema_version", kSchemaVersion},
          {"support", matrix_to_json(support)},
          {"marginal", vector_to_json(marginal)},
          {"labels", labels_to_json(labels)},
          {"conditional", matrix_to_json(conditional)},
          {"task", task}};
}

SyntheticDistribution SyntheticDistribution::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "ile.distribution") throw InputError("not an ile.distribution record");
  SyntheticDistribution d;
  d.support = matrix_from_json(j.at("support"));
  d.marginal = vector_from_json(j.at("marginal"));
  d.labels = labels_from_json(j.at("labels"));
  d.conditional = matrix_from_json(j.at("conditional"));
  d.task = j.value("task", nlohmann::json::object());
  d.validate();
  return d;
}

Dataset sample(const SyntheticDistribution& dist, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("sample: n must be >= 1");
  dist.validate();
  const Eigen::Index m = dist.support_size();
  auto cdf = [](const Vector& p) {
    std::vector<double> c(static_cast<std::size_t>(p.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) c[static_cast<std::size_t>(i)] = acc += p(i);
    return c;
  };
  auto draw = [](const std::vector<double>& c, double u) {
    const auto it = std::upper_bound(c.begin(), c.end(), u * c.back());
    return std::min<std::size_t>(static_cast<std::size_t>(it - c.begin()), c.size() - 1);
  };
  const std::vector<double> px = cdf(dist.marginal);
  std::vector<std::vector<double>> py;
  for (Eigen::Index k = 0; k < m; ++k) py.push_back(cdf(dist.conditional.row(k).transpose()));

  Dataset out;
  out.X.resize(n, dist.support.cols());
  out.Y.resize(static_cast<std::size_t>(n));
  for_chunks(n, seed, [&](Eigen::Index first, Eigen::Index last, Rng& rng) {
    for (Eigen::Index i = first; i < last; ++i) {
      const std::size_t k = draw(px, rng.uniform());
      const std::size_t t = draw(py[k], rng.uniform());
      out.X.row(i) = dist.support.row(static_cast<Eigen::Index>(k));
      out.Y[static_cast<std::size_t>(i)] = dist.labels[t];
    }
  });
  out.task = {{"generator", "distribution"}, {"seed", seed}, {"source", dist.task}};
  return out;
}

Vector SmoothField::operator()(const Point& x) const {
  const Vector arg = freq * x + phase;
  return offset + amp * arg.array().sin().matrix();
}

SmoothField SmoothField::random(Rng& rng, int d, int k, int terms, double amp_scale) {
  SmoothField f;
  f.freq.resize(terms, d);
  for (int r = 0; r < terms; ++r)
    for (int j = 0; j < d; ++j) f.freq(r, j) = 2.0 * rng.normal();
  f.phase.resize(terms);
  for (int r = 0; r < terms; ++r) f.phase(r) = rng.uniform(0.0, 2.0 * M_PI);
  f.amp.resize(k, terms);
  for (int r = 0; r < terms; ++r)
    for (int i = 0; i < k; ++i) f.amp(i, r) = amp_scale * rng.normal();
  f.offset = Vector::Zero(k);
  return f;
}

SyntheticDistribution gen_finite_classification(std::uint64_t seed, int d, int T, int m, double temperature) {
  if (d < 1) throw ParameterError("gen_finite_classification: d must be >= 1");
  if (T < 2) throw ParameterError("gen_finite_classification: T must be >= 2");
  if (m < 2) throw ParameterError("gen_finite_classification: m must be >= 2");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw ParameterError("gen_finite_classification: temperature must be positive and finite");
  Rng rng(seed);
  SyntheticDistribution dist;
  dist.support = uniform_inputs(rng, m, d);
  dist.marginal.resize(m);
  for (int k = 0; k < m; ++k) dist.marginal(k) = rng.gamma(1.0);
  dist.marginal /= dist.marginal.sum();
  for (int t = 1; t <= T; ++t) dist.labels.push_back(scalar_label(t));
  const SmoothField score = SmoothField::random(rng, d, T, 4, 1.0);
  dist.conditional.resize(m, T);
  for (int k = 0; k < m; ++k) dist.conditional.row(k) = softmax(score(dist.support.row(k).transpose()), temperature);
  // Renormalize so rows sum to one to the last bit that floating point allows.
  for (int k = 0; k < m; ++k) dist.conditional.row(k) /= dist.conditional.row(k).sum();
  dist.task = {{"generator", "finite_classification"}, {"seed", seed}, {"d", d},
               {"T", T}, {"m", m}, {"temperature", temperature}};
  return dist;
}

Label sample_vmf(const Label& mu, double kappa, Rng& rng) {
  const auto dim = static_cast<int>(mu.size());
  if (dim < 2) throw ParameterError("sample_vmf: dimension must be >= 2");
  if (std::isinf(kappa)) return mu;
  if (!(kappa >= 0.0)) throw ParameterError("sample_vmf: kappa must be >= 0");
  const double dm1 = dim - 1.0;
  // b = (-2k + sqrt(4k^2 + (d-1)^2)) / (d-1), in cancellation-free form.
  const double b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
  double w = 0.0;
  for (;;) {
    const double g1 = rng.gamma(dm1 / 2.0), g2 = rng.gamma(dm1 / 2.0);
    const double z = g1 / (g1 + g2);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform();
    if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }
  Vector v;
  double norm = 0.0;
  do {
    v = normal_vector(rng, dim);
    v -= v.dot(mu) * mu;
    norm = v.norm();
  } while (norm < 1e-12);
  Label y = w * mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * (v / norm);
  return y / y.norm();
}

SphereRegressionTask::SphereRegressionTask(std::uint64_t seed, int dim, double kappa, int input_dim)
    : seed_(seed), dim_(dim), kappa_(kappa), input_dim_(input_dim) {
  if (dim < 2) throw ParameterError("gen_sphere_regression: d must be >= 2");
  if (input_dim < 1) throw ParameterError("gen_sphere_regression: input dimension must be >= 1");
  if (!(kappa >= 0.0)) throw ParameterError("gen_sphere_regression: kappa must be >= 0");
  Rng rng(seed);
  constexpr int kTerms = 3;
  field_ = SmoothField::random(rng, input_dim, dim, kTerms, 1.0);
  // |offset| = 3 and each amplitude column has norm 2/3, so the field stays
  // at distance >= 1 from the origin and mu is well defined everywhere.
  Vector o = normal_vector(rng, dim);
  field_.offset = 3.0 * o / o.norm();
  for (int r = 0; r < kTerms; ++r) field_.amp.col(r) *= (2.0 / 3.0) / field_.amp.col(r).norm();
}

Label SphereRegressionTask::mean(const Point& x) const {
  const Vector v = field_(x);
  return v / v.norm();
}

Dataset SphereRegressionTask::sample(Eigen::Index n, std::uint64_t seed) const {
  if (n < 1) throw ParameterError("sample: n must be >= 1");
  Dataset out;
  out.X.resize(n, input_dim_);
  out.Y.resize(static_cast<std::size_t>(n));
  for_chunks(n, seed, [&](Eigen::Index first, Eigen::Index last, Rng& rng) {
    for (Eigen::Index i = first; i < last; ++i) {
      for (int j = 0; j < input_dim_; ++j) out.X(i, j) = rng.uniform(-1.0, 1.0);
      out.Y[static_cast<std::size_t>(i)] = sample_vmf(mean(out.X.row(i).transpose()), kappa_, rng);
    }
  });
  out.task = describe();
  out.task["sample_seed"] = seed;
  return out;
}

nlohmann::json SphereRegressionTask::describe() const {
  nlohmann::json k = std::isinf(kappa_) ? nlohmann::json("inf") : nlohmann::json(kappa_);
  return {{"generator", "sphere_regression"}, {"seed", seed_}, {"d", dim_}, {"kappa", k}, {"input_dim", input_dim_}};
}

SphereRegressionTask gen_sphere_regression(std::uint64_t seed, int dim, double kappa, int input_dim) {
  return SphereRegressionTask(seed, dim, kappa, input_dim);
}

HistogramTask::HistogramTask(std::uint64_t seed, int bins, int input_dim, double concentration)
    : seed_(seed), bins_(bins), input_dim_(input_dim), concentration_(concentration) {
  if (bins < 2) throw ParameterError("gen_histogram_task: bins must be >= 2");
  if (input_dim < 1) throw ParameterError("gen_histogram_task: input dimension must be >= 1");
  if (!(concentration > 0.0)) throw ParameterError("gen_histogram_task: concentration must be positive");
  Rng rng(seed);
  field_ = SmoothField::random(rng, input_dim, bins, 3, 1.0);
}

Vector HistogramTask::mean(const Point& x) const { return softmax(field_(x), 1.0); }

Dataset HistogramTask::sample(Eigen::Index n, std::uint64_t seed) const {
  if (n < 1) throw ParameterError("sample: n must be >= 1");
  Dataset out;
  out.X.resize(n, input_dim_);
  out.Y.resize(static_cast<std::size_t>(n));
  for_chunks(n, seed, [&](Eigen::Index first, Eigen::Index last, Rng& rng) {
    for (Eigen::Index i = first; i < last; ++i) {
      for (int j = 0; j < input_dim_; ++j) out.X(i, j) = rng.uniform(-1.0, 1.0);
      const Vector p = mean(out.X.row(i).transpose());
      Label y(bins_);
      for (int b = 0; b < bins_; ++b) y(b) = rng.gamma(concentration_ * p(b));
      const double s = y.sum();
      // All-zero draws need every shape tiny; fall back to the mean.
      out.Y[static_cast<std::size_t>(i)] = s > 0.0 ? Label(y / s) : Label(p);
    }
  });
  out.task = describe();
  out.task["sample_seed"] = seed;
  return out;
}

nlohmann::json HistogramTask::describe() const {
  return {{"generator", "histogram"}, {"seed", seed_}, {"bins", bins_},
          {"input_dim", input_dim_}, {"concentration", concentration_}};
}

HistogramTask gen_histogram_task(std::uint64_t seed, int bins, int input_dim, double concentration) {
  return HistogramTask(seed, bins, input_dim, concentration);
}

void save_dataset(const Dataset& data, const std::string& prefix) {
  if (static_cast<std::size_t>(data.X.rows()) != data.Y.size())
    throw InputError("save_dataset: input and label counts differ");
  CsvTable t;
  for (Eigen::Index j = 0; j < data.X.cols(); ++j) t.header.push_back("x" + std::to_string(j + 1));
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) row.push_back(format_double(data.X(i, j)));
    t.rows.push_back(std::move(row));
  }
  std::ostringstream csv;
  write_csv(csv, t);
  const nlohmann::json meta = {{"format", "ile.dataset"},
                               {"schema_version", kSchemaVersion},
                               {"n", data.X.rows()},
                               {"input_dim", data.X.cols()},
                               {"task", data.task},
                               {"labels", labels_to_json(data.Y)}};
  write_file_atomic(prefix + ".csv", csv.str());
  write_file_atomic(prefix + ".json", meta.dump(1) + "\n");
}

Dataset load_dataset(const std::string& prefix) {
  const CsvTable t = read_csv_file(prefix + ".csv");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text_file(prefix + ".json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(prefix + ".json: " + e.what());
  }
  if (meta.value("format", "") != "ile.dataset") throw InputError(prefix + ".json: not an ile.dataset record");
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != t.header.size())
      throw InputError(prefix + ".csv: row " + std::to_string(i + 2) + " has the wrong number of fields");
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      try {
        d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::stod(t.rows[i][j]);
      } catch (const std::exception&) {
        throw InputError(prefix + ".csv: row " + std::to_string(i + 2) + ": '" + t.rows[i][j] + "' is not a number");
      }
    }
  }
  d.Y = labels_from_json(meta.at("labels"));
  d.task = meta.value("task", nlohmann::json::object());
  if (d.Y.size() != t.rows.size())
    throw InputError(prefix + ": " + std::to_string(t.rows.size()) + " input rows but " +
                     std::to_string(d.Y.size()) + " labels");
  return d;
}

}  // namespace ile
