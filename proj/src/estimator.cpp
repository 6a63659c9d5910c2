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


#include "ile/estimator.hpp"

#include <cmath>
#include <exception>

#include "ile/io.hpp"
#include "ile/json_util.hpp"
#include "ile/rng.hpp"

namespace ile {

void to_json(nlohmann::json& j, const PredictorConfig& c) {
  j = {{"kernel", c.kernel}, {"decoder", c.decoder}, {"seed", c.seed}};
  if (c.algorithm) j["algorithm"] = *c.algorithm;
}

void from_json(const nlohmann::json& j, PredictorConfig& c) {
  c = PredictorConfig{};
  if (j.contains("kernel")) c.kernel = j.at("kernel").get<KernelSpec>();
  if (j.contains("algorithm")) c.algorithm = j.at("algorithm").get<WeightAlgorithm>();
  if (j.contains("decoder")) c.decoder = j.at("decoder").get<DecoderConfig>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
}

WeightAlgorithm default_algorithm(Eigen::Index n) { return Ridge{1.0 / std::sqrt(static_cast<double>(n))}; }

StructuredPredictor fit(const PredictorConfig& config, const LossSpec& loss, const Matrix& X, const LabelList& Y) {
  if (X.rows() < 1) throw InputError("fit: empty training set");
  if (static_cast<std::size_t>(X.rows()) != Y.size())
    throw InputError("fit: " + std::to_string(X.rows()) + " inputs but " + std::to_string(Y.size()) + " labels");
  for (std::size_t i = 0; i < Y.size(); ++i)
    if (!loss.label_space.contains(Y[i]))
      throw InputError("fit: label " + std::to_string(i) + " (" + format_label(Y[i]) + ") is outside " +
                       loss.label_space.describe());
  StructuredPredictor p;
  p.weights_ = fit_weights(X, config.kernel, config.algorithm ? *config.algorithm : default_algorithm(X.rows()));
  p.labels_ = std::make_shared<const LabelList>(Y);
  p.loss_ = std::make_shared<const LossSpec>(loss);
  p.decoder_ = config.decoder;
  p.seed_ = config.seed;
  return p;
}

Prediction StructuredPredictor::predict_full(const Point& x, std::uint64_t index) const {
  const DecodeProblem problem(weights_.alpha(x), *labels_, *loss_);
  const Decoded d = decode(problem, decoder_, derive_seed(seed_, {index}));
  return {d.result.z, d.result.objective, d.kind, d.label_fallback};
}

std::vector<Prediction> StructuredPredictor::predict_batch_full(const Matrix& X, Exec exec) const {
  const Eigen::Index m = X.rows();
  std::vector<Prediction> out(static_cast<std::size_t>(m));
  std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
  for (Eigen::Index j = 0; j < m; ++j) {
    try {
      out[static_cast<std::size_t>(j)] = predict_full(X.row(j).transpose(), static_cast<std::uint64_t>(j));
    } catch (...) {
#pragma omp critical(ile_predict_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

LabelList StructuredPredictor::predict_batch(const Matrix& X, Exec exec) const {
  LabelList out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  for (auto& p : predict_batch_full(X, exec)) out.push_back(std::move(p.z));
  return out;
}

namespace {

Eigen::Index table_index(const LabelList& list, const Label& y) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if (same_label(list[i], y)) return static_cast<Eigen::Index>(i);
  return -1;
}

Vector surrogate_from_alpha(const Vector& a, const LabelList& labels, const FiniteEmbedding& fe) {
  Vector g = Vector::Zero(fe.phi.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Eigen::Index j = table_index(fe.labels, labels[i]);
    if (j < 0) throw InputError("predict_explicit_finite: training label " + format_label(labels[i]) +
                                " is missing from the embedding table");
    g += a(static_cast<Eigen::Index>(i)) * fe.phi.row(j).transpose();
  }
  return g;
}

}  // namespace

Vector StructuredPredictor::surrogate(const Point& x, const FiniteEmbedding& fe) const {
  return surrogate_from_alpha(weights_.alpha(x), *labels_, fe);
}

Label StructuredPredictor::predict_explicit_finite(const Point& x, const FiniteEmbedding& fe) const {
  const LabelList& Z = decoder_.candidates ? *decoder_.candidates
                       : loss_->output_space.is_finite() ? loss_->output_space.elements()
                                                         : throw CapabilityError(
                                                               "predict_explicit_finite: output space is not finite");
  if (Z.size() != fe.outputs.size())
    throw InputError("predict_explicit_finite: embedding outputs do not match the candidate list");
  for (std::size_t c = 0; c < Z.size(); ++c)
    if (!same_label(Z[c], fe.outputs[c]))
      throw InputError("predict_explicit_finite: embedding outputs do not match the candidate list");

  const Vector a = weights_.alpha(x);
  const Vector g = surrogate_from_alpha(a, *labels_, fe);
  const Vector scores = fe.psi * g;
  // Tie window identical to the implicit path: relative to sum|alpha| times
  // the largest loss between a candidate and a training label.
  double max_loss = 0.0;
  if (decoder_.tie_tolerance > 0.0)
    for (const auto& y : *labels_) {
      const Eigen::Index j = table_index(fe.labels, y);
      max_loss = std::max(max_loss, fe.V.col(j).cwiseAbs().maxCoeff());
    }
  const double tol = decoder_.tie_tolerance * a.cwiseAbs().sum() * max_loss;
  const double best = scores.minCoeff();
  for (Eigen::Index c = 0; c < scores.size(); ++c)
    if (scores(c) <= best + tol) return Z[static_cast<std::size_t>(c)];
  throw NumericError("predict_explicit_finite: scores contain NaN");
}

double empirical_risk(const LabelList& predictions, const LabelList& Y, const LossSpec& loss) {
  if (Y.empty()) throw InputError("empirical_risk: empty test set");
  if (predictions.size() != Y.size()) throw InputError("empirical_risk: prediction and label counts differ");
  double s = 0.0;
  for (std::size_t j = 0; j < Y.size(); ++j) s += loss(predictions[j], Y[j]);
  return s / static_cast<double>(Y.size());
}

double StructuredPredictor::empirical_risk(const Matrix& X, const LabelList& Y, const LossSpec* loss,
                                           Exec exec) const {
  if (static_cast<std::size_t>(X.rows()) != Y.size()) throw InputError("empirical_risk: input and label counts differ");
  return ile::empirical_risk(predict_batch(X, exec), Y, loss ? *loss : *loss_);
}

nlohmann::json StructuredPredictor::to_json() const {
  return {{"format", "ile.predictor"},
          {"schema_version", kSchemaVersion},
          {"weights", weights_.to_json()},
          {"labels", labels_to_json(*labels_)},
          {"loss", loss_->config()},
          {"decoder", decoder_},
          {"seed", seed_}};
}

StructuredPredictor StructuredPredictor::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "ile.predictor") throw InputError("predictor record: wrong format tag");
  if (j.value("schema_version", 0) != kSchemaVersion)
    throw InputError("predictor record: unsupported schema_version " + std::to_string(j.value("schema_version", 0)));
  StructuredPredictor p;
  p.weights_ = WeightModel::from_json(j.at("weights"));
  p.labels_ = std::make_shared<const LabelList>(labels_from_json(j.at("labels")));
  p.loss_ = std::make_shared<const LossSpec>(make_loss(j.at("loss")));
  p.decoder_ = j.at("decoder").get<DecoderConfig>();
  p.seed_ = j.at("seed").get<std::uint64_t>();
  if (static_cast<Eigen::Index>(p.labels_->size()) != p.weights_.n())
    throw InputError("predictor record: label count does not match the weight model");
  return p;
}

}  // namespace ile
