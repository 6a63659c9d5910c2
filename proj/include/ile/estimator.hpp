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


#ifndef ILE_ESTIMATOR_HPP
#define ILE_ESTIMATOR_HPP

#include <cstdint>
#include <memory>
#include <optional>

#include <json.hpp>

#include "ile/decoder.hpp"
#include "ile/kernels.hpp"
#include "ile/losses.hpp"
#include "ile/parallel.hpp"
#include "ile/weights.hpp"

namespace ile {

struct PredictorConfig {
  KernelSpec kernel = KernelSpec::gaussian(1.0);
  /// Unset means ridge with lambda = n^{-1/2}.
  std::optional<WeightAlgorithm> algorithm;
  DecoderConfig decoder;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const PredictorConfig& c);
void from_json(const nlohmann::json& j, PredictorConfig& c);

struct Prediction {
  Label z;
  double objective = 0.0;
  DecoderKind decoder = DecoderKind::Exhaustive;
  bool label_fallback = false;
};

/// f(x) = argmin_z sum_i alpha_i(x) loss(z, y_i). Immutable after fit.
class StructuredPredictor {
 public:
  const WeightModel& weights() const { return weights_; }
  const LabelList& labels() const { return *labels_; }
  const LossSpec& loss() const { return *loss_; }
  const DecoderConfig& decoder() const { return decoder_; }
  std::uint64_t seed() const { return seed_; }

  /// `index` selects the per-point seed derive_seed(seed, {index}), so that
  /// predict(x_j, j) equals row j of predict_batch.
  Prediction predict_full(const Point& x, std::uint64_t index = 0) const;
  Label predict(const Point& x, std::uint64_t index = 0) const { return predict_full(x, index).z; }
  std::vector<Prediction> predict_batch_full(const Matrix& X, Exec exec = Exec::Parallel) const;
  LabelList predict_batch(const Matrix& X, Exec exec = Exec::Parallel) const;

  /// Decodes through an explicit table: g(x) = sum_i alpha_i phi(y_i), then
  /// argmin_z <psi(z), g(x)> over the table's outputs with the same tie rule
  /// as predict. The table's outputs must equal the finite output list.
  Label predict_explicit_finite(const Point& x, const FiniteEmbedding& fe) const;
  /// g(x) in the table's label coordinates.
  Vector surrogate(const Point& x, const FiniteEmbedding& fe) const;

  /// (1/m) sum_j loss(f(x_j), y_j); uses `loss` if given, else the fitted loss.
  double empirical_risk(const Matrix& X, const LabelList& Y, const LossSpec* loss = nullptr,
                        Exec exec = Exec::Parallel) const;

  nlohmann::json to_json() const;
  static StructuredPredictor from_json(const nlohmann::json& j);

 private:
  friend StructuredPredictor fit(const PredictorConfig&, const LossSpec&, const Matrix&, const LabelList&);

  WeightModel weights_;
  std::shared_ptr<const LabelList> labels_;
  std::shared_ptr<const LossSpec> loss_;
  DecoderConfig decoder_;
  std::uint64_t seed_ = 0;
};

/// Ridge with lambda = n^{-1/2}.
WeightAlgorithm default_algorithm(Eigen::Index n);

StructuredPredictor fit(const PredictorConfig& config, const LossSpec& loss, const Matrix& X, const LabelList& Y);

/// (1/m) sum_j loss(predictions_j, y_j).
double empirical_risk(const LabelList& predictions, const LabelList& Y, const LossSpec& loss);

}  // namespace ile

#endif  // ILE_ESTIMATOR_HPP
