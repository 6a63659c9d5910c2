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


#ifndef ILE_DECODER_HPP
#define ILE_DECODER_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ile/common.hpp"
#include "ile/losses.hpp"

namespace ile {

/// F(z) = sum_i alpha_i loss(z, y_i). Holds references; the labels and the
/// loss must outlive the problem.
struct DecodeProblem {
  DecodeProblem(Vector a, const LabelList& y, const LossSpec& l);

  Vector alpha;
  const LabelList* labels;
  const LossSpec* loss;

  Eigen::Index size() const { return alpha.size(); }
};

/// Throws InputError when z lies outside the loss's output space.
double objective(const DecodeProblem& p, const Label& z);
/// Same sum without the domain check; used inside solvers.
double objective_unchecked(const DecodeProblem& p, const Label& z);
/// sum_i alpha_i d/dz loss(z, y_i). Needs a subgradient.
Vector objective_gradient(const DecodeProblem& p, const Label& z);

struct DecodeResult {
  Label z;
  double objective = 0.0;
  int index = -1;        // candidate index for exhaustive search
  int iterations = 0;
  std::vector<double> trace;  // objective per iteration when requested
};

/// Minimum over the candidates; ties go to the lowest index. Candidates whose
/// objective is within `tie_tolerance` of the minimum count as tied.
DecodeResult decode_exhaustive(const DecodeProblem& p, const LabelList& candidates, double tie_tolerance = 0.0);

enum class StepSchedule { InvSqrt, Inv };
enum class SgdReturn { Best, Average };

struct SgdOptions {
  std::optional<Label> init;  // default: best training label
  int steps = 2000;
  double step0 = 0.1;
  StepSchedule schedule = StepSchedule::InvSqrt;
  SgdReturn output = SgdReturn::Best;
  /// Further runs from uniform draws of a bounded output space; the run
  /// with the lowest final objective wins.
  int extra_starts = 8;
  std::uint64_t seed = 0;
  bool record_trace = false;
};

/// Projected stochastic subgradient descent. Index i is drawn with
/// probability |alpha_i| / a, a = sum |alpha_j|, and the step direction is
/// sign(alpha_i) a dloss(z, y_i), an unbiased estimate of the gradient of F.
/// Average mode returns the mean of the second half of the iterates.
/// Each start runs on its own stream: the first on `seed`, start s on
/// derive_seed(seed, {s}).
DecodeResult decode_sgd(const DecodeProblem& p, const SgdOptions& opts = {});

/// The stochastic direction for a fixed sampled index (exposed for tests).
Vector sgd_direction(const DecodeProblem& p, const Label& z, Eigen::Index i);

struct SphereOptions {
  std::optional<Label> init;  // default: multi-start
  int iterations = 200;
  double step = 1.0;          // trial step is step / (2 sum|alpha|)
  double tolerance = 1e-10;   // on the Riemannian gradient norm
  int extra_starts = 8;       // directions added to the training labels
  int label_starts = 8;       // training labels with the lowest objective; < 0 keeps all
  std::uint64_t seed = 0;
  bool record_trace = false;
};

/// Riemannian gradient descent with backtracking on the unit sphere. With no
/// init it runs from the `label_starts` best training labels and
/// `extra_starts` more directions (equispaced on the circle, random
/// otherwise) and keeps the best.
DecodeResult decode_sphere(const DecodeProblem& p, const SphereOptions& opts = {});

struct SimplexOptions {
  std::optional<Label> init;  // default: uniform histogram
  int iterations = 2000;
  double step = 1.0;
  double tolerance = 1e-14;   // stop once the trial step falls below it
  bool record_trace = false;
};

/// Exponentiated gradient (mirror descent with the entropy) with an adaptive
/// step: grow after an accepted step, halve after a rejected one.
DecodeResult decode_simplex(const DecodeProblem& p, const SimplexOptions& opts = {});

enum class DecoderKind { Auto, Exhaustive, Sgd, Sphere, Simplex };
std::string to_string(DecoderKind k);
DecoderKind decoder_kind_from_string(const std::string& s);

struct DecoderConfig {
  DecoderKind kind = DecoderKind::Auto;
  /// Explicit candidates for exhaustive search; default is the output list
  /// of a finite space, else the training labels.
  std::optional<LabelList> candidates;
  /// Ties within tie_tolerance * sum|alpha| * max|loss| of the minimum.
  double tie_tolerance = 1e-11;
  SgdOptions sgd;
  SphereOptions sphere;
  SimplexOptions simplex;
};

void to_json(nlohmann::json& j, const DecoderConfig& c);
void from_json(const nlohmann::json& j, DecoderConfig& c);

/// Resolves Auto against the loss: finite outputs -> exhaustive, sphere ->
/// Riemannian descent, simplex with a subgradient -> exponentiated gradient,
/// box with a subgradient -> SGD, anything else -> exhaustive over the
/// training labels.
DecoderKind resolve_decoder(const DecoderConfig& c, const LossSpec& loss);

struct Decoded {
  DecodeResult result;
  DecoderKind kind = DecoderKind::Exhaustive;
  bool label_fallback = false;  // exhaustive search over training labels only
};

/// Runs the configured decoder. `seed` replaces the SGD / sphere seeds so
/// batch callers can derive one per test point.
Decoded decode(const DecodeProblem& p, const DecoderConfig& c, std::uint64_t seed = 0);

/// One row per iteration: point, iteration, objective.
void write_trace_csv(std::ostream& os, const std::vector<std::pair<std::size_t, std::vector<double>>>& traces);

}  // namespace ile

#endif  // ILE_DECODER_HPP
