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


#include "ile/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "ile/io.hpp"
#include "ile/json_util.hpp"
#include "ile/rng.hpp"

namespace ile {

DecodeProblem::DecodeProblem(Vector a, const LabelList& y, const LossSpec& l)
    : alpha(std::move(a)), labels(&y), loss(&l) {
  if (alpha.size() < 1) throw InputError("decode: need at least one training label");
  if (static_cast<std::size_t>(alpha.size()) != y.size())
    throw InputError("decode: " + std::to_string(alpha.size()) + " weights for " + std::to_string(y.size()) +
                     " labels");
  if (!alpha.allFinite()) throw NumericError("decode: weights contain NaN or infinity");
}

double objective_unchecked(const DecodeProblem& p, const Label& z) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p.alpha(i) == 0.0) continue;
    s += p.alpha(i) * (*p.loss)(z, (*p.labels)[static_cast<std::size_t>(i)]);
  }
  return s;
}

double objective(const DecodeProblem& p, const Label& z) {
  if (!p.loss->output_space.contains(z))
    throw InputError("objective: candidate " + format_label(z) + " is outside " + p.loss->output_space.describe());
  return objective_unchecked(p, z);
}

Vector objective_gradient(const DecodeProblem& p, const Label& z) {
  if (!p.loss->has_subgradient()) throw CapabilityError("loss '" + p.loss->id + "' has no subgradient");
  Vector g = Vector::Zero(z.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p.alpha(i) == 0.0) continue;
    g += p.alpha(i) * p.loss->subgradient(z, (*p.labels)[static_cast<std::size_t>(i)]);
  }
  return g;
}

DecodeResult decode_exhaustive(const DecodeProblem& p, const LabelList& candidates, double tie_tolerance) {
  if (candidates.empty()) throw InputError("decode_exhaustive: empty candidate list");
  std::vector<double> values(candidates.size());
  double best = INFINITY;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    values[c] = objective(p, candidates[c]);
    if (std::isnan(values[c])) throw NumericError("decode_exhaustive: objective is NaN");
    best = std::min(best, values[c]);
  }
  DecodeResult r;
  for (std::size_t c = 0; c < candidates.size(); ++c)
    if (values[c] <= best + tie_tolerance) {
      r.index = static_cast<int>(c);
      break;
    }
  r.z = candidates[static_cast<std::size_t>(r.index)];
  r.objective = values[static_cast<std::size_t>(r.index)];
  return r;
}

namespace {

double abs_mass(const DecodeProblem& p) { return p.alpha.cwiseAbs().sum(); }

Label best_label(const DecodeProblem& p) {
  const LabelList& y = *p.labels;
  std::size_t arg = 0;
  double best = INFINITY;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = objective_unchecked(p, y[i]);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  return y[arg];
}

}  // namespace

Vector sgd_direction(const DecodeProblem& p, const Label& z, Eigen::Index i) {
  const double a = abs_mass(p);
  const double s = p.alpha(i) > 0 ? 1.0 : (p.alpha(i) < 0 ? -1.0 : 0.0);
  return s * a * p.loss->subgradient(z, (*p.labels)[static_cast<std::size_t>(i)]);
}

namespace {

DecodeResult sgd_run(const DecodeProblem& p, const Label& init, const SgdOptions& opts, std::uint64_t seed,
                     const std::vector<double>& prob) {
  const Space& space = p.loss->output_space;
  Rng rng(seed);
  Label z = space.project(init);
  DecodeResult r;
  r.z = z;
  r.objective = objective_unchecked(p, z);
  Vector sum = Vector::Zero(z.size());
  double weight = 0.0;
  for (int k = 1; k <= opts.steps; ++k) {
    const auto i = static_cast<Eigen::Index>(rng.categorical(prob));
    const double gamma =
        opts.step0 / (opts.schedule == StepSchedule::InvSqrt ? std::sqrt(static_cast<double>(k)) : k);
    z = space.project(z - gamma * sgd_direction(p, z, i));
    if (!z.allFinite()) throw NumericError("decode_sgd: iterate is not finite");
    if (opts.output == SgdReturn::Average) {
      // Uniform average over the second half of the run.
      if (2 * k > opts.steps) {
        sum += z;
        weight += 1.0;
      }
      if (opts.record_trace)
        r.trace.push_back(objective_unchecked(p, weight > 0 ? space.project(sum / weight) : z));
    } else {
      const double f = objective_unchecked(p, z);
      if (f < r.objective) {
        r.objective = f;
        r.z = z;
      }
      if (opts.record_trace) r.trace.push_back(r.objective);
    }
  }
  if (opts.output == SgdReturn::Average) {
    r.z = space.project(sum / weight);
    r.objective = objective_unchecked(p, r.z);
  }
  r.iterations = opts.steps;
  return r;
}

}  // namespace

DecodeResult decode_sgd(const DecodeProblem& p, const SgdOptions& opts) {
  if (!p.loss->has_subgradient()) throw CapabilityError("decode_sgd: loss '" + p.loss->id + "' has no subgradient");
  if (p.loss->output_space.is_finite())
    throw CapabilityError("decode_sgd: finite output space has no projection; use exhaustive decoding");
  if (opts.steps < 1) throw ParameterError("decode_sgd: steps must be >= 1");
  if (!(opts.step0 > 0)) throw ParameterError("decode_sgd: step0 must be positive");
  if (opts.extra_starts < 0) throw ParameterError("decode_sgd: extra_starts must be >= 0");
  const double a = abs_mass(p);
  if (!(a > 0.0)) throw NumericError("decode_sgd: degenerate weights, sum |alpha| = 0");
  const Space& space = p.loss->output_space;

  std::vector<double> prob(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) prob[static_cast<std::size_t>(i)] = std::abs(p.alpha(i));

  LabelList starts{opts.init ? *opts.init : best_label(p)};
  if (opts.extra_starts > 0 && space.is_bounded()) {
    Rng rng(derive_seed(opts.seed, {0}));
    for (auto& s : space.sample(static_cast<std::size_t>(opts.extra_starts), rng)) starts.push_back(std::move(s));
  }
  DecodeResult best;
  int total = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    DecodeResult r = sgd_run(p, starts[s], opts, s == 0 ? opts.seed : derive_seed(opts.seed, {s}), prob);
    total += r.iterations;
    if (s == 0 || r.objective < best.objective) best = std::move(r);
  }
  best.iterations = total;
  return best;
}

namespace {

Vector tangent_gradient(const DecodeProblem& p, const Label& z) {
  Vector g = objective_gradient(p, z);
  return g - g.dot(z) * z;
}

Label retract(const Label& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("decode_sphere: iterate collapsed to zero");
  return v / n;
}

DecodeResult sphere_descent(const DecodeProblem& p, const Label& init, const SphereOptions& opts) {
  DecodeResult r;
  // theta^2 has second derivative 2 along geodesics, so step / (2 sum|alpha|)
  // is the Newton step for the squared geodesic loss.
  const double t0 = opts.step / (2.0 * abs_mass(p));
  Label z = retract(init);
  double f = objective_unchecked(p, z);
  const double scale = std::max(std::abs(f), abs_mass(p));
  int it = 0;
  for (; it < opts.iterations; ++it) {
    const Vector g = tangent_gradient(p, z);
    const double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) <= opts.tolerance) break;
    double t = t0;
    bool moved = false;
    bool stalled = false;
    while (t > 1e-16) {
      const Label cand = retract(z - t * g);
      const double fc = objective_unchecked(p, cand);
      if (fc <= f - 1e-4 * t * gn2) {
        // Minimizers can sit on the kink at the antipode of a negatively
        // weighted label, where the gradient never vanishes.
        stalled = f - fc <= 1e-14 * scale;
        z = cand;
        f = fc;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (opts.record_trace) r.trace.push_back(f);
    if (!moved || stalled) break;
  }
  r.z = z;
  r.objective = f;
  r.iterations = it;
  return r;
}

}  // namespace

DecodeResult decode_sphere(const DecodeProblem& p, const SphereOptions& opts) {
  const Space& space = p.loss->output_space;
  if (!space.is<Sphere>()) throw CapabilityError("decode_sphere: output space is " + space.describe());
  if (!p.loss->has_subgradient()) throw CapabilityError("decode_sphere: loss '" + p.loss->id + "' has no subgradient");
  if (opts.iterations < 0) throw ParameterError("decode_sphere: iterations must be >= 0");
  if (!(opts.step > 0)) throw ParameterError("decode_sphere: step must be positive");
  const int d = space.as<Sphere>().dim;

  if (p.alpha.cwiseAbs().maxCoeff() == 0.0) {
    DecodeResult r;
    r.z = opts.init ? *opts.init : (*p.labels)[0];
    r.objective = 0.0;
    return r;
  }
  if (opts.init) {
    if (opts.init->size() != d) throw InputError("decode_sphere: init has the wrong dimension");
    DecodeResult r = sphere_descent(p, *opts.init, opts);
    r.z = retract(r.z);
    return r;
  }

  LabelList starts = *p.labels;
  if (opts.label_starts >= 0 && starts.size() > static_cast<std::size_t>(opts.label_starts)) {
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
      if (starts[i].size() != d) throw InputError("decode_sphere: label has the wrong dimension");
      ranked.emplace_back(objective_unchecked(p, starts[i]), i);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    LabelList kept;
    for (int k = 0; k < opts.label_starts; ++k) kept.push_back(starts[ranked[static_cast<std::size_t>(k)].second]);
    starts = std::move(kept);
  }
  if (d == 2) {
    for (int k = 0; k < opts.extra_starts; ++k) {
      const double a = 2.0 * std::numbers::pi * k / opts.extra_starts;
      Label s(2);
      s << std::cos(a), std::sin(a);
      starts.push_back(s);
    }
  } else {
    Rng rng(opts.seed);
    for (const auto& s : space.sample(static_cast<std::size_t>(std::max(opts.extra_starts, 0)), rng)) starts.push_back(s);
  }
  DecodeResult best;
  best.objective = INFINITY;
  for (const auto& s : starts) {
    if (s.size() != d) throw InputError("decode_sphere: label has the wrong dimension");
    DecodeResult r = sphere_descent(p, s, opts);
    if (r.objective < best.objective) best = std::move(r);
  }
  best.z = retract(best.z);
  return best;
}

DecodeResult decode_simplex(const DecodeProblem& p, const SimplexOptions& opts) {
  const Space& space = p.loss->output_space;
  if (!space.is<Simplex>()) throw CapabilityError("decode_simplex: output space is " + space.describe());
  if (!p.loss->has_subgradient()) throw CapabilityError("decode_simplex: loss '" + p.loss->id + "' has no subgradient");
  if (opts.iterations < 0) throw ParameterError("decode_simplex: iterations must be >= 0");
  if (!(opts.step > 0)) throw ParameterError("decode_simplex: step must be positive");
  const int bins = space.as<Simplex>().bins;

  Label z = opts.init ? *opts.init : Label(Vector::Constant(bins, 1.0 / bins));
  if (z.size() != bins) throw InputError("decode_simplex: init has the wrong dimension");
  if ((z.array() < 0).any() || !z.allFinite()) throw NumericError("decode_simplex: init has negative or NaN mass");
  if (p.alpha.cwiseAbs().maxCoeff() == 0.0) {
    DecodeResult r;
    r.z = z;
    return r;
  }
  z /= z.sum();
  // Exponentiated gradient cannot leave a zero coordinate; start strictly inside.
  z = z.cwiseMax(1e-300);
  z /= z.sum();

  DecodeResult r;
  double f = objective_unchecked(p, z);
  double eta = opts.step;
  int it = 0;
  for (; it < opts.iterations && eta > opts.tolerance; ++it) {
    const Vector g = objective_gradient(p, z);
    // Shift by the max so the largest factor is exp(0); clip the rest.
    const double gmin = g.minCoeff();
    Label cand(bins);
    for (int j = 0; j < bins; ++j) cand(j) = z(j) * std::exp(std::max(-eta * (g(j) - gmin), -700.0));
    cand = cand.cwiseMax(1e-300);
    cand /= cand.sum();
    if (!cand.allFinite()) throw NumericError("decode_simplex: iterate has NaN mass");
    const double fc = objective_unchecked(p, cand);
    if (fc <= f) {
      z = cand;
      f = fc;
      eta = std::min(1.5 * eta, 1e3 * opts.step);
    } else {
      eta *= 0.5;
    }
    if (opts.record_trace) r.trace.push_back(f);
  }
  r.z = z / z.sum();
  r.objective = objective_unchecked(p, r.z);
  r.iterations = it;
  return r;
}

std::string to_string(DecoderKind k) {
  switch (k) {
    case DecoderKind::Auto: return "auto";
    case DecoderKind::Exhaustive: return "exhaustive";
    case DecoderKind::Sgd: return "sgd";
    case DecoderKind::Sphere: return "sphere";
    case DecoderKind::Simplex: return "simplex";
  }
  return "auto";
}

DecoderKind decoder_kind_from_string(const std::string& s) {
  for (auto k : {DecoderKind::Auto, DecoderKind::Exhaustive, DecoderKind::Sgd, DecoderKind::Sphere,
                 DecoderKind::Simplex})
    if (to_string(k) == s) return k;
  throw ParameterError("unknown decoder '" + s + "'");
}

void to_json(nlohmann::json& j, const DecoderConfig& c) {
  j = {{"kind", to_string(c.kind)},
       {"tie_tolerance", c.tie_tolerance},
       {"sgd",
        {{"steps", c.sgd.steps},
         {"step0", c.sgd.step0},
         {"schedule", c.sgd.schedule == StepSchedule::InvSqrt ? "inv_sqrt" : "inv"},
         {"output", c.sgd.output == SgdReturn::Best ? "best" : "average"},
         {"extra_starts", c.sgd.extra_starts}}},
       {"sphere", {{"iterations", c.sphere.iterations}, {"step", c.sphere.step}, {"extra_starts", c.sphere.extra_starts},
                   {"label_starts", c.sphere.label_starts}}},
       {"simplex", {{"iterations", c.simplex.iterations}, {"step", c.simplex.step}}}};
  if (c.candidates) j["candidates"] = labels_to_json(*c.candidates);
}

void from_json(const nlohmann::json& j, DecoderConfig& c) {
  c = DecoderConfig{};
  if (j.contains("kind")) c.kind = decoder_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("tie_tolerance")) c.tie_tolerance = j.at("tie_tolerance").get<double>();
  if (!(c.tie_tolerance >= 0)) throw ParameterError("decoder: tie_tolerance must be >= 0");
  if (j.contains("candidates")) c.candidates = labels_from_json(j.at("candidates"));
  if (j.contains("sgd")) {
    const auto& s = j.at("sgd");
    c.sgd.steps = s.value("steps", c.sgd.steps);
    c.sgd.step0 = s.value("step0", c.sgd.step0);
    const auto sched = s.value("schedule", std::string("inv_sqrt"));
    if (sched != "inv_sqrt" && sched != "inv") throw ParameterError("decoder.sgd.schedule must be inv_sqrt or inv");
    c.sgd.schedule = sched == "inv" ? StepSchedule::Inv : StepSchedule::InvSqrt;
    const auto out = s.value("output", std::string("best"));
    if (out != "best" && out != "average") throw ParameterError("decoder.sgd.output must be best or average");
    c.sgd.output = out == "average" ? SgdReturn::Average : SgdReturn::Best;
    c.sgd.extra_starts = s.value("extra_starts", c.sgd.extra_starts);
  }
  if (j.contains("sphere")) {
    const auto& s = j.at("sphere");
    c.sphere.iterations = s.value("iterations", c.sphere.iterations);
    c.sphere.step = s.value("step", c.sphere.step);
    c.sphere.extra_starts = s.value("extra_starts", c.sphere.extra_starts);
    c.sphere.label_starts = s.value("label_starts", c.sphere.label_starts);
  }
  if (j.contains("simplex")) {
    const auto& s = j.at("simplex");
    c.simplex.iterations = s.value("iterations", c.simplex.iterations);
    c.simplex.step = s.value("step", c.simplex.step);
  }
}

DecoderKind resolve_decoder(const DecoderConfig& c, const LossSpec& loss) {
  if (c.kind != DecoderKind::Auto) return c.kind;
  const Space& z = loss.output_space;
  if (c.candidates || z.is_finite()) return DecoderKind::Exhaustive;
  if (z.is<Sphere>() && loss.has_subgradient()) return DecoderKind::Sphere;
  if (z.is<Simplex>() && loss.has_subgradient()) return DecoderKind::Simplex;
  if (z.is_bounded() && loss.has_subgradient()) return DecoderKind::Sgd;
  return DecoderKind::Exhaustive;
}

Decoded decode(const DecodeProblem& p, const DecoderConfig& c, std::uint64_t seed) {
  Decoded out;
  out.kind = resolve_decoder(c, *p.loss);
  switch (out.kind) {
    case DecoderKind::Exhaustive: {
      const LabelList* cands = nullptr;
      LabelList owned;
      if (c.candidates) {
        cands = &*c.candidates;
      } else if (p.loss->output_space.is_finite()) {
        owned = p.loss->output_space.elements();
        cands = &owned;
      } else {
        cands = p.labels;
        out.label_fallback = true;
      }
      // Scale the tie window by the size of the objective.
      double max_loss = 0.0;
      if (c.tie_tolerance > 0.0)
        for (const auto& z : *cands)
          for (std::size_t i = 0; i < p.labels->size(); ++i)
            max_loss = std::max(max_loss, std::abs((*p.loss)(z, (*p.labels)[i])));
      out.result = decode_exhaustive(p, *cands, c.tie_tolerance * abs_mass(p) * max_loss);
      break;
    }
    case DecoderKind::Sgd: {
      SgdOptions o = c.sgd;
      o.seed = seed;
      out.result = decode_sgd(p, o);
      break;
    }
    case DecoderKind::Sphere: {
      SphereOptions o = c.sphere;
      o.seed = seed;
      out.result = decode_sphere(p, o);
      break;
    }
    case DecoderKind::Simplex:
      out.result = decode_simplex(p, c.simplex);
      break;
    case DecoderKind::Auto:
      throw ParameterError("decode: unresolved decoder kind");
  }
  return out;
}

void write_trace_csv(std::ostream& os, const std::vector<std::pair<std::size_t, std::vector<double>>>& traces) {
  CsvTable t;
  t.header = {"point", "iteration", "objective"};
  for (const auto& [point, values] : traces)
    for (std::size_t k = 0; k < values.size(); ++k)
      t.rows.push_back({std::to_string(point), std::to_string(k + 1), format_double(values[k])});
  write_csv(os, t);
}

}  // namespace ile
