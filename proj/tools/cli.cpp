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


#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "ile/data.hpp"
#include "ile/diagnostics.hpp"
#include "ile/estimator.hpp"
#include "ile/io.hpp"
#include "ile/kernels.hpp"
#include "ile/losses.hpp"
#include "ile/parallel.hpp"
#include "ile/rng.hpp"
#include "ile/suites.hpp"

namespace ile::cli {
namespace fs = std::filesystem;

std::optional<int> resolve_jobs(std::optional<int> flag, const char* env) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--jobs must be >= 1, got " + std::to_string(*flag));
    return flag;
  }
  if (env == nullptr || *env == '\0') return std::nullopt;
  const std::string s(env);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno != 0 || v < 1 || v > 4096)
    throw ConfigError("ILE_JOBS must be an integer in [1, 4096], got '" + s + "'");
  return static_cast<int>(v);
}

void Outputs::add(const std::string& name, std::string content) { files_[name] = std::move(content); }

void Outputs::commit(const std::string& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto discard = [&] {
    for (const auto& [tmp, dst] : staged) fs::remove(tmp, ec);
  };
  for (const auto& [name, content] : files_) {
    const fs::path dst = fs::path(dir) / name;
    const fs::path tmp = fs::path(dir) / ("." + name + ".tmp");
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << content;
    os.close();
    if (!os) {
      discard();
      fs::remove(tmp, ec);
      throw InputError("cannot write " + tmp.string());
    }
    staged.emplace_back(tmp, dst);
  }
  for (const auto& [tmp, dst] : staged) {
    fs::rename(tmp, dst, ec);
    if (ec) {
      discard();
      throw InputError("cannot move " + tmp.string() + " to " + dst.string() + ": " + ec.message());
    }
  }
}

namespace {

constexpr std::uint64_t kDefaultSeed = 1;
constexpr int kConfigVersion = 1;

// Sub-seeds of the top-level seed.
enum SeedSlot : std::uint64_t { kTaskSeed = 1, kTrainSeed = 2, kTestSeed = 3, kLearnerSeed = 4, kDecoderSeed = 5 };

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string csv_text(const CsvTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

struct Context {
  ConfigDoc doc;
  std::uint64_t seed = kDefaultSeed;
  std::string out_dir;
  std::ostream* out = nullptr;
};

std::string config_relative(const ConfigDoc& doc, const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute()) return p;
  return (fs::path(doc.path).parent_path() / path).lexically_normal().string();
}

Matrix read_inputs_csv(const std::string& path) {
  const auto table = read_csv_file(path);
  const auto d = table.header.size();
  if (d == 0) throw InputError(path + ": empty header");
  for (std::size_t j = 0; j < d; ++j)
    if (table.header[j] != "x" + std::to_string(j + 1))
      throw InputError(path + ": column " + std::to_string(j + 1) + " must be named x" + std::to_string(j + 1));
  Matrix X(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != d) throw InputError(path + ": row " + std::to_string(i + 2) + " has the wrong field count");
    for (std::size_t j = 0; j < d; ++j) {
      const auto& f = table.rows[i][j];
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v))
        throw InputError(path + ": row " + std::to_string(i + 2) + ", column x" + std::to_string(j + 1) +
                         ": not a finite number: '" + f + "'");
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return X;
}

// ---------------------------------------------------------------------------
// Config sections

struct TaskPlan {
  std::string generator;
  Eigen::Index n = 0;
  Eigen::Index test_n = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t test_seed = 0;
  std::optional<SyntheticDistribution> dist;
  std::optional<SphereRegressionTask> sphere;
  std::optional<HistogramTask> histogram;
  std::optional<Dataset> train_data;
  std::optional<Dataset> test_data;
  nlohmann::json default_loss;  // null: the config must name a loss
  nlohmann::json echo;

  Dataset draw(Eigen::Index count, std::uint64_t s) const {
    if (dist) return sample(*dist, count, s);
    if (sphere) return sphere->sample(count, s);
    return histogram->sample(count, s);
  }
  Dataset train() const { return train_data ? *train_data : draw(n, train_seed); }
  Dataset test() const { return test_data ? *test_data : draw(test_n, test_seed); }
};

TaskPlan parse_task(const Section& root, std::uint64_t seed, bool need_test) {
  const Section t = root.child("task");
  if (!t.present()) root.fail("task", "required section is missing");
  TaskPlan p;
  p.generator = t.text("generator");
  const auto task_seed = t.seed("seed", derive_seed(seed, {kTaskSeed}));
  p.train_seed = derive_seed(seed, {kTrainSeed});
  p.test_seed = derive_seed(seed, {kTestSeed});
  p.echo = {{"generator", p.generator}};

  if (p.generator == "finite_classification") {
    t.allow({"generator", "seed", "n", "test_n", "d", "T", "m", "temperature"});
    const int d = t.integer("d", 2, 1);
    const int T = t.integer("T", 2, 2);
    const int m = t.integer("m", 50, 1);
    const double temp = t.number("temperature", 1.0);
    if (!(temp > 0.0) || !std::isfinite(temp)) t.fail("temperature", "must be positive and finite");
    p.dist = t.guard("", [&] { return gen_finite_classification(task_seed, d, T, m, temp); });
    p.default_loss = {{"id", "zero_one"}, {"T", T}};
    p.echo.update({{"seed", task_seed}, {"d", d}, {"T", T}, {"m", m}, {"temperature", temp}});
  } else if (p.generator == "sphere_regression") {
    t.allow({"generator", "seed", "n", "test_n", "dim", "kappa", "input_dim"});
    const int dim = t.integer("dim", 2, 2);
    const double kappa = t.number("kappa", 20.0);
    if (!(kappa > 0.0)) t.fail("kappa", "must be positive (.inf for noise-free labels)");
    const int input_dim = t.integer("input_dim", 2, 1);
    p.sphere = t.guard("", [&] { return gen_sphere_regression(task_seed, dim, kappa, input_dim); });
    p.default_loss = {{"id", "geodesic_sphere_sq"}, {"d", dim}};
    p.echo.update({{"seed", task_seed}, {"dim", dim}, {"input_dim", input_dim}});
    p.echo["kappa"] = std::isinf(kappa) ? nlohmann::json("inf") : nlohmann::json(kappa);
  } else if (p.generator == "histogram") {
    t.allow({"generator", "seed", "n", "test_n", "bins", "input_dim", "concentration"});
    const int bins = t.integer("bins", 3, 2);
    const int input_dim = t.integer("input_dim", 2, 1);
    const double conc = t.number("concentration", 20.0);
    if (!(conc > 0.0) || !std::isfinite(conc)) t.fail("concentration", "must be positive and finite");
    p.histogram = t.guard("", [&] { return gen_histogram_task(task_seed, bins, input_dim, conc); });
    p.default_loss = {{"id", "hellinger"}, {"bins", bins}};
    p.echo.update({{"seed", task_seed}, {"bins", bins}, {"input_dim", input_dim}, {"concentration", conc}});
  } else if (p.generator == "dataset") {
    t.allow({"generator", "path", "test_path"});
    p.echo["path"] = t.text("path");
    p.train_data = t.guard("path", [&] { return load_dataset(config_relative(t.doc(), t.text("path"))); });
    p.n = p.train_data->size();
    if (t.has("test_path")) {
      p.echo["test_path"] = t.text("test_path");
      p.test_data = t.guard("test_path", [&] { return load_dataset(config_relative(t.doc(), t.text("test_path"))); });
      p.test_n = p.test_data->size();
    } else if (need_test) {
      t.fail("test_path", "required key is missing (evaluation needs a held-out dataset)");
    }
    return p;
  } else {
    t.fail("generator", "unknown generator '" + p.generator +
                            "' (expected finite_classification, sphere_regression, histogram or dataset)");
  }
  p.n = t.integer("n", 200, 1);
  p.test_n = t.integer("test_n", 1000, 1);
  p.echo.update({{"n", p.n}, {"test_n", p.test_n}, {"train_seed", p.train_seed}, {"test_seed", p.test_seed}});
  return p;
}

LossSpec parse_loss(const Section& root, const nlohmann::json& fallback) {
  const Section l = root.child("loss");
  nlohmann::json cfg;
  if (l.present()) {
    l.text("id");
    cfg = l.json();
  } else if (!fallback.is_null()) {
    cfg = fallback;
  } else {
    root.fail("loss", "required section is missing (the task has no default loss)");
  }
  return l.guard("", [&] { return make_loss(cfg); });
}

KernelSpec parse_kernel(const Section& root) {
  const Section k = root.child("kernel");
  k.allow({"family", "sigma", "domain_radius"});
  KernelSpec spec = KernelSpec::gaussian(1.0);
  spec.family = k.guard("family", [&] { return kernel_family_from_string(k.text("family", "gaussian")); });
  spec.sigma = k.number("sigma", 1.0);
  spec.domain_radius = k.number("domain_radius", 1.0);
  if (spec.family != KernelFamily::Linear && !(spec.sigma > 0.0 && std::isfinite(spec.sigma)))
    k.fail("sigma", "must be positive and finite");
  if (!(spec.domain_radius > 0.0 && std::isfinite(spec.domain_radius)))
    k.fail("domain_radius", "must be positive and finite");
  k.guard("", [&] { spec.validate(); });
  return spec;
}

DecoderConfig parse_decoder(const Section& root) {
  const Section d = root.child("decoder");
  d.allow({"kind", "tie_tolerance", "candidates", "sgd", "sphere", "simplex"});
  if (!d.present()) return DecoderConfig{};
  d.child("sgd").allow({"steps", "step0", "schedule", "output", "extra_starts"});
  d.child("sphere").allow({"iterations", "step", "extra_starts", "label_starts"});
  d.child("simplex").allow({"iterations", "step"});
  return d.guard("", [&] { return d.json().get<DecoderConfig>(); });
}

struct AlgorithmPlan {
  std::string name = "ridge";
  bool scheduled = true;
  double r = 0.0;
  double gamma = 1.0;
  double lambda_scale = 1.0;
  double nu = 0.5;
  int q = 1;
  std::optional<WeightAlgorithm> fixed;

  RateConfig schedule_config() const {
    RateConfig c;
    c.algorithm = name;
    c.r = r;
    c.gamma = gamma;
    c.lambda_scale = lambda_scale;
    c.nu = nu;
    c.q = q;
    return c;
  }
  WeightAlgorithm resolve(int n, std::uint64_t seed) const {
    return fixed ? *fixed : scheduled_algorithm(schedule_config(), n, seed);
  }
  std::string formula() const {
    const double expo = 1.0 / (2.0 * r + gamma + 1.0);
    return "lambda_n = " + format_double(lambda_scale) + " * n^(-" + format_double(expo) + ")";
  }
  nlohmann::json echo() const {
    if (fixed) return *fixed;
    return {{"name", name},
            {"nu", nu},
            {"q", q},
            {"schedule", {{"r", r}, {"gamma", gamma}, {"lambda_scale", lambda_scale}, {"formula", formula()}}}};
  }
};

AlgorithmPlan parse_algorithm(const Section& root, std::uint64_t seed, bool allow_fixed) {
  const Section a = root.child("algorithm");
  a.allow({"name", "lambda", "nu", "steps", "features", "landmarks", "q", "seed", "schedule"});
  AlgorithmPlan p;
  p.name = a.text("name", "ridge");
  static const std::set<std::string> kNames = {"ridge", "pcr", "l2boost", "nystrom", "randfeat", "nw", "nn"};
  if (!kNames.count(p.name))
    a.fail("name", "unknown learner '" + p.name + "' (expected ridge, pcr, l2boost, nystrom, randfeat, nw or nn)");
  p.nu = a.number("nu", 0.5);
  if (!(p.nu > 0.0 && p.nu <= 1.0)) a.fail("nu", "must be in (0, 1]");
  p.q = a.integer("q", 1, 1);
  const auto learner_seed = a.seed("seed", derive_seed(seed, {kLearnerSeed}));

  const char* const fixed_keys[] = {"lambda", "steps", "features", "landmarks"};
  const bool any_fixed = std::any_of(std::begin(fixed_keys), std::end(fixed_keys), [&](const char* k) { return a.has(k); });

  if (p.name == "nw" || p.name == "nn") {
    if (a.has("schedule")) a.fail("schedule", p.name + " has no regularization parameter to schedule");
    for (const char* k : fixed_keys)
      if (a.has(k)) a.fail(k, "not a parameter of " + p.name);
    p.scheduled = false;
    p.fixed = p.name == "nw" ? WeightAlgorithm{NadarayaWatson{}} : WeightAlgorithm{NearestNeighbors{p.q}};
    return p;
  }
  if (a.has("schedule") || !any_fixed) {
    for (const char* k : fixed_keys)
      if (a.has(k)) a.fail(k, "conflicts with schedule, which sets it from n");
    const Section s = a.child("schedule");
    s.allow({"r", "gamma", "lambda_scale"});
    p.r = s.number("r", 0.0);
    if (!(p.r >= 0.0) || !std::isfinite(p.r)) s.fail("r", "source exponent must be finite and >= 0");
    p.gamma = s.number("gamma", 1.0);
    if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) s.fail("gamma", "capacity exponent must lie in [0, 1]");
    p.lambda_scale = s.number("lambda_scale", 1.0);
    if (!(p.lambda_scale > 0.0) || !std::isfinite(p.lambda_scale)) s.fail("lambda_scale", "must be positive and finite");
    return p;
  }
  if (!allow_fixed)
    a.fail("", "this command sweeps n and needs a schedule; remove lambda, steps, features and landmarks");
  p.scheduled = false;
  auto positive = [&](const char* key) {
    const double v = a.number(key);
    if (!(v > 0.0) || !std::isfinite(v)) a.fail(key, "must be positive and finite");
    return v;
  };
  if (p.name == "ridge") {
    p.fixed = Ridge{positive("lambda")};
  } else if (p.name == "pcr") {
    p.fixed = Pcr{positive("lambda")};
  } else if (p.name == "l2boost") {
    p.fixed = L2Boost{p.nu, a.integer("steps", std::nullopt, 1)};
  } else if (p.name == "randfeat") {
    p.fixed = RandomFeatures{a.integer("features", std::nullopt, 1), positive("lambda"), learner_seed};
  } else {
    p.fixed = Nystrom{a.integer("landmarks", std::nullopt, 1), positive("lambda"), learner_seed};
  }
  return p;
}

StructuredPredictor load_predictor(const Section& root, const Context& ctx) {
  const bool given = root.has("predictor");
  const auto path = given ? config_relative(ctx.doc, root.text("predictor"))
                          : (fs::path(ctx.out_dir) / "predictor.json").string();
  return root.guard(given ? "predictor" : "", [&] {
    try {
      return StructuredPredictor::from_json(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ": " + e.what());
    } catch (const std::exception& e) {
      throw InputError(path + ": " + e.what());
    }
  });
}

Section top_level(const Context& ctx) {
  Section root(ctx.doc, "");
  root.allow({"version", "seed", "task", "loss", "kernel", "algorithm", "decoder", "rates", "verify", "diag",
              "predictor", "inputs"});
  const int version = root.integer("version");
  if (version != kConfigVersion)
    root.fail("version", "unsupported config version " + std::to_string(version) + " (this build reads version " +
                             std::to_string(kConfigVersion) + ")");
  return root;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_fit(const Context& ctx, Outputs& outputs) {
  const Section root = top_level(ctx);
  const auto task = parse_task(root, ctx.seed, false);
  const auto loss = parse_loss(root, task.default_loss);
  const auto alg = parse_algorithm(root, ctx.seed, true);
  PredictorConfig pc;
  pc.kernel = parse_kernel(root);
  pc.decoder = parse_decoder(root);
  pc.seed = derive_seed(ctx.seed, {kDecoderSeed});

  const nlohmann::json echo = {{"seed", ctx.seed}, {"task", task.echo}, {"loss", loss.config()},
                               {"kernel", pc.kernel}, {"algorithm", alg.echo()}, {"decoder", pc.decoder}};
  *ctx.out << "config " << echo.dump() << "\n";
  if (alg.scheduled) *ctx.out << "schedule " << alg.formula() << "\n";

  const Dataset train = task.train();
  pc.algorithm = alg.resolve(static_cast<int>(train.size()), derive_seed(ctx.seed, {kLearnerSeed}));
  const auto predictor = fit(pc, loss, train.X, train.Y);
  const double risk = predictor.empirical_risk(train.X, train.Y);
  *ctx.out << "fit n=" << train.size() << " train_risk=" << format_double(risk) << "\n";

  outputs.add("predictor.json", dump(predictor.to_json()));
  outputs.add("fit.json", dump({{"format", "ile.fit"},
                                {"schema_version", kSchemaVersion},
                                {"n", train.size()},
                                {"input_dim", train.X.cols()},
                                {"algorithm", *pc.algorithm},
                                {"train_risk", risk},
                                {"config", echo}}));
  return kOk;
}

int cmd_predict(const Context& ctx, Outputs& outputs) {
  const Section root = top_level(ctx);
  const auto predictor = load_predictor(root, ctx);
  Matrix X;
  nlohmann::json source;
  if (root.has("inputs")) {
    const auto path = config_relative(ctx.doc, root.text("inputs"));
    X = root.guard("inputs", [&] { return read_inputs_csv(path); });
    source = {{"inputs", root.text("inputs")}};
  } else {
    const auto task = parse_task(root, ctx.seed, true);
    X = task.test().X;
    source = {{"task", task.echo}};
  }
  if (X.rows() > 0 && X.cols() != predictor.weights().dim())
    root.fail(root.has("inputs") ? "inputs" : "task", "inputs have " + std::to_string(X.cols()) +
                                                          " columns but the predictor was trained on " +
                                                          std::to_string(predictor.weights().dim()));
  *ctx.out << "config " << nlohmann::json{{"seed", ctx.seed}, {"source", source}}.dump() << "\n";

  const auto preds = predictor.predict_batch_full(X);
  CsvTable table{{"index", "label", "objective", "decoder"}, {}};
  for (std::size_t i = 0; i < preds.size(); ++i)
    table.rows.push_back(
        {std::to_string(i), format_label(preds[i].z), format_double(preds[i].objective), to_string(preds[i].decoder)});
  *ctx.out << "predict m=" << preds.size() << "\n";
  outputs.add("predictions.csv", csv_text(table));
  return kOk;
}

int cmd_eval(const Context& ctx, Outputs& outputs) {
  const Section root = top_level(ctx);
  const auto predictor = load_predictor(root, ctx);
  const auto task = parse_task(root, ctx.seed, true);
  const LossSpec loss = root.child("loss").present() ? parse_loss(root, nullptr) : predictor.loss();
  const nlohmann::json echo = {{"seed", ctx.seed}, {"task", task.echo}, {"loss", loss.config()}};
  *ctx.out << "config " << echo.dump() << "\n";

  const Dataset test = task.test();
  if (test.size() > 0 && test.X.cols() != predictor.weights().dim())
    root.fail("task", "task inputs have " + std::to_string(test.X.cols()) + " columns but the predictor was trained on " +
                          std::to_string(predictor.weights().dim()));
  const double risk = predictor.empirical_risk(test.X, test.Y, &loss);
  nlohmann::json summary = {{"format", "ile.eval"}, {"schema_version", kSchemaVersion}, {"n_test", test.size()},
                            {"empirical_risk", risk}, {"config", echo}};
  CsvTable table{{"metric", "value"}, {{"empirical_risk", format_double(risk)}}};
  *ctx.out << "eval n_test=" << test.size() << " empirical_risk=" << format_double(risk) << "\n";
  if (task.dist) {
    const auto f = predictor.predict_batch(task.dist->support);
    const double exact = structured_risk(f, *task.dist, loss);
    const double bayes = exact_fstar(*task.dist, loss).risk;
    const double excess = structured_excess_risk(f, *task.dist, loss);
    summary["exact"] = {{"risk", exact}, {"bayes_risk", bayes}, {"excess_risk", excess}};
    table.rows.push_back({"exact_risk", format_double(exact)});
    table.rows.push_back({"bayes_risk", format_double(bayes)});
    table.rows.push_back({"excess_risk", format_double(excess)});
    *ctx.out << "eval exact_risk=" << format_double(exact) << " excess_risk=" << format_double(excess) << "\n";
  }
  outputs.add("eval.json", dump(summary));
  outputs.add("eval.csv", csv_text(table));
  return kOk;
}

int cmd_rates(const Context& ctx, Outputs& outputs) {
  const Section root = top_level(ctx);
  const auto task = parse_task(root, ctx.seed, false);
  if (!task.dist)
    root.child("task").fail("generator", "rates need a finite_classification task, where excess risk is exact");
  const auto loss = parse_loss(root, task.default_loss);
  const auto alg = parse_algorithm(root, ctx.seed, false);
  const Section rs = root.child("rates");
  rs.allow({"n_grid", "repetitions"});

  RateConfig rc = alg.schedule_config();
  rc.dist = *task.dist;
  rc.loss = loss.config();
  rc.kernel = parse_kernel(root);
  rc.n_grid = rs.int_list("n_grid", rc.n_grid);
  rc.repetitions = rs.integer("repetitions", rc.repetitions, 1);
  rc.seed = ctx.seed;
  rs.guard("", [&] { rc.validate(); });

  nlohmann::json echo = {{"seed", ctx.seed},
                         {"task", task.echo},
                         {"loss", rc.loss},
                         {"kernel", rc.kernel},
                         {"algorithm", alg.echo()},
                         {"rates", {{"n_grid", rc.n_grid}, {"repetitions", rc.repetitions}}}};
  echo["task"].erase("n");
  echo["task"].erase("test_n");
  *ctx.out << "config " << echo.dump() << "\n";
  *ctx.out << "schedule " << alg.formula() << "\n";

  const auto result = rate_experiment(rc);
  for (const auto& row : result.rows)
    *ctx.out << "rates n=" << row.n << " lambda=" << format_double(row.lambda) << " mean_excess=" << format_double(row.mean)
             << " stderr=" << format_double(row.stderr_) << "\n";
  if (result.slope)
    *ctx.out << "rates slope=" << format_double(*result.slope) << " ci95=[" << format_double(*result.ci_low) << ", "
             << format_double(*result.ci_high) << "]\n";
  else
    *ctx.out << "rates slope=none" << (result.saturated ? " (saturated: zero excess risk)" : "") << "\n";

  std::ostringstream csv;
  write_rate_csv(csv, result);
  auto summary = rate_summary_json(result, rc);
  summary["config"] = echo;
  outputs.add("rates.csv", csv.str());
  outputs.add("rates.json", dump(summary));
  return kOk;
}

int cmd_verify(const Context& ctx, Outputs& outputs, bool have_config) {
  bool include_rates = false;
  if (have_config) {
    const Section root = top_level(ctx);
    const Section v = root.child("verify");
    v.allow({"include_rates"});
    include_rates = v.flag("include_rates", false);
  }
  *ctx.out << "config " << nlohmann::json{{"seed", ctx.seed}, {"include_rates", include_rates}}.dump() << "\n";

  const auto suites = run_verify_suites(include_rates, ctx.seed);
  bool passed = true;
  CsvTable table{{"suite", "passed", "cases", "failures", "worst"}, {}};
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : suites) {
    passed = passed && s.passed;
    *ctx.out << (s.passed ? "PASS " : "FAIL ") << s.name << " cases=" << s.cases << " failures=" << s.failures
             << " worst=" << format_double(s.worst) << "\n";
    table.rows.push_back({s.name, s.passed ? "true" : "false", std::to_string(s.cases), std::to_string(s.failures),
                          format_double(s.worst)});
    list.push_back(s.to_json());
  }
  *ctx.out << (passed ? "verify: all suites passed" : "verify: FAILED") << "\n";
  outputs.add("verify.csv", csv_text(table));
  outputs.add("verify.json", dump({{"format", "ile.verify"},
                                   {"schema_version", kSchemaVersion},
                                   {"seed", ctx.seed},
                                   {"include_rates", include_rates},
                                   {"passed", passed},
                                   {"suites", list}}));
  return passed ? kOk : kVerifyFailed;
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return out;
}

int cmd_diag(const Context& ctx, Outputs& outputs) {
  const Section root = top_level(ctx);
  const auto task = parse_task(root, ctx.seed, false);
  const auto kernel = parse_kernel(root);
  const bool explicit_loss = root.child("loss").present();
  std::optional<LossSpec> loss;
  if (explicit_loss || !task.default_loss.is_null()) loss = parse_loss(root, task.default_loss);
  const Section d = root.child("diag");
  d.allow({"lambda_min", "lambda_max", "count", "filter_grid", "nu"});
  const double lo = d.number("lambda_min", 1e-4);
  const double hi = d.number("lambda_max", 1.0);
  if (!(lo > 0.0) || !std::isfinite(lo)) d.fail("lambda_min", "must be positive and finite");
  if (!(hi > lo) || !std::isfinite(hi)) d.fail("lambda_max", "must be finite and greater than lambda_min");
  const int count = d.integer("count", 25, 2);
  const int grid = d.integer("filter_grid", 200, 2);
  const double nu = d.number("nu", 0.5);
  if (!(nu > 0.0 && nu <= 1.0)) d.fail("nu", "must be in (0, 1]");
  const bool embed = loss && loss->output_space.is_finite() && loss->label_space.is_finite();
  if (explicit_loss && !embed) root.fail("loss", "embedding export needs finite output and label spaces");

  nlohmann::json echo = {{"seed", ctx.seed},
                         {"task", task.echo},
                         {"kernel", kernel},
                         {"diag", {{"lambda_min", lo}, {"lambda_max", hi}, {"count", count}, {"filter_grid", grid}, {"nu", nu}}}};
  if (embed) echo["loss"] = loss->config();
  *ctx.out << "config " << echo.dump() << "\n";

  const Dataset train = task.train();
  const auto lambdas = geometric_grid(lo, hi, count);
  const auto K = gram_matrix(kernel, train.X);
  const Vector deff = effective_dimension_curve(K, lambdas);
  const double kappa_sq = kernel.kappa_sq();
  CsvTable curve{{"lambda", "d_eff", "bound"}, {}};
  for (int i = 0; i < count; ++i)
    curve.rows.push_back({format_double(lambdas[static_cast<std::size_t>(i)]), format_double(deff(i)),
                          format_double(kappa_sq / lambdas[static_cast<std::size_t>(i)])});
  *ctx.out << "diag n=" << train.size() << " d_eff(" << format_double(lo) << ")=" << format_double(deff(0)) << " d_eff("
           << format_double(hi) << ")=" << format_double(deff(count - 1)) << "\n";

  CsvTable filters{{"filter", "nu", "q1", "q2", "q1_stated", "q2_stated"}, {}};
  const auto sigmas = sigma_grid(kappa_sq, grid);
  for (const auto kind : {FilterKind::Ridge, FilterKind::Pcr, FilterKind::L2Boost}) {
    const FilterSpec f{kind, nu};
    const auto measured = check_filter(f, sigmas, lambda_grid(f, grid));
    const auto stated = stated_filter_constants(f);
    filters.rows.push_back({to_string(kind), kind == FilterKind::L2Boost ? format_double(nu) : "", format_double(measured.q1),
                            format_double(measured.q2), format_double(stated.q1), format_double(stated.q2)});
  }

  nlohmann::json summary = {{"format", "ile.diag"}, {"schema_version", kSchemaVersion}, {"n", train.size()},
                            {"kappa_sq", kappa_sq}, {"config", echo}};
  if (embed) {
    const auto fe = root.guard("loss", [&] { return finite_embedding(*loss); });
    std::ostringstream os;
    fe.write_csv(os);
    outputs.add("embedding.csv", os.str());
    summary["embedding"] = {{"outputs", fe.outputs.size()},
                            {"labels", fe.labels.size()},
                            {"closs_bound", fe.closs_bound},
                            {"reconstruction_error", fe.reconstruction_error()},
                            {"max_phi_norm", fe.max_phi_norm()},
                            {"max_psi_norm", fe.max_psi_norm()}};
    *ctx.out << "diag embedding closs_bound=" << format_double(fe.closs_bound) << "\n";
  }
  outputs.add("deff.csv", csv_text(curve));
  outputs.add("filters.csv", csv_text(filters));
  outputs.add("diag.json", dump(summary));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ile: structured prediction with implicit loss embeddings"};
  app.name("ile");
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;

  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"fit", "train a predictor and save it"},
      {"predict", "load a predictor and predict a batch of inputs"},
      {"eval", "report the risk of a saved predictor"},
      {"rates", "run a learning-rate experiment"},
      {"verify", "run the verification suites"},
      {"diag", "effective dimension, filter constants and loss embedding"},
  };
  std::vector<CLI::App*> subs;
  std::map<std::string, CLI::Option*> seed_opts, jobs_opts, config_opts;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    auto* cfg = sub->add_option("--config", config_path, "YAML config file");
    if (std::string(c.name) != "verify") cfg->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    seed_opts[c.name] = sub->add_option("--seed", seed, "overrides the config seed");
    jobs_opts[c.name] = sub->add_option("--jobs", jobs, "worker threads (overrides ILE_JOBS)");
    config_opts[c.name] = cfg;
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  const CLI::App* sub = nullptr;
  for (auto* s : subs)
    if (s->parsed()) sub = s;
  const std::string name = sub->get_name();

  try {
    const auto threads = resolve_jobs(jobs_opts[name]->count() ? std::optional<int>(jobs) : std::nullopt,
                                      std::getenv("ILE_JOBS"));
    set_num_threads(threads.value_or(0));

    Context ctx;
    ctx.out = &out;
    ctx.out_dir = out_dir;
    const bool have_config = config_opts[name]->count() > 0;
    if (have_config) ctx.doc = load_config(config_path);
    ctx.seed = kDefaultSeed;
    if (have_config) ctx.seed = Section(ctx.doc, "").seed("seed", kDefaultSeed);
    if (seed_opts[name]->count()) ctx.seed = seed;

    Outputs outputs;
    int status = kOk;
    if (name == "fit")
      status = cmd_fit(ctx, outputs);
    else if (name == "predict")
      status = cmd_predict(ctx, outputs);
    else if (name == "eval")
      status = cmd_eval(ctx, outputs);
    else if (name == "rates")
      status = cmd_rates(ctx, outputs);
    else if (name == "verify")
      status = cmd_verify(ctx, outputs, have_config);
    else
      status = cmd_diag(ctx, outputs);
    outputs.commit(out_dir);
    for (const auto& [file, content] : outputs.files()) out << "wrote " << (fs::path(out_dir) / file).string() << "\n";
    return status;
  } catch (const ConfigError& e) {
    err << "ile " << name << ": config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "ile " << name << ": error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace ile::cli
