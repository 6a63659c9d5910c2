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


#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "config.hpp"
#include "ile/io.hpp"

namespace fs = std::filesystem;
using ile::cli::ConfigDoc;
using ile::cli::ConfigError;
using ile::cli::Section;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("ile_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ile::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string error_of(const std::string& yaml) {
  try {
    const ConfigDoc doc = ile::cli::parse_config(yaml, "c.yaml");
    const Section root(doc, "");
    const Section k = root.child("kernel");
    k.allow({"family", "sigma"});
    k.number("sigma");
    root.integer("version", std::nullopt, 1);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kFitConfig = R"(version: 1
seed: 3
task:
  generator: finite_classification
  d: 2
  T: 3
  m: 30
  temperature: 0.5
  n: 120
  test_n: 200
kernel:
  family: gaussian
  sigma: 0.5
)";

const char* kRatesConfig = R"(version: 1
seed: 2
task: {generator: finite_classification, d: 2, T: 2, m: 100, temperature: 1.0}
kernel: {family: gaussian, sigma: 0.5}
algorithm:
  name: ridge
  schedule: {r: 0, gamma: 1}
rates:
  n_grid: [20, 40, 80, 160]
  repetitions: 10
)";

}  // namespace

TEST(ConfigParse, TypesScalars) {
  const auto doc = ile::cli::parse_config("a: 3\nb: 2.5\nc: \"7\"\nd: .inf\ne: true\nf: ~\ng: word\n", "x.yaml");
  EXPECT_TRUE(doc.root["a"].is_number_integer());
  EXPECT_DOUBLE_EQ(doc.root["b"].get<double>(), 2.5);
  EXPECT_TRUE(doc.root["c"].is_string());
  EXPECT_TRUE(std::isinf(doc.root["d"].get<double>()));
  EXPECT_TRUE(doc.root["e"].get<bool>());
  EXPECT_TRUE(doc.root["f"].is_null());
  EXPECT_EQ(doc.root["g"], "word");
}

TEST(ConfigParse, TracksLines) {
  const auto doc = ile::cli::parse_config("version: 1\nkernel:\n  family: gaussian\n  sigma: 2\nlist: [1, 2]\n", "x.yaml");
  EXPECT_EQ(doc.line("/kernel"), 2);
  EXPECT_EQ(doc.line("/kernel/sigma"), 4);
  EXPECT_EQ(doc.line("/kernel/missing"), 2);
  EXPECT_EQ(doc.line("/list/1"), 5);
}

TEST(ConfigParse, ErrorsNameTheLine) {
  EXPECT_EQ(error_of("version: 1\nkernel:\n  family: gaussian\n  sigma: wide\n"),
            "c.yaml:4: kernel.sigma: expected a number, got \"wide\"");
  EXPECT_EQ(error_of("version: 1\nkernel:\n  family: gaussian\n  sigmaa: 2\n").rfind("c.yaml:4: kernel.sigmaa: unknown key", 0), 0u);
  EXPECT_EQ(error_of("version: 1\nkernel:\n  family: gaussian\n").rfind("c.yaml:2: kernel.sigma: required key", 0), 0u);
  EXPECT_EQ(error_of("version: 0\nkernel: {sigma: 1}\n").rfind("c.yaml:1: version: must be >= 1", 0), 0u);
  EXPECT_EQ(error_of("kernel:\n  sigma: [1\n").rfind("c.yaml:", 0), 0u);
  EXPECT_NE(error_of("version: 1\nkernel: {sigma: 1}\nkernel: {sigma: 2}\n").find("c.yaml:3: kernel: duplicate key"),
            std::string::npos);
  EXPECT_NE(error_of("- 1\n- 2\n").find("config must be a mapping"), std::string::npos);
}

TEST(Jobs, Precedence) {
  EXPECT_EQ(ile::cli::resolve_jobs(3, "5"), 3);
  EXPECT_EQ(ile::cli::resolve_jobs(std::nullopt, "5"), 5);
  EXPECT_EQ(ile::cli::resolve_jobs(std::nullopt, nullptr), std::nullopt);
  EXPECT_EQ(ile::cli::resolve_jobs(std::nullopt, ""), std::nullopt);
  EXPECT_THROW(ile::cli::resolve_jobs(std::nullopt, "many"), ConfigError);
  EXPECT_THROW(ile::cli::resolve_jobs(std::nullopt, "0"), ConfigError);
  EXPECT_THROW(ile::cli::resolve_jobs(0, nullptr), ConfigError);
}

TEST(Outputs, CommitsEveryFileAndLeavesNoTemps) {
  TempDir dir("outputs");
  ile::cli::Outputs o;
  std::ostringstream empty;
  ile::write_csv(empty, ile::CsvTable{{"a", "b"}, {}});
  o.add("empty.csv", empty.str());
  o.add("b.json", "{}\n");
  o.commit(dir / "out");
  EXPECT_EQ(ile::read_text_file(dir / "out/empty.csv"), "a,b\n");
  EXPECT_EQ(ile::read_text_file(dir / "out/b.json"), "{}\n");
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "out")) files += e.is_regular_file();
  EXPECT_EQ(files, 2);
}

TEST(Cli, MalformedConfigWritesNothing) {
  TempDir dir("malformed");
  struct Case {
    std::string yaml;
    std::string expected;
    std::vector<std::string> commands;
  };
  const std::vector<std::string> all = {"fit", "rates", "diag"};
  const std::vector<Case> cases = {
      {"version: 1\ntask: [unclosed\n", ": YAML syntax error", all},
      {"version: 1\ntask:\n  generator: finite_classification\n  n: -4\n", ":4: task.n: must be >= 1", all},
      {"version: 1\ntask: {generator: finite_classification}\nkernel:\n  sigma: -1\n", ":4: kernel.sigma", all},
      {"version: 1\ntask: {generator: finite_classification}\nalgorithm:\n  name: ridge\n  lambda: 0.1\n"
       "  schedule: {r: 0}\n",
       ":5: algorithm.lambda: conflicts with schedule", {"fit", "rates"}},
      {"version: 1\ntask: {generator: finite_classification}\nalgorithm:\n  schedule: {gamma: 2}\n",
       ":4: algorithm.schedule.gamma", {"fit", "rates"}},
      {"version: 2\n", ":1: version: unsupported", all},
      {"version: 1\ntaks: {}\n", ":2: taks: unknown key", all},
      {"version: 1\ntask: {generator: nope}\n", ":2: task.generator: unknown generator", all},
      {"version: 1\ntask: {generator: finite_classification}\nloss: {id: zero_one, T: 1}\n", ":3: loss", all},
      {"version: 1\ntask: {generator: finite_classification}\nrates: {n_grid: [10, 20, 0]}\n",
       ":3: rates.n_grid.2", {"rates"}},
  };
  for (const auto& c : cases) {
    write(dir / "bad.yaml", c.yaml);
    for (const auto& cmd : c.commands) {
      const auto r = run({cmd, "--config", dir / "bad.yaml", "--out", dir / "out"});
      EXPECT_EQ(r.code, ile::cli::kUsageError) << cmd << "\n" << c.yaml;
      EXPECT_NE(r.err.find(c.expected), std::string::npos) << cmd << ": " << r.err;
      EXPECT_FALSE(fs::exists(dir / "out")) << cmd << "\n" << c.yaml;
      fs::remove_all(dir / "out");
    }
  }
  const auto missing = run({"fit", "--config", dir / "absent.yaml", "--out", dir / "out"});
  EXPECT_EQ(missing.code, ile::cli::kUsageError);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, ile::cli::kUsageError);
  EXPECT_EQ(run({"fit", "--out", "x"}).code, ile::cli::kUsageError);
  EXPECT_EQ(run({"bogus"}).code, ile::cli::kUsageError);
  EXPECT_EQ(run({"--help"}).code, ile::cli::kOk);
}

TEST(Cli, BadJobsEnvironmentIsRejected) {
  TempDir dir("jobs");
  write(dir / "fit.yaml", kFitConfig);
  ::setenv("ILE_JOBS", "zero", 1);
  const auto r = run({"fit", "--config", dir / "fit.yaml", "--out", dir / "out"});
  EXPECT_EQ(r.code, ile::cli::kUsageError);
  EXPECT_NE(r.err.find("ILE_JOBS"), std::string::npos);
  // The flag wins over the environment.
  EXPECT_EQ(run({"fit", "--config", dir / "fit.yaml", "--out", dir / "out", "--jobs", "1"}).code, ile::cli::kOk);
  ::unsetenv("ILE_JOBS");
}

TEST(Cli, FitPredictEval) {
  TempDir dir("workflow");
  write(dir / "fit.yaml", kFitConfig);
  const auto out = dir / "run";
  const auto f = run({"fit", "--config", dir / "fit.yaml", "--out", out});
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_NE(f.out.find("schedule lambda_n = 1 * n^(-0.5)"), std::string::npos);
  const auto fit = nlohmann::json::parse(ile::read_text_file(out + "/fit.json"));
  EXPECT_EQ(fit["format"], "ile.fit");
  EXPECT_EQ(fit["n"], 120);
  EXPECT_DOUBLE_EQ(fit["algorithm"]["lambda"].get<double>(), 1.0 / std::sqrt(120.0));

  ASSERT_EQ(run({"predict", "--config", dir / "fit.yaml", "--out", out}).code, 0);
  const auto preds = ile::read_csv_file(out + "/predictions.csv");
  EXPECT_EQ(preds.header, (std::vector<std::string>{"index", "label", "objective", "decoder"}));
  EXPECT_EQ(preds.rows.size(), 200u);

  const auto e = run({"eval", "--config", dir / "fit.yaml", "--out", out});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto ev = nlohmann::json::parse(ile::read_text_file(out + "/eval.json"));
  EXPECT_EQ(ev["schema_version"], ile::kSchemaVersion);
  EXPECT_GE(ev["exact"]["excess_risk"].get<double>(), -1e-12);
  EXPECT_NEAR(ev["exact"]["risk"].get<double>() - ev["exact"]["bayes_risk"].get<double>(),
              ev["exact"]["excess_risk"].get<double>(), 1e-12);
  EXPECT_GE(ev["empirical_risk"].get<double>(), 0.0);
  EXPECT_LE(ev["empirical_risk"].get<double>(), 1.0);
}

TEST(Cli, PredictFromCsvInputs) {
  TempDir dir("inputs");
  write(dir / "fit.yaml", kFitConfig);
  ASSERT_EQ(run({"fit", "--config", dir / "fit.yaml", "--out", dir / "run"}).code, 0);
  write(dir / "x.csv", "x1,x2\n0.1,0.2\n-0.5,0.9\n");
  write(dir / "p.yaml", "version: 1\npredictor: run/predictor.json\ninputs: x.csv\n");
  const auto r = run({"predict", "--config", dir / "p.yaml", "--out", dir / "pred"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ile::read_csv_file(dir / "pred/predictions.csv").rows.size(), 2u);

  write(dir / "x3.csv", "x1,x2,x3\n0.1,0.2,0.3\n");
  write(dir / "p3.yaml", "version: 1\npredictor: run/predictor.json\ninputs: x3.csv\n");
  const auto bad = run({"predict", "--config", dir / "p3.yaml", "--out", dir / "pred3"});
  EXPECT_EQ(bad.code, ile::cli::kUsageError);
  EXPECT_NE(bad.err.find("p3.yaml:3: inputs"), std::string::npos) << bad.err;
  EXPECT_FALSE(fs::exists(dir / "pred3"));
}

TEST(Cli, OutputsAreByteDeterministic) {
  TempDir dir("determinism");
  write(dir / "rates.yaml", kRatesConfig);
  const auto a = run({"rates", "--config", dir / "rates.yaml", "--out", dir / "a"});
  const auto b = run({"rates", "--config", dir / "rates.yaml", "--out", dir / "b", "--jobs", "1"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(ile::read_text_file(dir / "a/rates.csv"), ile::read_text_file(dir / "b/rates.csv"));
  EXPECT_EQ(ile::read_text_file(dir / "a/rates.json"), ile::read_text_file(dir / "b/rates.json"));
  const auto c = run({"rates", "--config", dir / "rates.yaml", "--out", dir / "c", "--seed", "99"});
  ASSERT_EQ(c.code, 0);
  EXPECT_NE(ile::read_text_file(dir / "a/rates.csv"), ile::read_text_file(dir / "c/rates.csv"));

  write(dir / "fit.yaml", kFitConfig);
  ASSERT_EQ(run({"fit", "--config", dir / "fit.yaml", "--out", dir / "f1"}).code, 0);
  ASSERT_EQ(run({"fit", "--config", dir / "fit.yaml", "--out", dir / "f2"}).code, 0);
  EXPECT_EQ(ile::read_text_file(dir / "f1/predictor.json"), ile::read_text_file(dir / "f2/predictor.json"));
  ASSERT_EQ(run({"predict", "--config", dir / "fit.yaml", "--out", dir / "f1"}).code, 0);
  ASSERT_EQ(run({"predict", "--config", dir / "fit.yaml", "--out", dir / "f2"}).code, 0);
  EXPECT_EQ(ile::read_text_file(dir / "f1/predictions.csv"), ile::read_text_file(dir / "f2/predictions.csv"));
}

TEST(Cli, RatesEchoScheduleAndReadBack) {
  TempDir dir("rates");
  write(dir / "rates.yaml", kRatesConfig);
  const auto r = run({"rates", "--config", dir / "rates.yaml", "--out", dir / "out"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("schedule lambda_n = 1 * n^(-0.5)"), std::string::npos) << r.out;
  const auto summary = nlohmann::json::parse(ile::read_text_file(dir / "out/rates.json"));
  EXPECT_EQ(summary["schedule"]["formula"], "lambda_n = 1 * n^(-0.5)");
  EXPECT_EQ(summary["config"]["algorithm"]["schedule"]["formula"], "lambda_n = 1 * n^(-0.5)");
  const auto csv = ile::read_csv_file(dir / "out/rates.csv");
  EXPECT_EQ(csv.header, (std::vector<std::string>{"n", "rep", "excess", "lambda", "seed"}));
  ASSERT_EQ(csv.rows.size(), 40u);
  for (const auto& row : csv.rows)
    EXPECT_DOUBLE_EQ(std::stod(row[3]), 1.0 / std::sqrt(std::stod(row[0])));
  // The CSV re-emits to the same bytes.
  std::ostringstream again;
  ile::write_csv(again, csv);
  EXPECT_EQ(again.str(), ile::read_text_file(dir / "out/rates.csv"));

  write(dir / "fixed.yaml", std::string(kRatesConfig) + "\n");
  write(dir / "fixed.yaml",
        "version: 1\ntask: {generator: finite_classification}\nalgorithm: {name: ridge, lambda: 0.1}\n");
  const auto fixed = run({"rates", "--config", dir / "fixed.yaml", "--out", dir / "fixed"});
  EXPECT_EQ(fixed.code, ile::cli::kUsageError);
  EXPECT_NE(fixed.err.find("fixed.yaml:3: algorithm: this command sweeps n"), std::string::npos) << fixed.err;
}

TEST(Cli, DiagWritesCurveFiltersAndEmbedding) {
  TempDir dir("diag");
  write(dir / "fit.yaml", kFitConfig);
  const auto r = run({"diag", "--config", dir / "fit.yaml", "--out", dir / "out"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto curve = ile::read_csv_file(dir / "out/deff.csv");
  ASSERT_EQ(curve.rows.size(), 25u);
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    EXPECT_LE(std::stod(curve.rows[i][1]), std::stod(curve.rows[i][2]) + 1e-9);
    if (i > 0) EXPECT_LE(std::stod(curve.rows[i][1]), std::stod(curve.rows[i - 1][1]) + 1e-12);
  }
  const auto filters = ile::read_csv_file(dir / "out/filters.csv");
  ASSERT_EQ(filters.rows.size(), 3u);
  for (const auto& row : filters.rows) {
    EXPECT_LE(std::stod(row[2]), std::stod(row[4]) + 1e-6);
    EXPECT_LE(std::stod(row[3]), std::stod(row[5]) + 1e-6);
  }
  const auto emb = ile::read_csv_file(dir / "out/embedding.csv");
  EXPECT_EQ(emb.rows.size(), 3u);
  const auto summary = nlohmann::json::parse(ile::read_text_file(dir / "out/diag.json"));
  EXPECT_LE(summary["embedding"]["reconstruction_error"].get<double>(), 1e-12);
}

TEST(Cli, OtherTasksFitAndEvaluate) {
  TempDir dir("tasks");
  write(dir / "sphere.yaml", "version: 1\ntask: {generator: sphere_regression, dim: 2, kappa: .inf, n: 60, test_n: 30}\n");
  write(dir / "hist.yaml", "version: 1\ntask: {generator: histogram, bins: 3, n: 60, test_n: 30}\n");
  for (const char* name : {"sphere.yaml", "hist.yaml"}) {
    const auto f = run({"fit", "--config", dir / name, "--out", dir / "run"});
    ASSERT_EQ(f.code, 0) << f.err;
    const auto e = run({"eval", "--config", dir / name, "--out", dir / "run"});
    ASSERT_EQ(e.code, 0) << e.err;
    const auto ev = nlohmann::json::parse(ile::read_text_file(dir / "run/eval.json"));
    EXPECT_GE(ev["empirical_risk"].get<double>(), 0.0);
    EXPECT_FALSE(ev.contains("exact"));
  }
}

TEST(Cli, VerifyDefaultSuitePasses) {
  TempDir dir("verify");
  const auto r = run({"verify", "--out", dir / "out"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const auto report = nlohmann::json::parse(ile::read_text_file(dir / "out/verify.json"));
  EXPECT_TRUE(report["passed"].get<bool>());
  bool saw_comparison = false;
  for (const auto& s : report["suites"]) {
    if (s["name"] == "comparison_inequality") {
      saw_comparison = true;
      EXPECT_EQ(s["failures"], 0);
      EXPECT_EQ(s["cases"], 1000);
    }
  }
  EXPECT_TRUE(saw_comparison);
  EXPECT_NE(r.out.find("PASS comparison_inequality cases=1000 failures=0"), std::string::npos) << r.out;
}
