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


// Serial reference vs OpenMP for the data-parallel kernels. Thread count
// follows ILE_JOBS when set.

#include <benchmark/benchmark.h>

#include <cstdlib>

#include "ile/data.hpp"
#include "ile/diagnostics.hpp"
#include "ile/estimator.hpp"
#include "ile/kernels.hpp"
#include "ile/losses.hpp"
#include "ile/parallel.hpp"
#include "ile/rng.hpp"
#include "ile/weights.hpp"

namespace {

using namespace ile;

Matrix uniform_inputs(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.uniform(-1.0, 1.0);
  return X;
}

void label(benchmark::State& state, Exec exec) {
  state.counters["threads"] = exec == Exec::Serial ? 1 : num_threads();
}

void BM_GramMatrix(benchmark::State& state, Exec exec) {
  const Matrix X = uniform_inputs(state.range(0), 5, 1);
  const auto k = KernelSpec::gaussian(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(k, X, exec));
  label(state, exec);
}

void BM_EvalMatrix(benchmark::State& state, Exec exec) {
  const Matrix X = uniform_inputs(state.range(0), 5, 2);
  const Matrix T = uniform_inputs(state.range(0), 5, 3);
  const auto k = KernelSpec::gaussian(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(eval_matrix(k, X, T, exec));
  label(state, exec);
}

void BM_AlphaBatch(benchmark::State& state, Exec exec) {
  const Eigen::Index n = state.range(0);
  const Matrix X = uniform_inputs(n, 5, 4);
  const Matrix T = uniform_inputs(n, 5, 5);
  const auto model = fit_weights(X, KernelSpec::gaussian(1.0), Ridge{1.0 / std::sqrt(static_cast<double>(n))});
  for (auto _ : state) benchmark::DoNotOptimize(model.alpha_batch(T, exec));
  label(state, exec);
}

void BM_PredictFinite(benchmark::State& state, Exec exec) {
  const auto dist = gen_finite_classification(6, 2, 5, 200, 0.5);
  const Dataset train = sample(dist, state.range(0), 7);
  const auto loss = make_loss({{"id", "zero_one"}, {"T", 5}});
  PredictorConfig pc;
  pc.kernel = KernelSpec::gaussian(0.5);
  const auto predictor = fit(pc, loss, train.X, train.Y);
  for (auto _ : state) benchmark::DoNotOptimize(predictor.predict_batch(dist.support, exec));
  label(state, exec);
}

void BM_PredictSphere(benchmark::State& state, Exec exec) {
  const auto task = gen_sphere_regression(8, 2, 10.0, 2);
  const Dataset train = task.sample(state.range(0), 9);
  const Dataset test = task.sample(64, 10);
  const auto loss = make_loss({{"id", "geodesic_sphere_sq"}, {"d", 2}});
  PredictorConfig pc;
  pc.kernel = KernelSpec::gaussian(0.7);
  const auto predictor = fit(pc, loss, train.X, train.Y);
  for (auto _ : state) benchmark::DoNotOptimize(predictor.predict_batch(test.X, exec));
  label(state, exec);
}

void BM_RateExperiment(benchmark::State& state, Exec exec) {
  RateConfig c;
  c.dist = gen_finite_classification(11, 2, 2, 200, 1.0);
  c.kernel = KernelSpec::gaussian(0.5);
  c.n_grid = {25, 50, 100, 200};
  c.repetitions = 10;
  c.seed = 12;
  for (auto _ : state) benchmark::DoNotOptimize(rate_experiment(c, exec));
  label(state, exec);
}

}  // namespace

BENCHMARK_CAPTURE(BM_GramMatrix, serial, Exec::Serial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GramMatrix, openmp, Exec::Parallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_EvalMatrix, serial, Exec::Serial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_EvalMatrix, openmp, Exec::Parallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_AlphaBatch, serial, Exec::Serial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_AlphaBatch, openmp, Exec::Parallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PredictFinite, serial, Exec::Serial)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PredictFinite, openmp, Exec::Parallel)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PredictSphere, serial, Exec::Serial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PredictSphere, openmp, Exec::Parallel)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RateExperiment, serial, Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RateExperiment, openmp, Exec::Parallel)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  if (const char* jobs = std::getenv("ILE_JOBS")) ile::set_num_threads(std::atoi(jobs));
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
