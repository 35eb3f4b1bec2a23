// Copyright 2026 The sgdbound Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include <vector>

#include "sgdbound/engine.hpp"
#include "sgdbound/online_weights.hpp"
#include "sgdbound/oracles.hpp"
#include "sgdbound/recursion_lab.hpp"
#include "sgdbound/rng.hpp"
#include "sgdbound/schedules.hpp"

using namespace sgdbound;

static void BM_PhiloxUniform(benchmark::State& state) {
  CounterRng rng(42, 0);
  double sum = 0.0;
  for (auto _ : state) sum += rng.uniform();
  benchmark::DoNotOptimize(sum);
}
BENCHMARK(BM_PhiloxUniform);

static void BM_PhiloxNormal(benchmark::State& state) {
  CounterRng rng(42, 0);
  double sum = 0.0;
  for (auto _ : state) sum += rng.normal();
  benchmark::DoNotOptimize(sum);
}
BENCHMARK(BM_PhiloxNormal);

static void BM_OnlineWeights(benchmark::State& state) {
  for (auto _ : state) {
    OnlineWeights w;
    double acc = 0.0;
    for (int t = 0; t < 1000; ++t) acc += w.push(0.01 * t);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_OnlineWeights);

static void BM_FeasibleSequence(benchmark::State& state) {
  const auto T = static_cast<std::size_t>(state.range(0));
  const RecursionParams params(0.1, 1.0, 1.0, 2.0);
  const auto schedule = two_phase_schedule(0.1, 2.0, T);
  const auto gammas = schedule.gammas();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto seq = generate_feasible_sequence(params, gammas, 1.0, {}, ++seed);
    benchmark::DoNotOptimize(weighted_error(seq, schedule));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_FeasibleSequence)->Arg(10)->Arg(100)->Arg(1000);

static void BM_SgdQuadratic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t T = 1000;
  const std::vector<double> spectrum(n, 1.0);
  const auto oracle = make_noisy_quadratic(spectrum, Vector::Zero(n), 1.0, 7);
  const Vector x0 = point_at_distance(oracle, 1.0, 7);
  RunConfig cfg{T, two_phase_schedule(1.0, 2.0, T), 0, false, false};
  for (auto _ : state) {
    ++cfg.replicate_seed;
    benchmark::DoNotOptimize(run_sgd(oracle, x0, cfg).composite);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_SgdQuadratic)->Arg(10)->Arg(100);

static void BM_SgdLeastSquares(benchmark::State& state) {
  const std::size_t T = 1000;
  const Matrix A = orthogonal_design(50, 10, 3);
  const auto oracle = make_finite_sum_least_squares(A, Vector(), true, 3);
  const Vector x0 = point_at_distance(oracle, 1.0, 3);
  RunConfig cfg{T, two_phase_schedule(oracle.mu(), 2.0 * oracle.L(), T), 0, false, false};
  for (auto _ : state) {
    ++cfg.replicate_seed;
    benchmark::DoNotOptimize(run_sgd(oracle, x0, cfg).composite);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_SgdLeastSquares);

BENCHMARK_MAIN();
