// Copyright 2026 The spiketopo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial against OpenMP versions of the two hot kernels.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "spiketopo/dual_rep.hpp"
#include "spiketopo/net_graph.hpp"
#include "spiketopo/spike_metrics.hpp"

namespace {

using namespace spiketopo;

Adjacency graph(int n) {
  HeterogeneityConfig cfg;
  std::vector<int> in{0, 1, 2, 3}, out{n - 2, n - 1};
  return directed_adjacency(build_network(cfg, n, in, out));
}

std::vector<SpikeRaster> responses(int samples, int neurons) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0.0, 100.0);
  std::poisson_distribution<int> count(8.0);
  std::vector<SpikeRaster> out(samples);
  for (auto& r : out) {
    r.duration = 100.0;
    r.trains.resize(neurons);
    for (auto& train : r.trains) {
      for (int k = count(rng); k > 0; --k) train.push_back(t(rng));
      std::sort(train.begin(), train.end());
    }
  }
  return out;
}

void BM_betweenness_serial(benchmark::State& state) {
  const auto adj = graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(serial::betweenness(adj));
}

void BM_betweenness_parallel(benchmark::State& state) {
  const auto adj = graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(betweenness(adj));
}

void BM_distance_matrix_serial(benchmark::State& state) {
  const auto rs = responses(static_cast<int>(state.range(0)), 32);
  std::vector<int> ids(32);
  std::iota(ids.begin(), ids.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(serial::distance_matrix(rs, ids));
}

void BM_distance_matrix_parallel(benchmark::State& state) {
  const auto rs = responses(static_cast<int>(state.range(0)), 32);
  std::vector<int> ids(32);
  std::iota(ids.begin(), ids.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(rs, ids));
}

}  // namespace

BENCHMARK(BM_betweenness_serial)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_betweenness_parallel)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_distance_matrix_serial)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_distance_matrix_parallel)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
