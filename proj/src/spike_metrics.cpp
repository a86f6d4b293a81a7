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

#include "spiketopo/spike_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spiketopo/errors.hpp"

namespace spiketopo {

void DistanceMatrix::validate() const {
  for (int i = 0; i < n_; ++i) {
    if ((*this)(i, i) != 0.0) throw InputDomainError("distance matrix: nonzero diagonal");
    for (int j = 0; j < n_; ++j) {
      const double v = (*this)(i, j);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InputDomainError("distance matrix: negative or non-finite entry");
      }
      if (v != (*this)(j, i)) throw InputDomainError("distance matrix: not symmetric");
    }
  }
}

DistanceMatrix DistanceMatrix::permuted(std::span<const int> perm) const {
  DistanceMatrix out(n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) out(i, j) = (*this)(perm[i], perm[j]);
  }
  return out;
}

SpikeDistance wasserstein_spike(std::span<const double> f, std::span<const double> g,
                                double empty_penalty) {
  if (f.empty() && g.empty()) return {0.0, false};
  if (f.empty() || g.empty()) return {empty_penalty, true};

  // Walk the merged quantile breakpoints k/N and l/M in units of 1/(N*M).
  const long long n = static_cast<long long>(f.size());
  const long long m = static_cast<long long>(g.size());
  long long pos = 0;
  std::size_t i = 0, j = 0;
  double acc = 0.0;
  while (i < f.size() && j < g.size()) {
    const long long next_i = static_cast<long long>(i + 1) * m;
    const long long next_j = static_cast<long long>(j + 1) * n;
    const long long next = std::min(next_i, next_j);
    acc += static_cast<double>(next - pos) * std::abs(f[i] - g[j]);
    pos = next;
    if (next_i == next) ++i;
    if (next_j == next) ++j;
  }
  return {acc / static_cast<double>(n * m), false};
}

PopulationStateMatrix population_state_vectors(const SpikeRaster& raster, double bin_width) {
  if (!(bin_width > 0.0)) throw InputDomainError("population_state_vectors: bin_width must be > 0");
  PopulationStateMatrix p;
  p.bin_width = bin_width;
  p.bins = static_cast<int>(std::ceil(raster.duration / bin_width - 1e-12));
  p.neurons = raster.neuron_count();
  p.counts.assign(static_cast<std::size_t>(p.bins) * p.neurons, 0);
  for (int i = 0; i < p.neurons; ++i) {
    for (double t : raster.trains[i]) {
      const int b = std::min(p.bins - 1, static_cast<int>(std::floor(t / bin_width)));
      ++p.counts[static_cast<std::size_t>(b) * p.neurons + i];
    }
  }
  return p;
}

ResponseDistance response_distance(const SpikeRaster& a, const SpikeRaster& b,
                                   std::span<const int> neurons) {
  if (neurons.empty()) throw InputDomainError("response_distance: empty neuron subset");
  ResponseDistance r;
  const double penalty = std::max(a.duration, b.duration);
  for (int id : neurons) {
    if (id < 0 || id >= a.neuron_count() || id >= b.neuron_count()) {
      throw InputDomainError("response_distance: neuron " + std::to_string(id) +
                             " not covered by both rasters");
    }
    const auto d = wasserstein_spike(a.trains[id], b.trains[id], penalty);
    r.value += d.value;
    r.penalty_count += d.penalized ? 1 : 0;
  }
  r.value /= static_cast<double>(neurons.size());
  return r;
}

namespace {

void check_responses(std::span<const SpikeRaster> responses) {
  if (responses.size() < 2) throw InputDomainError("distance_matrix: need at least two responses");
  for (const auto& r : responses) {
    if (r.neuron_count() != responses[0].neuron_count()) {
      throw InputDomainError("distance_matrix: responses have mismatched neuron counts");
    }
  }
}

}  // namespace

namespace serial {

DistanceMatrixResult distance_matrix(std::span<const SpikeRaster> responses,
                                     std::span<const int> neurons) {
  check_responses(responses);
  const int n = static_cast<int>(responses.size());
  DistanceMatrixResult out{DistanceMatrix(n), 0};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto d = response_distance(responses[i], responses[j], neurons);
      out.matrix.set(i, j, d.value);
      out.empty_penalty_count += d.penalty_count;
    }
  }
  return out;
}

}  // namespace serial

DistanceMatrixResult distance_matrix(std::span<const SpikeRaster> responses,
                                     std::span<const int> neurons) {
  check_responses(responses);
  const int n = static_cast<int>(responses.size());
  const long pairs = static_cast<long>(n) * (n - 1) / 2;
  std::vector<std::pair<int, int>> index(pairs);
  for (int i = 0, k = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) index[k++] = {i, j};
  }
  DistanceMatrixResult out{DistanceMatrix(n), 0};
  std::vector<int> penalties(pairs, 0);
  bool failed = false;
  std::string error;
#pragma omp parallel for schedule(dynamic, 16)
  for (long k = 0; k < pairs; ++k) {
    try {
      const auto [i, j] = index[k];
      const auto d = response_distance(responses[i], responses[j], neurons);
      out.matrix.set(i, j, d.value);
      penalties[k] = d.penalty_count;
    } catch (const std::exception& e) {
#pragma omp critical
      {
        failed = true;
        error = e.what();
      }
    }
  }
  if (failed) throw InputDomainError(error);
  for (int p : penalties) out.empty_penalty_count += p;
  return out;
}

void write_distance_matrix(const DistanceMatrixResult& dm, std::span<const int> neurons,
                           const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  out.precision(17);
  const int n = dm.matrix.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out << (j ? "," : "") << dm.matrix(i, j);
    out << '\n';
  }
  std::ofstream side(sidecar_path(csv_path));
  nlohmann::json js = {{"n", n},
                       {"neuron_subset", std::vector<int>(neurons.begin(), neurons.end())},
                       {"empty_penalty_count", dm.empty_penalty_count}};
  side << js.dump(1) << '\n';
}

DistanceMatrix read_distance_matrix(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open " + csv_path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(csv_path + ": malformed cell '" + cell + "'", lineno);
      }
    }
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  DistanceMatrix d(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) {
      throw ParseError(csv_path + ": matrix is not square", i + 1);
    }
    for (int j = 0; j < n; ++j) d(i, j) = rows[i][j];
  }
  try {
    d.validate();
  } catch (const InputDomainError& e) {
    throw ParseError(csv_path + ": " + e.what());
  }
  return d;
}

}  // namespace spiketopo
