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

#ifndef SPIKETOPO_SPIKE_METRICS_HPP_
#define SPIKETOPO_SPIKE_METRICS_HPP_

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "spiketopo/lif_sim.hpp"

namespace spiketopo {

/// Symmetric, zero-diagonal, nonnegative n x n matrix (row major).
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(int n) : n_(n), d_(static_cast<std::size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double operator()(int i, int j) const { return d_[static_cast<std::size_t>(i) * n_ + j]; }
  double& operator()(int i, int j) { return d_[static_cast<std::size_t>(i) * n_ + j]; }
  /// Writes both (i, j) and (j, i).
  void set(int i, int j, double v) {
    (*this)(i, j) = v;
    (*this)(j, i) = v;
  }
  std::span<const double> data() const { return d_; }

  /// Throws InputDomainError unless symmetric, zero-diagonal and nonnegative.
  void validate() const;
  /// Same matrix with points reordered: result(i, j) = (*this)(perm[i], perm[j]).
  DistanceMatrix permuted(std::span<const int> perm) const;

  bool operator==(const DistanceMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<double> d_;
};

struct SpikeDistance {
  double value = 0.0;
  bool penalized = false;  // exactly one train was empty
};

/// 1-D optimal transport between the uniform spike-time measures of f and g
/// (mass 1/N per spike of f, 1/M per spike of g), i.e. the L1 distance
/// between their quantile functions. Both empty gives 0; exactly one empty
/// gives `empty_penalty`.
SpikeDistance wasserstein_spike(std::span<const double> f, std::span<const double> g,
                                double empty_penalty);

/// Spike counts per (bin, neuron); rows = ceil(duration / bin_width).
struct PopulationStateMatrix {
  double bin_width = 0.0;
  int bins = 0;
  int neurons = 0;
  std::vector<int> counts;  // bins x neurons, row major

  int operator()(int b, int i) const { return counts[static_cast<std::size_t>(b) * neurons + i]; }
};

PopulationStateMatrix population_state_vectors(const SpikeRaster& raster, double bin_width);

struct ResponseDistance {
  double value = 0.0;
  int penalty_count = 0;
};

/// Mean over `neurons` of wasserstein_spike between corresponding trains.
/// The empty-train penalty is the raster duration.
ResponseDistance response_distance(const SpikeRaster& a, const SpikeRaster& b,
                                   std::span<const int> neurons);

struct DistanceMatrixResult {
  DistanceMatrix matrix;
  int empty_penalty_count = 0;
};

/// Pairwise response distances; pairs evaluated in parallel.
DistanceMatrixResult distance_matrix(std::span<const SpikeRaster> responses,
                                     std::span<const int> neurons);

namespace serial {
DistanceMatrixResult distance_matrix(std::span<const SpikeRaster> responses,
                                     std::span<const int> neurons);
}  // namespace serial

/// Full matrix as CSV (no header) plus `<stem>.json` sidecar
/// {n, neuron_subset, empty_penalty_count}.
void write_distance_matrix(const DistanceMatrixResult& dm, std::span<const int> neurons,
                           const std::string& csv_path);
DistanceMatrix read_distance_matrix(const std::string& csv_path);

}  // namespace spiketopo

#endif  // SPIKETOPO_SPIKE_METRICS_HPP_
