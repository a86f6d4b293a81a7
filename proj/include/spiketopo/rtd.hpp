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

#ifndef SPIKETOPO_RTD_HPP_
#define SPIKETOPO_RTD_HPP_

#include <string>
#include <vector>

#include "json.hpp"
#include "spiketopo/spike_metrics.hpp"

namespace spiketopo {

struct Bar {
  double birth = 0.0;
  double death = 0.0;
  double length() const { return death - birth; }
};

struct CrossBarcode {
  std::vector<Bar> bars;
  double total_length() const;
};

/// Dimension-0 cross-barcode of `reference` against the union filtration
/// min(reference, other).
///
/// Each merge of the union filtration (Kruskal, ties by (i, j)) opens a bar.
/// Open bars form a forest over the connected components of the reference
/// filtration; when the reference filtration merges two of its components,
/// the youngest bar on the forest path between them closes. The number of
/// open bars at threshold a always equals
/// components(reference <= a) - components(min <= a).
CrossBarcode cross_barcode_h0(const DistanceMatrix& reference, const DistanceMatrix& other);

struct RtdReport {
  double rtd = 0.0;
  double rtd_ab = 0.0;  // bars with `a` as reference
  double rtd_ba = 0.0;  // bars with `b` as reference
  CrossBarcode bars_ab;
  CrossBarcode bars_ba;
  int n = 0;
  std::string label_a;
  std::string label_b;
  double mean_pairwise_divergence = 0.0;
};

RtdReport rtd_score(const DistanceMatrix& a, const DistanceMatrix& b, std::string label_a = "a",
                    std::string label_b = "b");

/// Mean over i < j of |a_ij - b_ij|. Diagnostic only.
double mean_pairwise_divergence(const DistanceMatrix& a, const DistanceMatrix& b);

nlohmann::json to_json(const RtdReport& r);

/// Classical multidimensional scaling; returns n rows of `dims` coordinates.
std::vector<std::vector<double>> classical_mds(const DistanceMatrix& d, int dims);
void write_coordinates_csv(const std::vector<std::vector<double>>& coords, const std::string& path);

}  // namespace spiketopo

#endif  // SPIKETOPO_RTD_HPP_
