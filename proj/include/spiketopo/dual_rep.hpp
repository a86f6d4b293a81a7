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

#ifndef SPIKETOPO_DUAL_REP_HPP_
#define SPIKETOPO_DUAL_REP_HPP_

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "spiketopo/net_graph.hpp"

namespace spiketopo {

/// Sorted, duplicate-free out-neighbour lists.
using Adjacency = std::vector<std::vector<int>>;

Adjacency directed_adjacency(const NetworkTopology& net);

/// Betweenness centrality of a directed unweighted graph over ordered pairs
/// (s, t), s != v != t: sum of sigma(s,t|v) / sigma(s,t). Brandes
/// accumulation, sources processed in parallel and reduced in source order.
std::vector<double> betweenness(const Adjacency& adj);
std::vector<double> betweenness(const NetworkTopology& net);

namespace serial {
std::vector<double> betweenness(const Adjacency& adj);
}  // namespace serial

/// Feedforward five-layer reading of a recurrent graph.
///
/// layers[0] = L1 (input neurons), layers[2] = L3 (bottleneck by centrality),
/// layers[4] = L5 (output neurons). L2 / L4 are the nodes closest (in hops on
/// the undirected skeleton) to L1+L3 and L3+L5 respectively.
struct LayerAssignment {
  std::array<std::vector<int>, 5> layers;
  std::vector<double> centrality;
  std::vector<int> d13;      // hops to L1 + hops to L3, -1 for L1/L3/L5 members
  std::vector<int> d35;      // hops to L3 + hops to L5, -1 for L1/L3/L5 members
  std::vector<int> rank_l2;  // position in the L2 ordering, -1 if not ranked
  std::vector<int> rank_l4;  // position in the L4 ordering, -1 if not ranked

  const std::vector<int>& layer(int one_based) const { return layers.at(one_based - 1); }
};

/// Throws DegenerateTopologyError naming the layer whose candidate pool is empty.
LayerAssignment extract_layers(const NetworkTopology& net, double bottleneck_fraction = 0.1,
                               double band_fraction = 0.1);

nlohmann::json to_json(const LayerAssignment& la);
LayerAssignment layers_from_json(const nlohmann::json& j);
/// Graphviz export, nodes filled by layer.
std::string to_dot(const NetworkTopology& net, const LayerAssignment& la);

}  // namespace spiketopo

#endif  // SPIKETOPO_DUAL_REP_HPP_
