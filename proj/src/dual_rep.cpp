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

#include "spiketopo/dual_rep.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <tuple>

#include "spiketopo/errors.hpp"

namespace spiketopo {

namespace {

// Single-source Brandes dependency accumulation. Leaves delta[v] for all v
// (delta[s] == 0). Work buffers are reused across calls.
struct BrandesWork {
  std::vector<int> dist;
  std::vector<double> sigma;
  std::vector<double> delta;
  std::vector<int> order;
  std::vector<std::vector<int>> preds;

  explicit BrandesWork(int n) : dist(n), sigma(n), delta(n), preds(n) { order.reserve(n); }

  void run(const Adjacency& adj, int s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : preds) p.clear();
    order.clear();
    dist[s] = 0;
    sigma[s] = 1.0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (int w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int w = *it;
      for (int v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
    }
    delta[s] = 0.0;
  }
};

std::vector<int> multi_source_hops(const std::vector<std::vector<int>>& undirected,
                                   const std::vector<int>& sources, int sentinel) {
  const int n = static_cast<int>(undirected.size());
  std::vector<int> d(n, -1);
  std::deque<int> q;
  for (int s : sources) {
    d[s] = 0;
    q.push_back(s);
  }
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    for (int w : undirected[v]) {
      if (d[w] < 0) {
        d[w] = d[v] + 1;
        q.push_back(w);
      }
    }
  }
  for (auto& x : d) {
    if (x < 0) x = sentinel;
  }
  return d;
}

std::size_t fraction_count(double fraction, std::size_t base) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(base) - 1e-9));
}

}  // namespace

Adjacency directed_adjacency(const NetworkTopology& net) {
  Adjacency adj(net.neuron_count);
  for (const auto& s : net.synapses) adj[s.pre].push_back(s.post);
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

namespace serial {

std::vector<double> betweenness(const Adjacency& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<double> score(n, 0.0);
  BrandesWork work(n);
  for (int s = 0; s < n; ++s) {
    work.run(adj, s);
    for (int v = 0; v < n; ++v) score[v] += work.delta[v];
  }
  return score;
}

}  // namespace serial

std::vector<double> betweenness(const Adjacency& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<double> per_source(static_cast<std::size_t>(n) * n, 0.0);
#pragma omp parallel
  {
    BrandesWork work(n);
#pragma omp for schedule(dynamic)
    for (int s = 0; s < n; ++s) {
      work.run(adj, s);
      std::copy(work.delta.begin(), work.delta.end(), per_source.begin() + static_cast<std::size_t>(s) * n);
    }
  }
  std::vector<double> score(n, 0.0);
  for (int s = 0; s < n; ++s) {
    for (int v = 0; v < n; ++v) score[v] += per_source[static_cast<std::size_t>(s) * n + v];
  }
  return score;
}

std::vector<double> betweenness(const NetworkTopology& net) {
  return betweenness(directed_adjacency(net));
}

LayerAssignment extract_layers(const NetworkTopology& net, double bottleneck_fraction,
                               double band_fraction) {
  if (!(bottleneck_fraction > 0.0) || !(band_fraction > 0.0)) {
    throw InputDomainError("extract_layers: fractions must be positive");
  }
  const int n = net.neuron_count;
  LayerAssignment la;
  la.centrality = betweenness(net);
  la.layers[0] = net.input_ids;
  la.layers[4] = net.output_ids;
  std::sort(la.layers[0].begin(), la.layers[0].end());
  std::sort(la.layers[4].begin(), la.layers[4].end());

  std::vector<int> role(n, 0);  // 0 = unassigned, else layer number
  for (int id : la.layers[0]) role[id] = 1;
  for (int id : la.layers[4]) role[id] = 5;

  // Bottleneck: highest centrality outside L1/L5. Scores are compared on a
  // 1e-6 grid so that float noise from accumulation order cannot split ties.
  std::vector<int> pool;
  for (int v = 0; v < n; ++v) {
    if (role[v] == 0) pool.push_back(v);
  }
  if (pool.empty()) throw DegenerateTopologyError("L3", "extract_layers: no candidates for L3");
  auto key = [&](int v) { return std::llround(la.centrality[v] * 1e6); };
  std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
    const auto ka = key(a), kb = key(b);
    return ka != kb ? ka > kb : a < b;
  });
  const std::size_t n3 = std::min(pool.size(), std::max<std::size_t>(1, fraction_count(bottleneck_fraction, n)));
  la.layers[2].assign(pool.begin(), pool.begin() + n3);
  std::sort(la.layers[2].begin(), la.layers[2].end());
  for (int id : la.layers[2]) role[id] = 3;

  std::vector<std::vector<int>> undirected(n);
  for (const auto& s : net.synapses) {
    undirected[s.pre].push_back(s.post);
    undirected[s.post].push_back(s.pre);
  }
  for (auto& u : undirected) {
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
  }
  const auto h1 = multi_source_hops(undirected, la.layers[0], n);
  const auto h3 = multi_source_hops(undirected, la.layers[2], n);
  const auto h5 = multi_source_hops(undirected, la.layers[4], n);

  la.d13.assign(n, -1);
  la.d35.assign(n, -1);
  la.rank_l2.assign(n, -1);
  la.rank_l4.assign(n, -1);
  std::vector<int> rest;
  for (int v = 0; v < n; ++v) {
    if (role[v] != 0) continue;
    rest.push_back(v);
    la.d13[v] = h1[v] + h3[v];
    la.d35[v] = h3[v] + h5[v];
  }
  if (rest.empty()) throw DegenerateTopologyError("L2", "extract_layers: no candidates for L2");
  const std::size_t band = std::max<std::size_t>(1, fraction_count(band_fraction, rest.size()));

  std::vector<int> by13 = rest;
  std::sort(by13.begin(), by13.end(), [&](int a, int b) {
    return std::tie(la.d13[a], la.d35[a], a) < std::tie(la.d13[b], la.d35[b], b);
  });
  for (std::size_t r = 0; r < by13.size(); ++r) la.rank_l2[by13[r]] = static_cast<int>(r);
  la.layers[1].assign(by13.begin(), by13.begin() + std::min(band, by13.size()));
  for (int id : la.layers[1]) role[id] = 2;

  std::vector<int> by35;
  for (int v : rest) {
    if (role[v] == 0) by35.push_back(v);
  }
  if (by35.empty()) throw DegenerateTopologyError("L4", "extract_layers: no candidates for L4");
  std::sort(by35.begin(), by35.end(), [&](int a, int b) {
    return std::tie(la.d35[a], la.d13[a], a) < std::tie(la.d35[b], la.d13[b], b);
  });
  for (std::size_t r = 0; r < by35.size(); ++r) la.rank_l4[by35[r]] = static_cast<int>(r);
  la.layers[3].assign(by35.begin(), by35.begin() + std::min(band, by35.size()));

  std::sort(la.layers[1].begin(), la.layers[1].end());
  std::sort(la.layers[3].begin(), la.layers[3].end());
  return la;
}

nlohmann::json to_json(const LayerAssignment& la) {
  return {{"L1", la.layers[0]},       {"L2", la.layers[1]},      {"L3", la.layers[2]},
          {"L4", la.layers[3]},       {"L5", la.layers[4]},      {"centrality", la.centrality},
          {"d13", la.d13},            {"d35", la.d35},           {"rank_l2", la.rank_l2},
          {"rank_l4", la.rank_l4}};
}

LayerAssignment layers_from_json(const nlohmann::json& j) {
  LayerAssignment la;
  try {
    for (int k = 0; k < 5; ++k) {
      la.layers[k] = j.at("L" + std::to_string(k + 1)).get<std::vector<int>>();
    }
    la.centrality = j.value("centrality", std::vector<double>{});
    la.d13 = j.value("d13", std::vector<int>{});
    la.d35 = j.value("d35", std::vector<int>{});
    la.rank_l2 = j.value("rank_l2", std::vector<int>{});
    la.rank_l4 = j.value("rank_l4", std::vector<int>{});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("layer JSON: ") + e.what());
  }
  return la;
}

std::string to_dot(const NetworkTopology& net, const LayerAssignment& la) {
  static const char* colors[] = {"#8dd3c7", "#ffffb3", "#fb8072", "#bebada", "#80b1d3"};
  std::vector<int> layer_of(net.neuron_count, 0);
  for (int k = 0; k < 5; ++k) {
    for (int id : la.layers[k]) layer_of[id] = k + 1;
  }
  std::ostringstream os;
  os << "digraph rsnn {\n  node [style=filled];\n";
  for (int v = 0; v < net.neuron_count; ++v) {
    os << "  n" << v;
    if (layer_of[v] > 0) {
      os << " [label=\"" << v << " (L" << layer_of[v] << ")\", fillcolor=\""
         << colors[layer_of[v] - 1] << "\"]";
    } else {
      os << " [fillcolor=\"#ffffff\"]";
    }
    os << ";\n";
  }
  for (const auto& s : net.synapses) os << "  n" << s.pre << " -> n" << s.post << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace spiketopo
