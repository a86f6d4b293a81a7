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

// Reference implementations used only by the tests. Each one solves its
// problem from the definition, with no shared code path to the library.

#ifndef SPIKETOPO_TESTS_ORACLES_HPP_
#define SPIKETOPO_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

// Transport LP between f (N spikes, mass 1/N each) and g (M spikes, mass 1/M
// each) with costs |x_i - y_j|. Scaled by N*M, the plan is an integral flow:
// source i supplies M units, sink j absorbs N units. Solved by successive
// shortest paths with Bellman-Ford on the residual graph.
inline double transport_lp(const std::vector<double>& f, const std::vector<double>& g) {
  const int n = static_cast<int>(f.size());
  const int m = static_cast<int>(g.size());
  const int src = n + m, dst = n + m + 1, nodes = n + m + 2;
  struct Arc {
    int to, rev;
    long cap;
    double cost;
  };
  std::vector<std::vector<Arc>> graph(nodes);
  auto add = [&](int u, int v, long cap, double cost) {
    graph[u].push_back({v, static_cast<int>(graph[v].size()), cap, cost});
    graph[v].push_back({u, static_cast<int>(graph[u].size()) - 1, 0, -cost});
  };
  for (int i = 0; i < n; ++i) add(src, i, m, 0.0);
  for (int j = 0; j < m; ++j) add(n + j, dst, n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) add(i, n + j, static_cast<long>(n) * m, std::abs(f[i] - g[j]));
  }
  long remaining = static_cast<long>(n) * m;
  double cost = 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  while (remaining > 0) {
    std::vector<double> dist(nodes, inf);
    std::vector<std::pair<int, int>> parent(nodes, {-1, -1});
    dist[src] = 0.0;
    for (int pass = 0; pass < nodes; ++pass) {
      bool changed = false;
      for (int u = 0; u < nodes; ++u) {
        if (dist[u] == inf) continue;
        for (int k = 0; k < static_cast<int>(graph[u].size()); ++k) {
          const Arc& a = graph[u][k];
          if (a.cap > 0 && dist[u] + a.cost < dist[a.to] - 1e-9) {
            dist[a.to] = dist[u] + a.cost;
            parent[a.to] = {u, k};
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    long push = remaining;
    for (int v = dst; v != src; v = parent[v].first) {
      push = std::min(push, graph[parent[v].first][parent[v].second].cap);
    }
    for (int v = dst; v != src; v = parent[v].first) {
      Arc& a = graph[parent[v].first][parent[v].second];
      a.cap -= push;
      graph[v][a.rev].cap += push;
      cost += static_cast<double>(push) * a.cost;
    }
    remaining -= push;
  }
  return cost / (static_cast<double>(n) * m);
}

// Betweenness by listing every shortest path explicitly.
inline std::vector<double> betweenness_by_paths(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<double> cb(n, 0.0);
  for (int s = 0; s < n; ++s) {
    std::vector<int> dist(n, -1);
    std::queue<int> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
      }
    }
    for (int t = 0; t < n; ++t) {
      if (t == s || dist[t] < 0) continue;
      std::vector<std::vector<int>> paths;
      std::vector<int> path{s};
      std::function<void(int)> walk = [&](int u) {
        if (u == t) {
          paths.push_back(path);
          return;
        }
        if (static_cast<int>(path.size()) > dist[t]) return;
        for (int v : adj[u]) {
          if (dist[v] == dist[u] + 1) {
            path.push_back(v);
            walk(v);
            path.pop_back();
          }
        }
      };
      walk(s);
      std::vector<int> through(n, 0);
      for (const auto& p : paths) {
        for (std::size_t k = 1; k + 1 < p.size(); ++k) ++through[p[k]];
      }
      for (int v = 0; v < n; ++v) {
        if (through[v]) cb[v] += static_cast<double>(through[v]) / static_cast<double>(paths.size());
      }
    }
  }
  return cb;
}

// Components of the graph on n points with the edges whose weight is <= alpha.
inline int components_at(const std::vector<double>& w, int n, double alpha) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  int count = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (w[i * n + j] <= alpha) {
        const int a = find(i), b = find(j);
        if (a != b) {
          parent[a] = b;
          --count;
        }
      }
    }
  }
  return count;
}

struct SweepBarcode {
  std::vector<double> births;  // sorted
  std::vector<double> deaths;  // sorted
  std::vector<double> thresholds;
  std::vector<int> alive;      // bars alive at each threshold
  double total = 0.0;
};

// Recomputes connectivity of both filtrations from scratch at every distinct
// threshold. A bar is born when the union filtration loses a component and
// dies when the reference filtration does.
inline SweepBarcode threshold_sweep(const std::vector<double>& ref, const std::vector<double>& other,
                                    int n) {
  std::vector<double> mn(ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) mn[k] = std::min(ref[k], other[k]);
  std::set<double> levels;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      levels.insert(ref[i * n + j]);
      levels.insert(mn[i * n + j]);
    }
  }
  SweepBarcode out;
  int prev_ref = n, prev_min = n;
  for (double a : levels) {
    const int cr = components_at(ref, n, a);
    const int cm = components_at(mn, n, a);
    for (int k = 0; k < prev_min - cm; ++k) out.births.push_back(a);
    for (int k = 0; k < prev_ref - cr; ++k) out.deaths.push_back(a);
    out.thresholds.push_back(a);
    out.alive.push_back(cr - cm);
    prev_ref = cr;
    prev_min = cm;
  }
  for (double d : out.deaths) out.total += d;
  for (double b : out.births) out.total -= b;
  return out;
}

}  // namespace oracle

#endif  // SPIKETOPO_TESTS_ORACLES_HPP_
